import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from metrics.reconstruction import REPORT_COLUMNS, absrel, evaluate, l2_error, match_by_ray, write_reports_csv
from models.geometry_models import BBox3D
from models.report_models import EvalReport
from models.scan_models import NO_RETURN, LidarScan
from utils.errors import GridMismatch, LengthMismatch, NonPositiveDenominator

BOX = BBox3D(center=[0.0, 0.0, 10.0], size=[2.0, 2.0, 2.0])

ranges = arrays(np.float64, st.integers(1, 40), elements=st.floats(0.1, 200.0))


def forward_scan(values) -> LidarScan:
    """Rays from the origin fanned out in x, all with positive z"""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    dirs = np.column_stack([np.linspace(-0.05, 0.05, n), np.zeros(n), np.ones(n)])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return LidarScan(origins=np.zeros((n, 3)), directions=dirs, ranges=values)


class TestAbsRel:
    def test_identical(self):
        assert absrel([3.0, 4.0, 5.0], [3.0, 4.0, 5.0]) == 0.0

    def test_reconstructed_denominator(self):
        assert absrel([10.0], [9.0]) == pytest.approx(1.0 / 9.0)

    def test_ground_truth_denominator(self):
        assert absrel([10.0], [9.0], denominator="ground_truth") == pytest.approx(0.1)

    def test_matches_a_scalar_loop(self):
        rng = np.random.default_rng(0)
        gt, rec = rng.uniform(1, 50, 300), rng.uniform(1, 50, 300)
        expected = 0.0
        for a, b in zip(gt, rec):
            expected += abs(a - b) / b
        assert absrel(gt, rec) == pytest.approx(expected / 300, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            absrel([1.0, 2.0], [1.0])

    def test_empty(self):
        with pytest.raises(LengthMismatch):
            absrel([], [])

    def test_non_positive_denominator(self):
        with pytest.raises(NonPositiveDenominator) as err:
            absrel([1.0, 2.0], [1.0, 0.0])
        assert err.value.index == 1

    @given(ranges, st.integers(0, 2**16))
    def test_permutation_equivariant(self, gt, seed):
        rec = gt[::-1].copy()
        perm = np.random.default_rng(seed).permutation(gt.size)
        assert absrel(gt[perm], rec[perm]) == pytest.approx(absrel(gt, rec), rel=1e-9)

    @given(ranges, st.floats(0.01, 100.0))
    def test_scale_invariant(self, gt, s):
        rec = np.roll(gt, 1)
        assert absrel(s * gt, s * rec) == pytest.approx(absrel(gt, rec), rel=1e-9, abs=1e-12)


class TestL2Error:
    def test_identical(self):
        assert l2_error([[1.0, 2.0, 3.0]], [[1.0, 2.0, 3.0]]) == 0.0

    def test_three_four_five(self):
        assert l2_error([[0.0, 0.0, 0.0]], [[3.0, 4.0, 0.0]]) == pytest.approx(5.0)

    def test_matches_a_scalar_loop(self):
        rng = np.random.default_rng(1)
        gt, rec = rng.normal(size=(200, 3)), rng.normal(size=(200, 3))
        expected = sum(float(np.sqrt(((a - b) ** 2).sum())) for a, b in zip(gt, rec)) / 200
        assert l2_error(gt, rec) == pytest.approx(expected, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            l2_error(np.zeros((2, 3)), np.zeros((3, 3)))

    @given(st.integers(0, 2**16), st.floats(0.01, 100.0))
    def test_scales_with_the_points(self, seed, s):
        rng = np.random.default_rng(seed)
        gt, rec = rng.normal(size=(20, 3)), rng.normal(size=(20, 3))
        assert l2_error(s * gt, s * rec) == pytest.approx(s * l2_error(gt, rec), rel=1e-9)


class TestMatchByRay:
    def test_all_no_return(self):
        scan = forward_scan([NO_RETURN] * 4)
        match = match_by_ray(scan, scan, BOX)
        assert match.all_rays.size == 0 and match.missed_rays.size == 0

    def test_single_object_ray(self):
        scan = forward_scan([10.0])
        match = match_by_ray(scan, scan, BOX)
        assert match.all_rays.tolist() == match.object_rays.tolist() == [0]

    def test_misses_are_counted(self):
        gt = forward_scan([10.0, 30.0, NO_RETURN, NO_RETURN])
        rec = forward_scan([NO_RETURN, 30.0, 5.0, NO_RETURN])
        match = match_by_ray(gt, rec, BOX)
        assert match.all_rays.tolist() == [1]
        assert match.missed_rays.tolist() == [0, 2]
        assert match.missed_object_rays.tolist() == [0]

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            match_by_ray(forward_scan([1.0, 2.0]), forward_scan([1.0]), BOX)

    def test_direction_mismatch(self):
        gt = forward_scan([1.0, 2.0, 3.0])
        rec = LidarScan(origins=gt.origins, directions=gt.directions[::-1], ranges=gt.ranges)
        with pytest.raises(GridMismatch) as err:
            match_by_ray(gt, rec, BOX)
        assert err.value.index == 0


class TestEvaluate:
    def test_perfect_reconstruction(self):
        scan = forward_scan([10.0, 10.2, 30.0, NO_RETURN])
        report = evaluate(scan, scan, BOX)
        assert report.absrel_object == report.absrel_all == 0.0
        assert report.l2_object == report.l2_all == 0.0
        assert report.matched_rays == 3 and report.object_rays == 2
        assert report.miss_rate == 0.0

    def test_errors_and_provenance(self):
        gt = forward_scan([10.0, 30.0])
        rec = forward_scan([9.0, 30.0])
        report = evaluate(gt, rec, BOX, denominator="ground_truth", variant="full", config={"ransac_seed": 3})
        assert report.absrel_object == pytest.approx(0.1)
        assert report.absrel_all == pytest.approx(0.05)
        assert report.l2_object == pytest.approx(1.0)
        assert report.absrel_denominator == "ground_truth"
        assert report.variant == "full" and report.config == {"ransac_seed": 3}

    def test_no_object_rays(self):
        scan = forward_scan([30.0, 40.0])
        report = evaluate(scan, scan, BOX)
        assert report.absrel_object is None and report.object_rays == 0


def test_reports_csv(tmp_path):
    reports = [EvalReport(absrel_all=0.1, l2_all=0.2, matched_rays=3, variant="full"), EvalReport(variant="box-mask")]
    path = tmp_path / "reports.csv"
    write_reports_csv(path, reports, seeds=[0, 1])
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert list(rows[0]) == REPORT_COLUMNS
    assert rows[0]["variant"] == "full" and rows[0]["seed"] == "0" and rows[0]["absrel_all"] == "0.1"
    assert rows[1]["absrel_object"] == ""
