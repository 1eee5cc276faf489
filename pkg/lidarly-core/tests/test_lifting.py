import numpy as np
import pytest

from depthlift.lifting import lift_pixels, pixel_samples, samples_inside_box
from geometry.boxes import box_frame
from geometry.projection import project_points
from models.depth_models import AffineDepthParams, DepthMap, ObjectMask, PixelSampleSet
from models.geometry_models import BBox3D, Camera
from utils.errors import DimensionMismatch, NonPositiveDepth

BOX = BBox3D(center=[0.0, 0.0, 10.0], size=[2.0, 2.0, 2.0], yaw=0.3)


def one_sample(u: float, v: float, d: float) -> PixelSampleSet:
    return PixelSampleSet(u=[u], v=[v], d=[d], X=[[0.0, 0.0, 1.0]])


class TestLiftPixels:
    def test_principal_point(self, camera):
        points = lift_pixels(one_sample(64.0, 64.0, 3.5), AffineDepthParams(alpha=2.0, beta=3.0), camera)
        np.testing.assert_allclose(points, [[0.0, 0.0, 10.0]])

    def test_identity_intrinsics(self):
        cam = Camera(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=10, height=10)
        samples = PixelSampleSet(u=[2.0, 5.5], v=[3.0, 0.5], d=[4.0, 2.0], X=np.zeros((2, 3)))
        points = lift_pixels(samples, AffineDepthParams(alpha=1.0, beta=0.0), cam)
        np.testing.assert_allclose(points, [[8.0, 12.0, 4.0], [11.0, 1.0, 2.0]])

    def test_round_trip_through_projection(self, camera):
        rng = np.random.default_rng(3)
        n = 1000
        u, v = rng.uniform(0, camera.width, n), rng.uniform(0, camera.height, n)
        samples = PixelSampleSet(u=u, v=v, d=rng.uniform(0.5, 30.0, n), X=np.zeros((n, 3)))
        points = lift_pixels(samples, AffineDepthParams(alpha=1.7, beta=0.4), camera)
        uv, _ = project_points(camera, points)
        np.testing.assert_allclose(uv[:, 0], u, atol=1e-6)
        np.testing.assert_allclose(uv[:, 1], v, atol=1e-6)

    def test_non_positive_depth_reports_the_index(self, camera):
        samples = PixelSampleSet(u=[10.0, 20.0, 30.0], v=[1.0, 1.0, 1.0], d=[5.0, 1.0, 0.5], X=np.zeros((3, 3)))
        with pytest.raises(NonPositiveDepth) as err:
            lift_pixels(samples, AffineDepthParams(alpha=1.0, beta=-1.0), camera)
        assert err.value.index == 1

    def test_keeps_sample_order(self, camera):
        samples = PixelSampleSet(u=[100.0, 10.0], v=[64.0, 64.0], d=[1.0, 1.0], X=np.zeros((2, 3)))
        points = lift_pixels(samples, AffineDepthParams(alpha=5.0, beta=0.0), camera)
        assert points[0, 0] > 0 > points[1, 0]


class TestPixelSamples:
    def test_one_sample_per_mask_pixel(self, camera):
        bits = np.zeros((128, 128), dtype=bool)
        bits[60:64, 70:75] = True
        samples = pixel_samples(DepthMap(values=np.full((128, 128), 2.0)), ObjectMask(bits=bits), camera, box_frame(BOX, camera))
        assert len(samples) == 20
        assert samples.u.min() == 70.5 and samples.v.max() == 63.5

    def test_directions_are_box_aligned(self, camera):
        frame = box_frame(BOX, camera)
        bits = np.zeros((128, 128), dtype=bool)
        bits[10, 20] = True
        samples = pixel_samples(DepthMap(values=np.ones((128, 128))), ObjectMask(bits=bits), camera, frame)
        np.testing.assert_allclose(samples.X[0], frame.rotation @ camera.unproject(20.5, 10.5))

    def test_crop_raster_maps_back_to_the_full_frame(self, camera):
        depth = DepthMap(values=np.arange(16.0).reshape(4, 4), origin_offset=(40.0, 50.0), scale=2.0)
        bits = np.zeros((4, 4), dtype=bool)
        bits[1, 2] = True
        samples = pixel_samples(depth, ObjectMask(bits=bits), camera, box_frame(BOX, camera))
        assert (samples.u[0], samples.v[0], samples.d[0]) == (41.25, 50.75, 6.0)

    def test_pixels_outside_the_image_are_skipped(self, camera):
        depth = DepthMap(values=np.ones((10, 10)), origin_offset=(123.0, 0.0))
        samples = pixel_samples(depth, ObjectMask(bits=np.ones((10, 10), dtype=bool)), camera, box_frame(BOX, camera))
        assert len(samples) == 50

    def test_mask_must_match_the_raster(self, camera):
        with pytest.raises(DimensionMismatch):
            pixel_samples(DepthMap(values=np.ones((10, 10))), ObjectMask(bits=np.ones((10, 12), dtype=bool)), camera, box_frame(BOX, camera))


class TestSamplesInsideBox:
    def test_keeps_points_that_land_in_the_box(self, camera):
        frame = box_frame(BOX, camera)
        # alpha=2, beta=3: d=3.5 lands on the box center, d=0.5 at 4 m and d=20 at 43 m
        samples = PixelSampleSet(u=[64.0, 64.0, 64.0], v=[64.0] * 3, d=[0.5, 3.5, 20.0],
                                 X=np.tile(frame.rotation @ [0.0, 0.0, 1.0], (3, 1)))
        kept, dropped = samples_inside_box(samples, AffineDepthParams(alpha=2.0, beta=3.0), frame)
        assert dropped == 2
        np.testing.assert_array_equal(kept.d, [3.5])

    def test_nothing_to_drop(self, camera):
        frame = box_frame(BOX, camera)
        samples = PixelSampleSet(u=[64.0], v=[64.0], d=[3.5], X=[frame.rotation @ [0.0, 0.0, 1.0]])
        kept, dropped = samples_inside_box(samples, AffineDepthParams(alpha=2.0, beta=3.0), frame)
        assert dropped == 0 and kept is samples
