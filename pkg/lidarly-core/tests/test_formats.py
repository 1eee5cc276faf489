import csv
import struct

import numpy as np
import pytest

from formats.json_io import (
    read_box_track,
    read_calibration,
    read_crop,
    read_json,
    write_box_track,
    write_calibration,
    write_json,
    write_ray_updates_csv,
)
from formats.lray import MAGIC, read_lray, write_lray
from formats.pfm import read_depth, read_pfm_values, write_depth, write_pfm_values
from formats.pgm import read_pgm, write_pgm
from formats.ply import read_ply, write_ply
from models.depth_models import DepthMap, ObjectMask
from models.geometry_models import BBox3D, BoxTrack, RigidTransform, TrackFrame
from models.scan_models import NO_RETURN, LidarScan, RayUpdate
from utils.errors import FormatError

from conftest import axis_camera, world_camera


def random_scan(rng: np.random.Generator, n: int) -> LidarScan:
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    ranges = rng.uniform(0.5, 120.0, n)
    ranges[rng.random(n) < 0.2] = NO_RETURN
    return LidarScan(
        origins=rng.uniform(-5, 5, (n, 3)).astype(np.float32),
        directions=dirs.astype(np.float32),
        ranges=ranges.astype(np.float32),
    )


def rewrite_is_bit_exact(tmp_path, write, read, obj) -> bool:
    first, second = tmp_path / "first", tmp_path / "second"
    write(first, obj)
    write(second, read(first))
    return first.read_bytes() == second.read_bytes()


class TestLray:
    def test_fuzzed_round_trips(self, tmp_path):
        rng = np.random.default_rng(100)
        for _ in range(100):
            scan = random_scan(rng, int(rng.integers(0, 300)))
            assert rewrite_is_bit_exact(tmp_path, write_lray, read_lray, scan)
            back = read_lray(tmp_path / "first")
            np.testing.assert_array_equal(back.ranges, scan.ranges)
            np.testing.assert_array_equal(back.directions, scan.directions)

    def test_layout(self, tmp_path):
        path = tmp_path / "scan.lray"
        write_lray(path, random_scan(np.random.default_rng(0), 5))
        data = path.read_bytes()
        assert data[:8] == MAGIC
        assert struct.unpack_from("<Q", data, 16)[0] == 5
        assert len(data) == 24 + 5 * 28

    def test_no_return_is_infinity(self, tmp_path):
        scan = LidarScan(origins=np.zeros((1, 3)), directions=[[0.0, 0.0, 1.0]], ranges=[NO_RETURN])
        write_lray(tmp_path / "s.lray", scan)
        assert np.isposinf(read_lray(tmp_path / "s.lray").ranges[0])

    def test_bad_magic(self, tmp_path):
        (tmp_path / "bad.lray").write_bytes(b"NOTLRAY\x00" + bytes(16))
        with pytest.raises(FormatError):
            read_lray(tmp_path / "bad.lray")

    def test_short_file(self, tmp_path):
        (tmp_path / "short.lray").write_bytes(MAGIC)
        with pytest.raises(FormatError):
            read_lray(tmp_path / "short.lray")

    def test_unknown_version(self, tmp_path):
        (tmp_path / "v2.lray").write_bytes(struct.pack("<8sIIQ", MAGIC, 2, 0, 0))
        with pytest.raises(FormatError):
            read_lray(tmp_path / "v2.lray")

    def test_count_disagrees_with_payload(self, tmp_path):
        path = tmp_path / "s.lray"
        write_lray(path, random_scan(np.random.default_rng(1), 4))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(FormatError):
            read_lray(path)

    def test_invalid_ray(self, tmp_path):
        record = np.array([0, 0, 0, 0, 0, 2, 5], dtype="<f4")
        (tmp_path / "s.lray").write_bytes(struct.pack("<8sIIQ", MAGIC, 1, 0, 1) + record.tobytes())
        with pytest.raises(FormatError):
            read_lray(tmp_path / "s.lray")


class TestPfm:
    def test_fuzzed_round_trips(self, tmp_path):
        rng = np.random.default_rng(101)
        for _ in range(100):
            h, w = (int(x) for x in rng.integers(1, 40, 2))
            values = rng.normal(0, 50, (h, w)).astype(np.float32)
            assert rewrite_is_bit_exact(tmp_path, write_pfm_values, read_pfm_values, values)
            np.testing.assert_array_equal(read_pfm_values(tmp_path / "first"), values)

    def test_top_row_first(self, tmp_path):
        values = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        write_pfm_values(tmp_path / "d.pfm", values)
        data = (tmp_path / "d.pfm").read_bytes()
        # stored bottom-up
        assert np.frombuffer(data[-16:], dtype="<f4").tolist() == [3.0, 4.0, 1.0, 2.0]

    def test_big_endian_input(self, tmp_path):
        values = np.array([[1.5, -2.0, 7.25]], dtype=">f4")
        (tmp_path / "be.pfm").write_bytes(b"Pf\n3 1\n1.0\n" + values.tobytes())
        np.testing.assert_array_equal(read_pfm_values(tmp_path / "be.pfm"), [[1.5, -2.0, 7.25]])

    def test_depth_keeps_placement(self, tmp_path):
        depth = DepthMap(values=np.ones((3, 3)), origin_offset=(5.0, 6.0), scale=2.0)
        write_depth(tmp_path / "d.pfm", depth)
        back = read_depth(tmp_path / "d.pfm", origin_offset=(5.0, 6.0), scale=2.0)
        assert back.origin_offset == (5.0, 6.0) and back.scale == 2.0

    def test_three_channel_rejected(self, tmp_path):
        (tmp_path / "rgb.pfm").write_bytes(b"PF\n1 1\n-1.0\n" + bytes(12))
        with pytest.raises(FormatError):
            read_pfm_values(tmp_path / "rgb.pfm")

    def test_truncated(self, tmp_path):
        (tmp_path / "t.pfm").write_bytes(b"Pf\n4 4\n-1.0\n" + bytes(8))
        with pytest.raises(FormatError):
            read_pfm_values(tmp_path / "t.pfm")

    def test_relative_depth_must_be_finite(self, tmp_path):
        write_pfm_values(tmp_path / "nan.pfm", np.array([[1.0, np.nan]], dtype=np.float32))
        with pytest.raises(FormatError) as err:
            read_depth(tmp_path / "nan.pfm")
        assert err.value.index == 1

    def test_metric_depth_may_hold_infinity(self, tmp_path):
        write_pfm_values(tmp_path / "inf.pfm", np.array([[9.0, np.inf]], dtype=np.float32))
        assert np.isposinf(read_depth(tmp_path / "inf.pfm", kind="metric").values[0, 1])


class TestPgm:
    def test_fuzzed_round_trips(self, tmp_path):
        rng = np.random.default_rng(102)
        for _ in range(100):
            h, w = (int(x) for x in rng.integers(1, 50, 2))
            mask = ObjectMask(bits=rng.random((h, w)) < 0.3)
            assert rewrite_is_bit_exact(tmp_path, write_pgm, read_pgm, mask)
            np.testing.assert_array_equal(read_pgm(tmp_path / "first").bits, mask.bits)

    def test_object_is_255(self, tmp_path):
        write_pgm(tmp_path / "m.pgm", ObjectMask(bits=[[True, False]]))
        assert (tmp_path / "m.pgm").read_bytes().endswith(b"\xff\x00")

    def test_comments_and_sixteen_bit(self, tmp_path):
        raster = np.array([[0, 1000, 65535]], dtype=">u2")
        (tmp_path / "m.pgm").write_bytes(b"P5\n# made elsewhere\n3 1\n65535\n" + raster.tobytes())
        assert read_pgm(tmp_path / "m.pgm").bits.tolist() == [[False, True, True]]

    def test_ascii_pgm_rejected(self, tmp_path):
        (tmp_path / "m.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
        with pytest.raises(FormatError):
            read_pgm(tmp_path / "m.pgm")

    def test_truncated_raster(self, tmp_path):
        (tmp_path / "m.pgm").write_bytes(b"P5\n4 4\n255\n" + bytes(5))
        with pytest.raises(FormatError):
            read_pgm(tmp_path / "m.pgm")

    def test_truncated_header(self, tmp_path):
        (tmp_path / "m.pgm").write_bytes(b"P5\n4")
        with pytest.raises(FormatError):
            read_pgm(tmp_path / "m.pgm")


class TestPly:
    @pytest.mark.parametrize("encoding", ["ascii", "binary"])
    def test_fuzzed_round_trips(self, tmp_path, encoding):
        rng = np.random.default_rng(103)

        def write(path, points):
            write_ply(path, points, encoding=encoding)

        for _ in range(100):
            points = rng.normal(0, 30, (int(rng.integers(0, 200)), 3)).astype(np.float32)
            assert rewrite_is_bit_exact(tmp_path, write, read_ply, points)
            np.testing.assert_array_equal(read_ply(tmp_path / "first"), points)

    def test_comment_in_header(self, tmp_path):
        write_ply(tmp_path / "p.ply", np.zeros((2, 3)), comment="world frame")
        assert b"comment world frame\n" in (tmp_path / "p.ply").read_bytes()
        assert read_ply(tmp_path / "p.ply").shape == (2, 3)

    def test_not_a_ply(self, tmp_path):
        (tmp_path / "p.ply").write_bytes(b"solid cube\n")
        with pytest.raises(FormatError):
            read_ply(tmp_path / "p.ply")

    def test_missing_vertices(self, tmp_path):
        write_ply(tmp_path / "p.ply", np.zeros((3, 3)), encoding="binary")
        data = (tmp_path / "p.ply").read_bytes()
        (tmp_path / "p.ply").write_bytes(data[:-12])
        with pytest.raises(FormatError):
            read_ply(tmp_path / "p.ply")

    def test_binary_doubles(self, tmp_path):
        header = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\n" \
                 b"property double x\nproperty double y\nproperty double z\nend_header\n"
        body = struct.pack("<6d", 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
        (tmp_path / "p.ply").write_bytes(header + body)
        points = read_ply(tmp_path / "p.ply")
        assert points.dtype == np.float64
        np.testing.assert_array_equal(points, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_binary_extra_properties_and_faces(self, tmp_path):
        header = b"ply\nformat binary_big_endian 1.0\ncomment scanner export\nelement vertex 2\n" \
                 b"property uchar red\nproperty float z\nproperty float x\nproperty float intensity\nproperty float y\n" \
                 b"element face 0\nproperty list uchar int vertex_indices\nend_header\n"
        body = struct.pack(">B4f", 200, 3.0, 1.0, 0.5, 2.0) + struct.pack(">B4f", 17, 6.0, 4.0, 0.25, 5.0)
        (tmp_path / "p.ply").write_bytes(header + body)
        np.testing.assert_array_equal(read_ply(tmp_path / "p.ply"), [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_ascii_extra_properties(self, tmp_path):
        header = "ply\nformat ascii 1.0\nelement vertex 2\nproperty int id\nproperty double x\n" \
                 "property double y\nproperty double z\nproperty uchar label\nend_header\n"
        (tmp_path / "p.ply").write_text(header + "7 1 2 3 1\n8 4 5 6 0\n", encoding="ascii")
        np.testing.assert_array_equal(read_ply(tmp_path / "p.ply"), [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_fuzzed_foreign_layouts(self, tmp_path):
        rng = np.random.default_rng(104)
        codes = {"float": "f4", "double": "f8"}
        for _ in range(50):
            n = int(rng.integers(0, 50))
            points = rng.normal(0, 30, (n, 3)).astype(np.float32)
            extras = [f"e{k}" for k in range(int(rng.integers(0, 3)))]
            names = [str(name) for name in rng.permutation(["x", "y", "z"] + extras)]
            types = {name: str(rng.choice(list(codes))) for name in names}
            order = str(rng.choice(["<", ">"]))
            record = np.dtype([(name, order + codes[types[name]]) for name in names])
            table = np.zeros(n, dtype=record)
            for k, axis in enumerate("xyz"):
                table[axis] = points[:, k]
            for name in extras:
                table[name] = rng.normal(size=n)
            fmt = "binary_little_endian" if order == "<" else "binary_big_endian"
            lines = ["ply", f"format {fmt} 1.0", f"element vertex {n}"]
            lines += [f"property {types[name]} {name}" for name in names] + ["end_header"]
            (tmp_path / "p.ply").write_bytes(("\n".join(lines) + "\n").encode("ascii") + table.tobytes())
            expected = points.astype(np.float64 if any(types[a] == "double" for a in "xyz") else np.float32)
            got = read_ply(tmp_path / "p.ply")
            assert got.dtype == expected.dtype
            np.testing.assert_array_equal(got, expected)

    @pytest.mark.parametrize("declaration", [
        b"property list uchar float x\nproperty float y\nproperty float z\n",
        b"property float x\nproperty float y\n",
        b"property float x\nproperty float y\nproperty float z\nproperty float x\n",
        b"property float128 x\nproperty float y\nproperty float z\n",
    ])
    def test_undeclared_layouts_are_rejected(self, tmp_path, declaration):
        data = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\n" + declaration + b"end_header\n" + bytes(64)
        (tmp_path / "p.ply").write_bytes(data)
        with pytest.raises(FormatError):
            read_ply(tmp_path / "p.ply")

    def test_element_before_the_vertices(self, tmp_path):
        data = b"ply\nformat ascii 1.0\nelement face 0\nproperty list uchar int vertex_indices\n" \
               b"element vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n"
        (tmp_path / "p.ply").write_bytes(data)
        with pytest.raises(FormatError):
            read_ply(tmp_path / "p.ply")


class TestJsonFiles:
    def test_calibration_round_trip(self, tmp_path):
        cam = world_camera()
        write_calibration(tmp_path / "c.json", cam)
        back = read_calibration(tmp_path / "c.json")
        assert back.fx == cam.fx and back.width == cam.width
        np.testing.assert_array_equal(back.pose.rotation, cam.pose.rotation)

    def test_calibration_pose_defaults_to_identity(self, tmp_path):
        write_json(tmp_path / "c.json", {"fx": 100, "fy": 100, "cx": 64, "cy": 64, "width": 128, "height": 128})
        cam = read_calibration(tmp_path / "c.json")
        expected = axis_camera()
        assert (cam.fx, cam.cx, cam.width) == (expected.fx, expected.cx, expected.width)
        np.testing.assert_array_equal(cam.pose.rotation, np.eye(3))
        np.testing.assert_array_equal(cam.pose.translation, np.zeros(3))

    def test_calibration_missing_field(self, tmp_path):
        write_json(tmp_path / "c.json", {"fx": 100, "fy": 100, "cx": 64, "width": 128, "height": 128})
        with pytest.raises(FormatError):
            read_calibration(tmp_path / "c.json")

    def test_calibration_bad_rotation(self, tmp_path):
        data = axis_camera().to_json()
        data["pose"]["rotation"] = [2, 0, 0, 0, 1, 0, 0, 0, 1]
        write_json(tmp_path / "c.json", data)
        with pytest.raises(ValueError):
            read_calibration(tmp_path / "c.json")

    def test_invalid_json(self, tmp_path):
        (tmp_path / "x.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(FormatError):
            read_json(tmp_path / "x.json")

    def test_box_track_round_trip(self, tmp_path):
        track = BoxTrack(frames=[
            TrackFrame(frame=0, box=BBox3D(center=[1, 2, 3], size=[4, 2, 1.5], yaw=0.3)),
            TrackFrame(frame=3, box=BBox3D(center=[1, 2, 4], size=[4, 2, 1.5], yaw=0.4, pitch=0.05)),
        ])
        write_box_track(tmp_path / "b.json", track)
        back = read_box_track(tmp_path / "b.json")
        assert [f.frame for f in back.frames] == [0, 3]
        assert back.box_at(3).pitch == pytest.approx(0.05)

    def test_box_track_object_form(self, tmp_path):
        write_json(tmp_path / "b.json", {"frames": [{"frame": 2, "center": [0, 0, 10], "size": [1, 1, 1]}]})
        assert read_box_track(tmp_path / "b.json").frames[0].frame == 2

    def test_crop(self, tmp_path):
        write_json(tmp_path / "crop.json", {"x0": 3, "y0": 4, "side": 50, "target": 100, "scale": 2.0})
        crop = read_crop(tmp_path / "crop.json")
        assert (crop.x0, crop.side, crop.scale) == (3, 50, 2.0)

    def test_crop_invalid(self, tmp_path):
        write_json(tmp_path / "crop.json", {"x0": 3, "y0": 4, "side": 0, "target": 100})
        with pytest.raises(FormatError):
            read_crop(tmp_path / "crop.json")

    def test_ray_updates_csv(self, tmp_path):
        updates = [RayUpdate(ray_index=4, old_range=NO_RETURN, new_range=9.25, hit_voxel=(4, 4, 1))]
        write_ray_updates_csv(tmp_path / "u.csv", updates)
        with open(tmp_path / "u.csv", newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows == [["ray_index", "old_range", "new_range", "ix", "iy", "iz"], ["4", "inf", "9.25", "4", "4", "1"]]


def test_rigid_transform_json_round_trip():
    pose = RigidTransform(rotation=world_camera().pose.rotation, translation=[1.0, -2.0, 0.5])
    data = pose.to_json()
    back = RigidTransform(rotation=data["rotation"], translation=data["translation"])
    np.testing.assert_array_equal(back.rotation, pose.rotation)
    np.testing.assert_array_equal(back.translation, pose.translation)
