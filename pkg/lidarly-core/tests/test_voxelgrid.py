import numpy as np
import pytest

from geometry.boxes import box_frame
from geometry.rotations import yaw_pitch_matrix
from models.geometry_models import BBox3D, BoxFrame, RigidTransform
from models.scan_models import NO_RETURN, LidarScan, VoxelGrid
from voxelgrid.grid import dilate_occupancy, voxelize_points
from voxelgrid.rays import remove_points_in_box, update_rays

BOX = BBox3D(center=[0.0, 0.0, 10.0], size=[2.0, 2.0, 2.0])


def single_voxel_grid(camera, index=(4, 4, 1), resolution=(8, 8, 8)) -> VoxelGrid:
    occupancy = np.zeros(resolution, dtype=bool)
    occupancy[index] = True
    return VoxelGrid(frame=box_frame(BOX, camera), resolution=resolution, occupancy=occupancy)


def scan_of(origins, directions, ranges) -> LidarScan:
    directions = np.asarray(directions, dtype=np.float64)
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    return LidarScan(origins=np.asarray(origins, dtype=np.float64), directions=directions, ranges=np.asarray(ranges, dtype=np.float64))


class TestVoxelize:
    def test_center_point(self, camera):
        grid = voxelize_points(np.array([[0.0, 0.0, 10.0]]), box_frame(BOX, camera), (3, 3, 3))
        assert grid.occupied_count == 1
        assert grid.occupancy[1, 1, 1]

    def test_no_points(self, camera):
        grid = voxelize_points(np.zeros((0, 3)), box_frame(BOX, camera), (4, 5, 6))
        assert grid.occupied_count == 0
        assert grid.occupancy.shape == (4, 5, 6)
        assert grid.flat_occupancy().size == 120

    def test_points_outside_are_dropped(self, camera):
        points = np.array([[0.0, 0.0, 10.0], [0.0, 0.0, 12.0], [5.0, 0.0, 10.0]])
        grid = voxelize_points(points, box_frame(BOX, camera), (3, 3, 3))
        assert grid.dropped_points == 2 and grid.occupied_count == 1

    def test_rounding_error_outside_is_kept(self, camera):
        grid = voxelize_points(np.array([[0.0, 0.0, 11.0 + 1e-9]]), box_frame(BOX, camera), (4, 4, 4))
        assert grid.dropped_points == 0 and grid.occupancy[2, 2, 3]

    def test_point_on_the_far_face_lands_in_the_last_cell(self, camera):
        grid = voxelize_points(np.array([[1.0, 1.0, 11.0]]), box_frame(BOX, camera), (4, 4, 4))
        assert grid.occupancy[3, 3, 3]

    def test_matches_per_point_floor(self, camera):
        rng = np.random.default_rng(17)
        box = BBox3D(center=[0.5, -0.3, 12.0], size=[3.0, 1.0, 2.0], yaw=0.7, pitch=-0.2)
        frame = box_frame(box, camera)
        resolution = (7, 3, 5)
        local = rng.uniform(-0.6, 0.6, size=(2000, 3)) * box.size
        points = box.orientation @ local.T
        points = points.T + box.center
        grid = voxelize_points(points, frame, resolution)

        expected = np.zeros(resolution, dtype=bool)
        size = (frame.delta_max - frame.delta_min) / np.array(resolution)
        dropped = 0
        for p in points:
            q = frame.rotation @ p
            if np.any(q < frame.delta_min) or np.any(q > frame.delta_max):
                dropped += 1
                continue
            idx = [min(int(np.floor((q[k] - frame.delta_min[k]) / size[k])), resolution[k] - 1) for k in range(3)]
            expected[tuple(idx)] = True
        np.testing.assert_array_equal(grid.occupancy, expected)
        assert grid.dropped_points == dropped

    def test_flat_order_is_x_fastest(self, camera):
        grid = single_voxel_grid(camera, index=(1, 0, 0), resolution=(2, 3, 4))
        assert np.flatnonzero(grid.flat_occupancy()).tolist() == [1]

    def test_occupied_centers_are_camera_frame(self, camera):
        grid = voxelize_points(np.array([[0.0, 0.0, 10.0]]), box_frame(BOX, camera), (3, 3, 3))
        np.testing.assert_allclose(grid.occupied_centers(), [[0.0, 0.0, 10.0]], atol=1e-12)

    def test_resolution_must_be_positive(self, camera):
        with pytest.raises(ValueError):
            VoxelGrid(frame=box_frame(BOX, camera), resolution=(0, 1, 1), occupancy=np.zeros((0, 1, 1), dtype=bool))


class TestDilation:
    def test_radius_one_adds_face_neighbours(self, camera):
        grid = dilate_occupancy(single_voxel_grid(camera, index=(3, 3, 3)), 1)
        assert grid.occupied_count == 7
        assert grid.occupancy[2, 3, 3] and grid.occupancy[3, 3, 4]
        assert not grid.occupancy[2, 2, 3]

    def test_radius_zero_is_a_no_op(self, camera):
        grid = single_voxel_grid(camera)
        assert dilate_occupancy(grid, 0) is grid

    def test_negative_radius(self, camera):
        with pytest.raises(ValueError):
            dilate_occupancy(single_voxel_grid(camera), -1)


class TestUpdateRays:
    def test_no_return_ray_takes_the_voxel_entry(self, camera):
        # voxel (4, 4, 1) spans x, y in [0, 0.25] and z in [9.25, 9.5]
        scan = scan_of([[0.1, 0.1, 0.0]], [[0.0, 0.0, 1.0]], [NO_RETURN])
        new_scan, updates = update_rays(scan, single_voxel_grid(camera))
        assert len(updates) == 1
        assert updates[0].new_range == pytest.approx(9.25, abs=1e-12)
        assert updates[0].hit_voxel == (4, 4, 1)
        assert updates[0].old_range == NO_RETURN
        assert new_scan.ranges[0] == pytest.approx(9.25)

    def test_closer_return_occludes_the_object(self, camera):
        scan = scan_of([[0.1, 0.1, 0.0]], [[0.0, 0.0, 1.0]], [5.0])
        new_scan, updates = update_rays(scan, single_voxel_grid(camera))
        assert updates == []
        assert new_scan.ranges[0] == 5.0

    def test_farther_return_is_pulled_in(self, camera):
        scan = scan_of([[0.1, 0.1, 0.0]], [[0.0, 0.0, 1.0]], [30.0])
        _, updates = update_rays(scan, single_voxel_grid(camera))
        assert updates[0].new_range < updates[0].old_range == 30.0

    def test_missing_ray_is_untouched(self, camera):
        scan = scan_of([[0.1, 0.1, 0.0], [5.0, 0.0, 0.0]], [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]], [NO_RETURN, 20.0])
        new_scan, updates = update_rays(scan, single_voxel_grid(camera))
        assert [u.ray_index for u in updates] == [0]
        assert new_scan.ranges[1] == 20.0

    def test_voxel_center_distance(self, camera):
        scan = scan_of([[0.125, 0.125, 0.0]], [[0.0, 0.0, 1.0]], [NO_RETURN])
        _, updates = update_rays(scan, single_voxel_grid(camera), voxel_center_distance=True)
        assert updates[0].new_range == pytest.approx(9.375)

    def test_input_scan_is_not_modified(self, camera):
        scan = scan_of([[0.1, 0.1, 0.0]], [[0.0, 0.0, 1.0]], [NO_RETURN])
        update_rays(scan, single_voxel_grid(camera))
        assert np.isposinf(scan.ranges[0])

    def test_empty_grid_updates_nothing(self, camera):
        grid = voxelize_points(np.zeros((0, 3)), box_frame(BOX, camera), (4, 4, 4))
        scan = scan_of([[0.0, 0.0, 0.0]], [[0.0, 0.0, 1.0]], [NO_RETURN])
        assert update_rays(scan, grid)[1] == []


def random_surface_case(camera, seed: int, n_rays: int = 400):
    """A grid voxelized from random points and rays from the camera center aimed at those points"""
    rng = np.random.default_rng(seed)
    box = BBox3D(center=[0.4, -0.2, 10.0], size=[2.0, 1.0, 1.5], yaw=rng.uniform(-3, 3), pitch=rng.uniform(-0.3, 0.3))
    frame = box_frame(box, camera)
    local = rng.uniform(-0.49, 0.49, size=(n_rays, 3)) * box.size
    points = local @ box.orientation.T + box.center
    grid = voxelize_points(points, frame, (12, 12, 12))
    ranges = np.linalg.norm(points, axis=1)
    scan = LidarScan(origins=np.zeros_like(points), directions=points / ranges[:, None], ranges=ranges)
    return box, frame, grid, scan


class TestUpdateRayProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_no_tunneling(self, camera, seed):
        _, _, grid, scan = random_surface_case(camera, seed)
        _, updates = update_rays(scan, grid)
        # every return sits inside an occupied voxel, so every ray must stop at or before it
        assert sorted(u.ray_index for u in updates) == list(range(len(scan)))
        assert all(u.new_range <= u.old_range for u in updates)

    @pytest.mark.parametrize("seed", range(5))
    def test_hits_stay_near_the_box(self, camera, seed):
        box, frame, grid, scan = random_surface_case(camera, seed)
        background = scan.with_ranges(np.full(len(scan), NO_RETURN))
        new_scan, updates = update_rays(background, grid)
        slack = 0.5 * np.linalg.norm(grid.voxel_size) + 1e-9
        hits = frame.align(new_scan.points()[[u.ray_index for u in updates]])
        assert np.all(frame.contains_aligned(hits, tol=slack))

    def test_idempotent(self, camera):
        _, _, grid, scan = random_surface_case(camera, 11)
        background = scan.with_ranges(np.full(len(scan), NO_RETURN))
        once, _ = update_rays(background, grid)
        twice, _ = update_rays(once, grid)
        np.testing.assert_array_equal(once.ranges, twice.ranges)

    def test_thread_count_does_not_change_the_result(self, camera):
        _, _, grid, scan = random_surface_case(camera, 12, n_rays=5000)
        background = scan.with_ranges(np.full(len(scan), NO_RETURN))
        serial, serial_updates = update_rays(background, grid, threads=1)
        parallel, parallel_updates = update_rays(background, grid, threads=4)
        np.testing.assert_array_equal(serial.ranges, parallel.ranges)
        assert serial_updates == parallel_updates

    @pytest.mark.parametrize("seed", range(3))
    def test_rigid_motion_of_the_scene(self, camera, seed):
        _, frame, grid, scan = random_surface_case(camera, 20 + seed)
        rng = np.random.default_rng(seed)
        motion = RigidTransform(rotation=yaw_pitch_matrix(rng.uniform(-3, 3), rng.uniform(-1, 1)), translation=rng.uniform(-50, 50, 3))
        moved_frame = BoxFrame(
            rotation=frame.rotation, delta_min=frame.delta_min, delta_max=frame.delta_max,
            half_extent=frame.half_extent, camera_pose=frame.camera_pose.compose(motion.inverse()),
        )
        moved_grid = VoxelGrid(frame=moved_frame, resolution=grid.resolution, occupancy=grid.occupancy)
        moved_scan = LidarScan(origins=motion.apply(scan.origins), directions=motion.rotate(scan.directions), ranges=scan.ranges)
        _, updates = update_rays(scan, grid)
        _, moved_updates = update_rays(moved_scan, moved_grid)
        assert [u.ray_index for u in updates] == [u.ray_index for u in moved_updates]
        np.testing.assert_allclose([u.new_range for u in moved_updates], [u.new_range for u in updates], atol=1e-6)


class TestRemovePointsInBox:
    def test_nothing_inside(self):
        scan = scan_of([[0.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]], [3.0])
        removed = remove_points_in_box(scan, BOX)
        assert removed.points.shape == (0, 3)
        np.testing.assert_array_equal(removed.scan.ranges, scan.ranges)

    def test_return_at_the_center(self):
        scan = scan_of([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], [10.0, 4.0])
        removed = remove_points_in_box(scan, BOX)
        assert np.isposinf(removed.scan.ranges[0]) and removed.scan.ranges[1] == 4.0
        np.testing.assert_allclose(removed.points, [[0.0, 0.0, 10.0]])
        assert removed.ray_indices.tolist() == [0]

    def test_delete_policy_drops_rays(self):
        scan = scan_of([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], [10.0, 4.0])
        removed = remove_points_in_box(scan, BOX, policy="delete")
        assert len(removed.scan) == 1 and removed.scan.ranges[0] == 4.0

    def test_no_return_rays_are_ignored(self):
        scan = scan_of([[0.0, 0.0, 0.0]], [[0.0, 0.0, 1.0]], [NO_RETURN])
        assert remove_points_in_box(scan, BOX).ray_indices.size == 0

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            remove_points_in_box(scan_of([[0.0, 0.0, 0.0]], [[0.0, 0.0, 1.0]], [1.0]), BOX, policy="keep")
