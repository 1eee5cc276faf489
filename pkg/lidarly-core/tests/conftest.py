import os
import sys

import hypothesis
import numpy as np
import pytest

# Add the application directory to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.geometry_models import Camera, RigidTransform
from models.scene_models import DegradationConfig, Primitive, ScannerSpec, SceneConfig
from oracle_sim.bundle import make_bundle
from utils.settings import reset_settings

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))

# World x forward, y left, z up; the camera looks along +x
WORLD_TO_CAMERA = [0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0]

TRUE_ALPHA = 2.0
TRUE_BETA = 3.0


def axis_camera(width: int = 128, height: int = 128, f: float = 100.0) -> Camera:
    """Identity pose, principal point at the image center"""
    return Camera(fx=f, fy=f, cx=width / 2.0, cy=height / 2.0, width=width, height=height)


def world_camera(width: int = 480, height: int = 360, f: float = 480.0) -> Camera:
    return Camera(
        fx=f, fy=f, cx=width / 2.0, cy=height / 2.0, width=width, height=height,
        pose=RigidTransform(rotation=WORLD_TO_CAMERA),
    )


def walls() -> list:
    """Fronto-parallel walls at camera depths 15, 23 and 31 m, and a backdrop at 40 m.

    The walls are 2 mm thick: returns on their side faces would pair with pixels a few centimeters off.
    """
    return [
        Primitive.cuboid([15.001, 5.5, 0.0], [0.002, 5.0, 6.0]),
        Primitive.cuboid([23.001, -6.0, 0.0], [0.002, 8.0, 6.0]),
        Primitive.cuboid([31.001, 0.5, 0.0], [0.002, 5.0, 6.0]),
        Primitive.cuboid([40.5, 0.0, 0.0], [1.0, 60.0, 20.0]),
    ]


def scanner(azimuth_count: int = 256, elevation_count: int = 64) -> ScannerSpec:
    return ScannerSpec(
        azimuth_count=azimuth_count,
        elevation_count=elevation_count,
        azimuth_range=(-0.6, 0.6),
        elevation_range=(-0.25, 0.2),
        origin=RigidTransform(translation=[0.0, 0.0, 0.3]),
    )


def oracle_scene(
    degradation: DegradationConfig = DegradationConfig(),
    occluder: bool = False,
    seed: int = 0,
    **overrides,
) -> SceneConfig:
    """A yawed cuboid 20 m ahead of the camera in front of the walls"""
    values = dict(
        camera=world_camera(),
        scanner=scanner(),
        background=walls(),
        occluders=[Primitive.cuboid([12.0, -0.2, 0.0], [0.3, 0.3, 4.0])] if occluder else [],
        object=Primitive.cuboid([20.0, 0.5, 0.0], [3.0, 2.0, 1.6], yaw=0.5),
        alpha=TRUE_ALPHA,
        beta=TRUE_BETA,
        degradation=degradation,
        seed=seed,
    )
    values.update(overrides)
    return SceneConfig(**values)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test reads the environment anew"""
    for name in ("LIDARLY_THREADS", "LIDARLY_LOG_LEVEL", "LIDARLY_RANSAC_SEED"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def camera() -> Camera:
    return axis_camera()


@pytest.fixture(scope="session")
def clean_bundle():
    return make_bundle(oracle_scene(), seed=0)


@pytest.fixture(scope="session")
def occluded_bundle():
    return make_bundle(oracle_scene(occluder=True), seed=0)
