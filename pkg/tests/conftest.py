import math

import pytest

# one verdict line per acceptance criterion, echoed after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES

from uavlofi.config import default_mission
from uavlofi.generator import GeneratorConfig
from uavlofi.geometry import ArenaRect, CuboidObstacle, Vec3
from uavlofi.rendering import CameraIntrinsics
from uavlofi.simulator import SimConfig


@pytest.fixture
def arena():
    return ArenaRect(x_min=-20.0, x_max=20.0, y_min=-20.0, y_max=20.0)


@pytest.fixture
def gen_cfg(arena):
    return GeneratorConfig(arena=arena, rng_seed=0)


@pytest.fixture
def mission(arena):
    return default_mission(arena)


@pytest.fixture
def small_sim():
    """Simulation config with a low-resolution camera, for fast tests."""
    return SimConfig(intrinsics=CameraIntrinsics.from_fov(160, 120, 86.0))


@pytest.fixture
def corridor():
    """Two parallel walls whose inner faces sit 1.0 m from the x = 0 line."""
    return (
        CuboidObstacle(center_x=1.5, center_y=0.0, length=30.0, width=1.0,
                       height=20.0, rotation=math.pi / 2),
        CuboidObstacle(center_x=-1.5, center_y=0.0, length=30.0, width=1.0,
                       height=20.0, rotation=math.pi / 2),
    )
