import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from phplate.material import MaterialParams
from phplate.mesh import Mesh1D, Mesh2D
from phplate.plate import assemble_plate_force_control, assemble_plate_kinematic_control
from phplate.beam import assemble_beam

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SS = {s: "simply_supported" for s in ("bottom", "right", "top", "left")}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def unit_plate():
    return MaterialParams.from_rigidity(1.0, 1.0)


@pytest.fixture(scope="session")
def unit_beam():
    return MaterialParams.beam(1.0, 1.0)


@pytest.fixture(scope="session")
def ss_plate_8(unit_plate):
    return assemble_plate_force_control(Mesh2D(1.0, 1.0, 8, 8), p=unit_plate, boundary=SS)


@pytest.fixture(scope="session")
def free_plate_4():
    p = MaterialParams(young_modulus=2.0, poisson=0.3, thickness=0.5, surface_density=1.5)
    return assemble_plate_force_control(Mesh2D(2.0, 1.0, 4, 3), p=p)


@pytest.fixture(scope="session")
def mixed_plate_4(unit_plate):
    bc = {"bottom": "clamped", "right": "input", "top": "simply_supported", "left": "free"}
    return assemble_plate_force_control(Mesh2D(1.0, 1.5, 4, 4), p=unit_plate, boundary=bc)


@pytest.fixture(scope="session")
def kinematic_plate_3(unit_plate):
    return assemble_plate_kinematic_control(Mesh2D(1.0, 1.0, 3, 3), p=unit_plate,
                                            boundary={"right": "input"})


@pytest.fixture(scope="session")
def cantilever_16(unit_beam):
    return assemble_beam(Mesh1D(1.0, 16), unit_beam, "force", {"left": "clamped", "right": "free"})
