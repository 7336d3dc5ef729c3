import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from phplate.material import (MaterialParams, bending_matrix, bending_rigidity,
                              coenergy_pointwise, hamiltonian_density)

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize("E, nu, h, expected", [
    (12.0, 0.0, 1.0, 1.0),
    (1.0, 0.0, 1.0, 1.0 / 12.0),
    (70e9, 0.3, 0.003, 70e9 * 0.003**3 / (12 * 0.91)),
])
def test_bending_rigidity(E, nu, h, expected):
    p = MaterialParams(young_modulus=E, poisson=nu, thickness=h)
    assert_allclose(bending_rigidity(p), expected, rtol=1e-14)
    assert_allclose(p.rigidity, expected, rtol=1e-14)


def test_bending_rigidity_rejects_nu_squared_above_one():
    class Raw:
        young_modulus, thickness, poisson = 1.0, 1.0, 1.0
    with pytest.raises(ValueError):
        bending_rigidity(Raw())


@pytest.mark.parametrize("kwargs", [
    dict(surface_density=0.0), dict(young_modulus=-1.0), dict(thickness=0.0),
    dict(poisson=0.5), dict(poisson=-0.1), dict(damping=-1e-3),
])
def test_parameter_validation(kwargs):
    with pytest.raises(ValueError):
        MaterialParams(**kwargs)


def test_from_rigidity_roundtrip():
    p = MaterialParams.from_rigidity(2.5, 3.0, poisson=0.25, damping=0.1)
    assert_allclose(p.rigidity, 2.5, rtol=1e-14)
    assert p.surface_density == 3.0 and p.damping == 0.1


def test_beam_parameters():
    p = MaterialParams.beam(4.0, 2.0)
    assert p.flexural_rigidity == 4.0 and p.linear_density == 2.0
    with pytest.raises(ValueError):
        MaterialParams().flexural_rigidity


def test_bending_matrix_examples():
    assert_allclose(bending_matrix(MaterialParams.from_rigidity(1.0, 1.0)), np.diag([1.0, 1.0, 0.5]))
    D = bending_matrix(MaterialParams.from_rigidity(2.0, 1.0, poisson=0.3))
    assert_allclose(D, 2 * np.array([[1, 0.3, 0], [0.3, 1, 0], [0, 0, 0.35]]), rtol=1e-14)


@given(nu=st.floats(0.0, 0.4999), D=st.floats(1e-3, 1e3))
def test_bending_matrix_symmetric_positive_definite(nu, D):
    M = bending_matrix(MaterialParams.from_rigidity(D, 1.0, poisson=nu))
    assert np.array_equal(M, M.T)
    assert np.linalg.eigvalsh(M).min() > 0


def test_hamiltonian_density_examples():
    p = MaterialParams.from_rigidity(1.0, 2.0)
    assert hamiltonian_density(np.zeros(4), p) == 0.0
    v = 3.0
    assert_allclose(hamiltonian_density([2.0 * v, 0, 0, 0], p), 0.5 * 2.0 * v**2)
    assert_allclose(hamiltonian_density([0, 1.0, 1.0, 0], MaterialParams.from_rigidity(1.0, 1.0)), 1.0)


def test_coenergy_examples():
    p = MaterialParams.from_rigidity(2.0, 1.5, poisson=0.3)
    assert_allclose(coenergy_pointwise(np.zeros(4), p), 0.0)
    assert_allclose(coenergy_pointwise([0, 1.0, 0, 0], p)[1:], 2.0 * np.array([1.0, 0.3, 0.0]))
    assert_allclose(coenergy_pointwise([2 * 1.5, 0, 0, 0], p)[0], 2.0)


def test_pointwise_functions_broadcast():
    p = MaterialParams.from_rigidity(1.0, 1.0, poisson=0.2)
    alpha = np.random.default_rng(0).standard_normal((4, 5, 3))
    H = hamiltonian_density(alpha, p)
    assert H.shape == (5, 3)
    assert_allclose(H[2, 1], hamiltonian_density(alpha[:, 2, 1], p))


@given(st.lists(finite, min_size=4, max_size=4), st.floats(0.0, 0.49), st.floats(0.1, 10.0))
def test_energy_is_half_alpha_dot_coenergy(alpha, nu, mu):
    p = MaterialParams.from_rigidity(1.7, mu, poisson=nu)
    alpha = np.array(alpha)
    H = hamiltonian_density(alpha, p)
    assert_allclose(H, 0.5 * alpha @ coenergy_pointwise(alpha, p), rtol=1e-12, atol=1e-12)
    assert H >= 0.0
    if np.linalg.norm(alpha) > 1e-100:
        assert H > 0.0
