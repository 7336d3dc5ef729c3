import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from phplate.mesh import Mesh2D
from phplate.phsys import AssemblyError, BlockLayout, PhStateVector, PhSystem
from phplate.plate import assemble_plate_force_control, attach_damping
from phplate.material import MaterialParams
from phplate.scenario import gradient_error, power_balance_error


def random_system(rng, n1=3, n2=4, m=2):
    """Separable system with random SPD mass and Gram blocks."""
    def spd(k):
        A = rng.standard_normal((k, k))
        return A @ A.T + k * np.eye(k)
    n = n1 + n2
    G = rng.standard_normal((n2, n1))
    J = np.block([[np.zeros((n1, n1)), -G.T], [G, np.zeros((n2, n2))]])
    M = sp.block_diag([spd(n1), spd(n2)])
    K = sp.block_diag([spd(n1), spd(n2)])
    B = rng.standard_normal((n, m))
    return PhSystem(M=M, J=J, K=K, B=B, layout=BlockLayout(("p", "q"), (n1, n2)))


def test_block_layout():
    lay = BlockLayout(("a", "b", "c"), (2, 3, 1))
    assert lay.size == 6 and lay.offsets == (0, 2, 5, 6)
    parts = lay.split(np.arange(6))
    assert_allclose(parts["b"], [2, 3, 4])
    with pytest.raises(ValueError):
        BlockLayout(("a",), (1, 2))
    state = PhStateVector(lay, np.arange(6.0))
    assert_allclose(state.block("c"), [5.0])
    with pytest.raises(ValueError):
        PhStateVector(lay, np.zeros(5))


def test_coenergy_is_alpha_when_gram_equals_mass(rng):
    A = rng.standard_normal((4, 4))
    M = A @ A.T + 4 * np.eye(4)
    s = PhSystem(M=M, J=np.zeros((4, 4)), K=M, B=np.zeros((4, 1)), layout=BlockLayout(("x",), (4,)))
    alpha = rng.standard_normal(4)
    assert_allclose(s.coenergy(M @ alpha), alpha, rtol=1e-12)
    assert_allclose(s.hamiltonian(M @ alpha), 0.5 * alpha @ M @ alpha, rtol=1e-12)


def test_rejects_non_skew_interconnection():
    with pytest.raises(AssemblyError):
        PhSystem(M=np.eye(2), J=np.array([[0.0, 1.0], [1.0, 0.0]]), K=np.eye(2),
                 B=np.zeros((2, 1)), layout=BlockLayout(("x",), (2,)))


def test_shape_validation():
    with pytest.raises(ValueError):
        PhSystem(M=np.eye(2), J=np.zeros((2, 2)), K=np.eye(3), B=np.zeros((2, 1)),
                 layout=BlockLayout(("x",), (2,)))
    with pytest.raises(ValueError):
        PhSystem(M=np.eye(2), J=np.zeros((2, 2)), K=np.eye(2), B=np.zeros((2, 1)),
                 layout=BlockLayout(("x",), (2,)), port_labels=("a", "b"))


def test_zero_state_is_at_rest(free_plate_4):
    xdot, y = free_plate_4.dynamics(np.zeros(free_plate_4.size), np.zeros(free_plate_4.n_inputs))
    assert not xdot.any() and not y.any()


def test_input_length_checked(free_plate_4):
    with pytest.raises(ValueError):
        free_plate_4.dynamics(np.zeros(free_plate_4.size), np.zeros(3))


def test_uniform_velocity_energy():
    p = MaterialParams.from_rigidity(1.0, 2.5)
    s = assemble_plate_force_control(Mesh2D(2.0, 1.5, 3, 2), p=p)
    c = 0.8
    v = s.basis.velocity.interpolate(lambda x, y: c + 0 * x, lambda x, y: 0 * x,
                                     lambda x, y: 0 * x, lambda x, y: 0 * x)
    alpha = np.zeros(s.size)
    alpha[: v.size] = p.surface_density * v
    assert_allclose(s.hamiltonian_alpha(alpha), 0.5 * p.surface_density * c**2 * 3.0, rtol=1e-12)
    # derivative dofs carry mass-matrix conditioning noise
    assert_allclose(s.coenergy(s.tilde(alpha))[: v.size], v, atol=1e-10)


def test_damping_dissipation_of_uniform_velocity():
    r, c = 0.3, 1.7
    s = attach_damping(assemble_plate_force_control(Mesh2D(1.0, 2.0, 2, 3)), r)
    e = np.zeros(s.size)
    e[: s.n_velocity] = s.basis.velocity.interpolate(
        lambda x, y: c + 0 * x, lambda x, y: 0 * x, lambda x, y: 0 * x, lambda x, y: 0 * x)
    assert_allclose(s.dissipation(e), r * c**2 * 2.0, rtol=1e-12)
    assert s.damped
    # damping leaves the interconnection untouched
    assert abs(s.J + s.J.T).max() == 0.0


def test_damping_validation(free_plate_4):
    assert attach_damping(free_plate_4, 0.0) is free_plate_4
    with pytest.raises(ValueError):
        attach_damping(free_plate_4, -1.0)
    n = free_plate_4.size
    with pytest.raises(ValueError):
        free_plate_4.with_damping(sp.eye(n, 2), np.array([[1.0, 2.0], [0.0, 1.0]]))


@given(st.integers(0, 2**32 - 1))
def test_power_balance_random_systems(seed):
    rng = np.random.default_rng(seed)
    s = random_system(rng)
    x, u = rng.standard_normal(s.size), rng.standard_normal(s.n_inputs)
    assert power_balance_error(s, x, u) < 1e-10
    S = np.diag(rng.uniform(0, 2, 2))
    d = s.with_damping(sp.eye(s.size, 2), S)
    assert power_balance_error(d, x, u) < 1e-10
    assert d.dissipation(d.coenergy(x)) >= 0.0


@given(st.integers(0, 2**32 - 1))
def test_coenergy_is_gradient_random_systems(seed):
    rng = np.random.default_rng(seed)
    s = random_system(rng)
    assert gradient_error(s, rng.standard_normal(s.size), rng.standard_normal(s.size)) < 1e-6


def test_restrict_and_expand(rng):
    s = random_system(rng)
    keep = np.array([0, 2, 3, 6])
    r = s.restrict(keep, drop_zero_ports=False)
    assert r.layout.sizes == (2, 2) and r.full_size == s.size
    v = rng.standard_normal(4)
    full = r.expand(v)
    assert_allclose(full[keep], v)
    assert np.count_nonzero(full) == 4
    with pytest.raises(IndexError):
        s.restrict([0, 99])


def test_restrict_drops_dead_ports():
    B = np.zeros((3, 2))
    B[0, 0] = 1.0
    B[2, 1] = 1.0
    s = PhSystem(M=np.eye(3), J=np.zeros((3, 3)), K=np.eye(3), B=B,
                 layout=BlockLayout(("x",), (3,)), port_labels=("a", "b"))
    assert s.restrict([0, 1]).port_labels == ("a",)
    assert s.restrict([0, 1], drop_zero_ports=False).n_inputs == 2


def test_partition_requires_separable(rng):
    s = random_system(rng)
    G, M1, K1, M2, K2 = s.partition()
    assert G.shape == (4, 3)
    single = PhSystem(M=np.eye(2), J=np.zeros((2, 2)), K=np.eye(2), B=np.zeros((2, 1)),
                      layout=BlockLayout(("x",), (2,)))
    with pytest.raises(ValueError):
        single.partition()


def test_eigen_methods_agree(rng):
    s = random_system(rng, n1=4, n2=4)
    red = s.eigenmodes(method="reduced")
    dense = s.eigenmodes(method="dense")
    assert_allclose(red.omega, dense.omega, rtol=1e-9)
    assert dense.real_ratio < 1e-8
    with pytest.raises(ValueError):
        s.eigenmodes(method="lanczos")


def test_undamped_plate_spectrum_is_imaginary(free_plate_4):
    res = free_plate_4.eigenmodes(n_modes=6, method="dense")
    assert res.real_ratio < 1e-8
    # free plate: three rigid-body motions
    red = free_plate_4.eigenmodes(method="reduced")
    assert red.n_zero == 3
    assert_allclose(res.omega, red.omega[:6], rtol=1e-8)


def test_damped_spectrum_decays(free_plate_4):
    res = attach_damping(free_plate_4, 0.2).eigenmodes(n_modes=4, method="dense")
    assert np.all(res.eigenvalues.real < 0)
    with pytest.raises(ValueError):
        attach_damping(free_plate_4, 0.2).eigenmodes(method="reduced")
