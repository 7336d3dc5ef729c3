from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phplate.beam import assemble_beam
from phplate.integrate import SimulationTrace, critical_time_step, implicit_midpoint, leapfrog
from phplate.material import MaterialParams
from phplate.mesh import Mesh1D, Mesh2D
from phplate.plate import (assemble_plate_force_control, attach_damping,
                           attach_distributed_load, gravity_density)

SS_ENDS = {"left": "simply_supported", "right": "simply_supported"}


@pytest.fixture(scope="module")
def ss_beam():
    return assemble_beam(Mesh1D(1.0, 4), MaterialParams.beam(1.0, 1.0), "force", SS_ENDS)


@pytest.fixture(scope="module")
def small_plate():
    bc = {"bottom": "clamped", "right": "input", "top": "simply_supported", "left": "free"}
    return assemble_plate_force_control(Mesh2D(1.0, 1.0, 3, 3), p=MaterialParams.from_rigidity(1.0, 1.0),
                                        boundary=bc)


def random_state(sys_, seed=0):
    return sys_.tilde(np.random.default_rng(seed).standard_normal(sys_.size))


def test_conservation_unforced(small_plate):
    tr = implicit_midpoint(small_plate, random_state(small_plate), dt=1e-3, n_steps=200)
    assert tr.relative_drift() < 1e-12
    assert np.abs(tr.residual).max() < 1e-10


def test_forced_step_balance(small_plate):
    u = lambda t: np.sin(7 * t) * np.ones(small_plate.n_inputs)  # noqa: E731
    tr = implicit_midpoint(small_plate, random_state(small_plate, 1), u=u, dt=2e-3, n_steps=100)
    assert np.abs(tr.residual).max() < 1e-10
    assert_allclose(np.diff(tr.H), tr.supplied_energy(), rtol=1e-9, atol=1e-12 * tr.H.max())
    assert_allclose(tr.u[0], np.sin(7e-3))


def test_damped_energy_monotone(small_plate):
    s = attach_damping(small_plate, 0.5)
    tr = implicit_midpoint(s, random_state(s, 2), dt=5e-3, n_steps=200)
    assert np.all(np.diff(tr.H) <= 0.0)
    assert tr.H[-1] < tr.H[0]
    assert_allclose(tr.H[0] - tr.H[-1], tr.dt * tr.dissipated.sum(), rtol=1e-9)


def test_load_work_accounted():
    p = MaterialParams.from_rigidity(1.0, 1.0)
    s = attach_distributed_load(
        assemble_plate_force_control(Mesh2D(1.0, 1.0, 2, 2), p=p,
                                     boundary={k: "simply_supported" for k in ("bottom", "right", "top", "left")}),
        gravity_density(p))
    tr = implicit_midpoint(s, np.zeros(s.size), dt=1e-3, n_steps=50, load_signal=lambda t: np.cos(t))
    assert np.abs(tr.residual).max() < 1e-10
    assert tr.H[-1] > 0.0
    assert_allclose(tr.load_signal[0], np.cos(5e-4))


def test_single_mode_is_second_order(ss_beam):
    res = ss_beam.eigenmodes(1)
    w, mode = res.omega[0], res.modes[:, 0]
    x0 = ss_beam.mode_state(mode)
    errs = []
    for dt in (0.01, 0.005, 0.0025):
        tr = implicit_midpoint(ss_beam, x0, dt=dt, n_steps=int(round(1.0 / dt)))
        e = ss_beam.coenergy(tr.final_state)[: mode.size]
        errs.append(np.linalg.norm(e - np.cos(w) * mode) / np.linalg.norm(mode))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert_allclose(rates, 2.0, atol=0.05)


def test_time_reversal(ss_beam):
    x0 = random_state(ss_beam, 3)
    fwd = implicit_midpoint(ss_beam, x0, dt=0.01, n_steps=50)
    back = implicit_midpoint(replace(ss_beam, J=-ss_beam.J), fwd.final_state, dt=0.01, n_steps=50)
    assert np.abs(back.final_state - x0).max() < 1e-12 * np.abs(x0).max()


def test_leapfrog_agrees_with_midpoint_for_small_steps(ss_beam):
    x0 = random_state(ss_beam, 4)
    T = 0.02
    gaps = []
    for n in (20, 40):
        a = leapfrog(ss_beam, x0, T / n, n).final_state
        b = implicit_midpoint(ss_beam, x0, dt=T / n, n_steps=n).final_state
        gaps.append(np.linalg.norm(a - b) / np.linalg.norm(x0))
    assert gaps[1] < gaps[0] / 3


def test_leapfrog_drift_bounded_over_long_runs(ss_beam):
    dt = 0.5 * critical_time_step(ss_beam)
    x0 = random_state(ss_beam, 5)
    short = leapfrog(ss_beam, x0, dt, 10_000)
    long = leapfrog(ss_beam, x0, dt, 100_000)
    assert not long.diverged
    assert long.relative_drift() < 1e-2
    # the energy error oscillates quasi-periodically; secular growth would scale it tenfold
    assert long.relative_drift() <= 1.1 * short.relative_drift()


def test_leapfrog_flags_divergence(ss_beam, caplog):
    dt = 1.1 * critical_time_step(ss_beam)
    tr = leapfrog(ss_beam, random_state(ss_beam, 6), dt, 5000)
    assert tr.diverged
    assert np.isnan(tr.H[-1])
    assert "diverged" in caplog.text


def test_leapfrog_rejects_unsupported(small_plate, ss_beam):
    with pytest.raises(ValueError):
        leapfrog(attach_damping(small_plate, 0.1), np.zeros(small_plate.size), 1e-3, 1)


@pytest.mark.parametrize("dt", [0.0, -1e-3, np.nan])
def test_non_positive_step_rejected(dt, ss_beam):
    x0 = np.zeros(ss_beam.size)
    with pytest.raises(ValueError):
        implicit_midpoint(ss_beam, x0, dt=dt, n_steps=1)
    with pytest.raises(ValueError):
        leapfrog(ss_beam, x0, dt, 1)


def test_argument_validation(ss_beam):
    with pytest.raises(ValueError):
        implicit_midpoint(ss_beam, np.zeros(3))
    with pytest.raises(ValueError):
        implicit_midpoint(ss_beam, np.zeros(ss_beam.size), n_steps=-1)
    with pytest.raises(ValueError):
        implicit_midpoint(ss_beam, np.zeros(ss_beam.size), u=np.zeros(ss_beam.n_inputs + 1))
    with pytest.raises(IndexError):
        implicit_midpoint(ss_beam, np.zeros(ss_beam.size), record=[ss_beam.size])


def test_recorded_components(ss_beam):
    x0 = random_state(ss_beam, 7)
    tr = implicit_midpoint(ss_beam, x0, dt=1e-3, n_steps=3, record=[0, 4])
    assert tr.states.shape == (4, 2)
    assert_allclose(tr.states[0], x0[[0, 4]])
    assert tr.n_steps == 3 and tr.dt == pytest.approx(1e-3)


def test_trace_validation():
    with pytest.raises(ValueError):
        SimulationTrace(t=np.arange(3.0), H=np.zeros(2), states=np.zeros((3, 1)), recorded=np.arange(1),
                        y=np.zeros((2, 0)), u=np.zeros((2, 0)), residual=np.zeros(2),
                        dissipated=np.zeros(2), load_signal=np.zeros(2))
