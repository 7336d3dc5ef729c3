"""Acceptance criteria 1-10, one test per criterion.

Each test prints a ``PASS criterion N`` or ``FAIL criterion N`` line (also
under output capture) before asserting.  Run only this file with::

    pytest tests/test_acceptance.py -v
"""

import itertools
import sys

import numpy as np
import pytest

from phplate.beam import (assemble_beam, beam_pairing, beam_structure_element, cantilever_frequency,
                          cantilever_root, hermite_interpolate)
from phplate.integrate import implicit_midpoint
from phplate.material import MaterialParams
from phplate.mesh import SIDES, Mesh1D, Mesh2D
from phplate.plate import (assemble_plate_force_control, assemble_plate_kinematic_control,
                           attach_damping, attach_distributed_load, bending_stiffness,
                           gravity_density, static_deflection)
from phplate.scenario import gradient_error, power_balance_error
from phplate.verify import (PlateEffort, Poly2, TestFieldSpec, adjointness_terms, check_adjointness,
                            check_plate_pairing)

CONDS = ("clamped", "simply_supported", "free", "input")
SS = {s: "simply_supported" for s in SIDES}
UNIT = MaterialParams.from_rigidity(1.0, 1.0)


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def random_alpha_state(sys_, rng):
    return sys_.tilde(rng.standard_normal(sys_.size))


def test_criterion_01_skew_symmetry(report):
    worst, count = 0.0, 0
    mesh = Mesh2D(1.0, 1.0, 2, 2)
    systems = []
    for combo in itertools.product(CONDS, repeat=4):
        systems.append(assemble_plate_force_control(mesh, p=UNIT, boundary=dict(zip(SIDES, combo))))
    for combo in itertools.product(("clamped", "input"), repeat=4):
        systems.append(assemble_plate_kinematic_control(mesh, p=UNIT, boundary=dict(zip(SIDES, combo))))
    systems.append(assemble_plate_force_control(Mesh2D(1.0, 2.0, 3, 2), p=UNIT, boundary=SS, curvature="q2"))
    for variant, (left, right) in itertools.product(("force", "kinematic"), itertools.product(CONDS, repeat=2)):
        systems.append(assemble_beam(Mesh1D(1.0, 4), MaterialParams.beam(1.0, 1.0), variant,
                                     {"left": left, "right": right}))
    systems += [attach_damping(s, 0.3) for s in systems[:5]]
    for s in systems:
        skew = abs(s.J + s.J.T)
        worst = max(worst, float(skew.max()) if skew.nnz else 0.0)
        count += 1
    report(1, worst == 0.0, f"max |J + J^T| = {worst:.1e} over {count} assembled systems")


def test_criterion_02_algebraic_power_balance(report):
    rng = np.random.default_rng(2)
    bc = {"bottom": "clamped", "right": "input", "top": "free", "left": "simply_supported"}
    s = attach_damping(assemble_plate_force_control(Mesh2D(1.0, 1.0, 8, 8), p=UNIT, boundary=bc), 0.2)
    errs = [power_balance_error(s, random_alpha_state(s, rng), rng.standard_normal(s.n_inputs))
            for _ in range(100)]
    worst = max(errs)
    report(2, worst <= 1e-10, f"max relative power-balance gap {worst:.2e} over 100 pairs (8x8, r=0.2)")


def test_criterion_03_conservation_in_time(report):
    rng = np.random.default_rng(3)
    s = assemble_plate_force_control(Mesh2D(1.0, 1.0, 8, 8), p=UNIT, boundary=SS)
    x0 = random_alpha_state(s, rng)
    tr = implicit_midpoint(s, x0, dt=1e-3, n_steps=1000)
    drift = tr.relative_drift()
    damped = implicit_midpoint(attach_damping(s, 0.5), x0, dt=1e-3, n_steps=1000)
    rise = float(np.max(np.diff(damped.H)))
    ok = drift <= 1e-12 and rise <= 0.0
    report(3, ok, f"undamped drift {drift:.2e} over 1000 steps; damped max step increase {rise:.2e}")


def test_criterion_04_discrete_step_balance(report):
    bc = {"bottom": "simply_supported", "right": "input", "top": "simply_supported", "left": "clamped"}
    s = assemble_plate_force_control(Mesh2D(1.0, 1.0, 8, 8), p=UNIT, boundary=bc)
    pattern = s.uniform_input("right", "moment", 1.0)
    tr = implicit_midpoint(s, np.zeros(s.size), u=lambda t: np.sin(15.0 * t) * pattern,
                           dt=2e-3, n_steps=500)
    worst = float(np.abs(tr.residual).max())
    pumped = tr.H.max() > 0
    report(4, worst <= 1e-10 and pumped,
           f"max relative step residual {worst:.2e} under sinusoidal M_nn on the right edge")


def test_criterion_05_plate_eigenfrequency(report):
    ref = 2 * np.pi**2
    errs = {}
    for n in (4, 8, 16):
        s = assemble_plate_force_control(Mesh2D(1.0, 1.0, n, n), p=UNIT, boundary=SS)
        errs[n] = abs(s.eigenmodes(1).omega[0] - ref) / ref
    order = float(np.log2(errs[8] / errs[16]))
    ok = errs[8] < 1e-2 and errs[16] < 1e-3 and order >= 3.0
    report(5, ok, f"rel. errors 8x8 {errs[8]:.2e}, 16x16 {errs[16]:.2e}, observed order {order:.2f}")


def test_criterion_06_cantilever(report):
    root = cantilever_root(1, tol=1e-13)
    # reference root of cosh(x) cos(x) = -1
    root_err = abs(root - 1.8751040687119611)
    p = MaterialParams.beam(3.0, 0.7)
    L = 1.2
    s = assemble_beam(Mesh1D(L, 16), p, "force", {"left": "clamped", "right": "free"})
    w = s.eigenmodes(1).omega[0]
    rel = abs(w - cantilever_frequency(p, L, 1)) / cantilever_frequency(p, L, 1)
    ok = root_err <= 1e-12 and rel < 1e-3
    report(6, ok, f"root error {root_err:.1e}, first frequency rel. error {rel:.2e} (16 elements)")


def test_criterion_07_adjointness(report):
    rng = np.random.default_rng(7)
    worst = max(check_adjointness(TestFieldSpec.random(rng)) for _ in range(20))
    box = (0.2, 0.8, 0.1, 0.9)
    bump = Poly2.bump(box)
    spec = TestFieldSpec(Poly2.random(rng, 3, bump.center) * bump,
                         tuple(Poly2.constant(v) for v in (1.5, -0.7, 0.4)), box)
    lhs, rhs, scale = adjointness_terms(spec)
    const_ok = lhs == 0.0 and abs(rhs) <= 1e-14 * scale
    report(7, worst < 1e-8 and const_ok,
           f"max residual {worst:.2e} over 20 pairs; constant tensor lhs={lhs:.1e}, rhs={rhs:.1e}")


def test_criterion_08_pairing_residuals(report):
    m = Mesh1D(1.0, 16)
    a = beam_structure_element(m, hermite_interpolate(m, np.sin, np.cos),
                               hermite_interpolate(m, np.exp, np.exp))
    b = beam_structure_element(m, hermite_interpolate(m, np.cos, lambda x: -np.sin(x)),
                               hermite_interpolate(m, lambda x: x**4, lambda x: 4 * x**3))
    beam_res = [abs(beam_pairing(a, b, q)) for q in (1, 2, 3, 4)]

    rng = np.random.default_rng(8)
    ea, eb = PlateEffort.random(rng, 6), PlateEffort.random(rng, 6)
    plate_res = [check_plate_pairing(ea, eb, (1.0, 1.5), q).residual for q in (2, 3, 4, 5, 6, 8, 12)]

    def plateaus(res, k):
        return all(x > y for x, y in zip(res[:k], res[1:k + 1])) and max(res[k:]) < 1e-12

    ok = beam_res[-1] < 1e-6 and plate_res[-1] < 1e-6 and plateaus(beam_res, 1) and plateaus(plate_res, 4)
    report(8, ok, "beam " + " ".join(f"{r:.1e}" for r in beam_res)
           + "; plate " + " ".join(f"{r:.1e}" for r in plate_res))


def test_criterion_09_gradient(report):
    rng = np.random.default_rng(9)
    s = attach_damping(assemble_plate_force_control(Mesh2D(1.0, 1.0, 8, 8), p=UNIT, boundary=SS), 0.1)
    worst = max(gradient_error(s, random_alpha_state(s, rng), rng.standard_normal(s.size)) for _ in range(50))
    report(9, worst <= 1e-6, f"max relative directional-derivative error {worst:.2e} over 50 samples")


def test_criterion_10_static_deflection(report):
    p = MaterialParams(young_modulus=70e9, poisson=0.3, thickness=0.01, surface_density=27.0)
    worst = 0.0
    for bc in (SS, {s: "clamped" for s in SIDES}, {"bottom": "clamped", "top": "simply_supported"}):
        s = attach_distributed_load(assemble_plate_force_control(Mesh2D(1.0, 0.8, 8, 8), p=p, boundary=bc),
                                    gravity_density(p))
        w = static_deflection(s)
        idx = s.velocity_dofs()
        Kb = bending_stiffness(s.basis.velocity, p).toarray()[np.ix_(idx, idx)]
        w_ref = np.linalg.solve(Kb, s.load[: s.n_velocity])
        worst = max(worst, float(np.linalg.norm(w - w_ref) / np.linalg.norm(w_ref)))
    report(10, worst <= 1e-8, f"max relative gap to bending-stiffness solve {worst:.2e} over 3 support sets")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
