"""Build models from a :class:`~phplate.config.ScenarioConfig` and run analyses.

Each ``run_*`` function writes its artifacts into an output directory and
returns a report dictionary whose ``checks`` entry lists invariant checks as
``{name: {"value": ..., "threshold": ..., "passed": ...}}``.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from . import beam as beam1d
from . import plate as plate2d
from . import verify
from .config import ScenarioConfig
from .export import write_eigen_report, write_grid_snapshot, write_json_report, write_trace_csv
from .integrate import implicit_midpoint, leapfrog
from .material import MaterialParams
from .mesh import Mesh1D, Mesh2D
from .phsys import PhSystem

logger = logging.getLogger(__name__)

SKEW_TOL = 0.0
POWER_TOL = 1e-10
DRIFT_TOL = 1e-12
STEP_TOL = 1e-10
ADJOINT_TOL = 1e-8
PAIRING_TOL = 1e-6
GRADIENT_TOL = 1e-6
BPARTIAL_TOL = 1e-12


def _check(value: float, threshold: float, passed: Optional[bool] = None) -> dict:
    value = float(value)
    if passed is None:
        passed = bool(value <= threshold)
    return {"value": value, "threshold": float(threshold), "passed": bool(passed)}


# ---------------------------------------------------------------------------
# model construction
# ---------------------------------------------------------------------------

def build_system(cfg: ScenarioConfig) -> PhSystem:
    if cfg.model == "plate":
        mesh = Mesh2D(cfg.geometry[0], cfg.geometry[1], *cfg.mesh)
        if cfg.variant == "force":
            sys_ = plate2d.assemble_plate_force_control(mesh, p=cfg.params, boundary=cfg.boundary,
                                                        curvature=cfg.curvature)
        else:
            sys_ = plate2d.assemble_plate_kinematic_control(mesh, p=cfg.params, boundary=cfg.boundary)
        density = cfg.load_density
        if cfg.gravity:
            density += plate2d.gravity_density(cfg.params, cfg.gravity)
        if density:
            sys_ = plate2d.attach_distributed_load(sys_, density)
    else:
        mesh = Mesh1D(cfg.geometry[0], cfg.mesh[0])
        sys_ = beam1d.assemble_beam(mesh, cfg.params, cfg.variant, cfg.boundary)
    return plate2d.attach_damping(sys_)


def input_vector(sys_: PhSystem, cfg: ScenarioConfig) -> Optional[np.ndarray]:
    """Unit input pattern of the configured boundary signal."""
    if cfg.input is None:
        return None
    side, port = cfg.input.side, cfg.input.port
    if cfg.model == "plate":
        return sys_.uniform_input(side, port, 1.0)
    label = f"{side}:{port}"
    if label not in sys_.port_labels:
        raise ValueError(f"no port {label!r}; available: {', '.join(sys_.port_labels)}")
    u = np.zeros(sys_.n_inputs)
    u[sys_.port_labels.index(label)] = 1.0
    return u


def oracle_frequencies(cfg: ScenarioConfig, n: int) -> Optional[np.ndarray]:
    """Closed-form angular frequencies when the configuration has them."""
    bc = cfg.boundary
    if cfg.params.damping > 0:
        return None
    if cfg.model == "plate":
        if all(bc.get(s) == "simply_supported" for s in ("bottom", "right", "top", "left")):
            return plate2d.simply_supported_frequencies(cfg.params, cfg.geometry[0], cfg.geometry[1], n)
        return None
    ends = sorted(bc.get(e, "free") for e in ("left", "right"))
    p, L = cfg.params, cfg.geometry[0]
    if ends == ["clamped", "free"]:
        return np.array([beam1d.cantilever_frequency(p, L, k) for k in range(1, n + 1)])
    if ends == ["simply_supported", "simply_supported"]:
        k = np.arange(1, n + 1)
        return (k * np.pi / L) ** 2 * np.sqrt(p.flexural_rigidity / p.linear_density)
    return None


def structural_checks(sys_: PhSystem, rng: np.random.Generator, n_samples: int = 5) -> dict:
    """Skew symmetry, algebraic power balance and the energy gradient."""
    skew = abs(sys_.J + sys_.J.T)
    skew_max = float(skew.max()) if skew.nnz else 0.0
    worst_power = 0.0
    worst_grad = 0.0
    for _ in range(n_samples):
        x = sys_.M @ rng.standard_normal(sys_.size)
        u = rng.standard_normal(sys_.n_inputs)
        worst_power = max(worst_power, power_balance_error(sys_, x, u))
        worst_grad = max(worst_grad, gradient_error(sys_, x, rng.standard_normal(sys_.size)))
    return {
        "skew_symmetry": _check(skew_max, SKEW_TOL),
        "power_balance": _check(worst_power, POWER_TOL),
        "energy_gradient": _check(worst_grad, GRADIENT_TOL),
    }


def power_balance_error(sys_: PhSystem, x, u, load_scale: float = 1.0) -> float:
    """``|xdot . e - y . u - y_d s + e^T R e|`` relative to the summed magnitudes.

    The scale is ``sum |xdot_i e_i|`` (or a larger supplied term), the size of
    the products that cancel, so a port-free system is not judged on round-off alone.
    """
    e = sys_.coenergy(x)
    xdot, y = sys_.dynamics(x, u, load_scale)
    terms = np.array([xdot @ e, y @ u, load_scale * sys_.load_output(e), sys_.dissipation(e)])
    gap = terms[0] - terms[1] - terms[2] + terms[3]
    scale = max(float(np.abs(xdot * e).sum()), np.abs(terms).max(), np.finfo(float).tiny)
    return float(abs(gap) / scale)


def gradient_error(sys_: PhSystem, x, d, h: Optional[float] = None) -> float:
    """Central finite difference of ``H`` along ``d`` against ``e . d``."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if h is None:
        h = 1e-4 * max(np.linalg.norm(x), 1.0) / max(np.linalg.norm(d), np.finfo(float).tiny)
    fd = (sys_.hamiltonian(x + h * d) - sys_.hamiltonian(x - h * d)) / (2 * h)
    exact = float(sys_.coenergy(x) @ d)
    return abs(fd - exact) / max(abs(exact), abs(fd), np.finfo(float).tiny)


# ---------------------------------------------------------------------------
# analyses
# ---------------------------------------------------------------------------

def run_eigen(cfg: ScenarioConfig, out_dir, sys_: Optional[PhSystem] = None) -> dict:
    sys_ = sys_ or build_system(cfg)
    rng = np.random.default_rng(cfg.seed)
    res = sys_.eigenmodes(cfg.n_modes, method=cfg.eigen_method)
    oracle = oracle_frequencies(cfg, len(res.omega))
    out = Path(out_dir)
    title = f"{cfg.model} {cfg.variant} eigenfrequencies, method={res.method}"
    write_eigen_report(out / f"{cfg.prefix}_eigen.txt", res.omega, oracle, title)
    report = {
        "analysis": "eigen",
        "method": res.method,
        "omega [rad/s]": res.omega,
        "n_zero_modes": res.n_zero,
        "real_part_ratio": res.real_ratio,
        "checks": structural_checks(sys_, rng),
    }
    if oracle is not None:
        rel = np.abs(res.omega - oracle[: len(res.omega)]) / oracle[: len(res.omega)]
        report["omega_ref [rad/s]"] = oracle
        report["relative_error"] = rel
    return report


def _initial_state(sys_: PhSystem, cfg: ScenarioConfig) -> np.ndarray:
    if cfg.initial == "zero":
        return np.zeros(sys_.size)
    if cfg.initial == "mode":
        res = sys_.eigenmodes(cfg.initial_mode, method="reduced" if sys_.separable and not sys_.damped else "auto")
        if len(res.omega) < cfg.initial_mode:
            raise ValueError(f"system has fewer than {cfg.initial_mode} non-zero modes")
        if res.method == "reduced":
            x = sys_.mode_state(res.modes[:, cfg.initial_mode - 1])
        else:
            x = np.real(res.modes[:, cfg.initial_mode - 1])
    else:
        x = sys_.M @ np.random.default_rng(cfg.seed).standard_normal(sys_.size)
    H = sys_.hamiltonian(x)
    return x * np.sqrt(cfg.initial_amplitude / H) if H > 0 else x


def _grid(cfg: ScenarioConfig):
    nx, ny = cfg.snapshot_shape
    if cfg.model == "plate":
        return np.linspace(0, cfg.geometry[0], nx), np.linspace(0, cfg.geometry[1], ny)
    return np.linspace(0, cfg.geometry[0], nx), np.zeros(1)


def snapshot(sys_: PhSystem, cfg: ScenarioConfig, x, path, time: Optional[float] = None):
    xs, ys = _grid(cfg)
    if cfg.model == "plate":
        X, Y = np.meshgrid(xs, ys)
        f = sys_.fields_at(x, np.column_stack([X.ravel(), Y.ravel()]))
        fields = {k: f[k].reshape(ys.size, xs.size) for k in ("v", "Mxx", "Myy", "Mxy")}
    else:
        f = sys_.fields_at(x, xs)
        fields = {k: f[k].reshape(1, xs.size) for k in ("v", "M")}
    return write_grid_snapshot(path, xs, ys, fields, time)


def run_simulation(cfg: ScenarioConfig, out_dir, sys_: Optional[PhSystem] = None) -> dict:
    sys_ = sys_ or build_system(cfg)
    out = Path(out_dir)
    x0 = _initial_state(sys_, cfg)
    u_pat = input_vector(sys_, cfg)
    u = None if u_pat is None else (lambda t: cfg.input.value(t) * u_pat)
    record = cfg.record or None
    if record is not None and max(record) >= sys_.size:
        raise ValueError(f"recorded dof {max(record)} exceeds the state size {sys_.size}")
    rec = list(record) if record is not None else []
    if cfg.integrator == "leapfrog":
        if u is not None or sys_.load is not None:
            raise ValueError("leapfrog integrates unforced systems only")
        trace = leapfrog(sys_, x0, cfg.dt, cfg.n_steps, record=rec)
    else:
        trace = implicit_midpoint(sys_, x0, u, cfg.dt, cfg.n_steps, record=rec)
    write_trace_csv(out / f"{cfg.prefix}_trace.csv", trace, include_ports=cfg.write_ports)
    snapshot(sys_, cfg, x0, out / f"{cfg.prefix}_field_initial.txt", float(trace.t[0]))
    snapshot(sys_, cfg, trace.final_state, out / f"{cfg.prefix}_field_final.txt", float(trace.t[-1]))

    rng = np.random.default_rng(cfg.seed)
    checks = structural_checks(sys_, rng)
    H = trace.H[np.isfinite(trace.H)]
    unforced = u is None and sys_.load is None
    if trace.method == "implicit_midpoint":
        checks["step_balance"] = _check(np.max(np.abs(trace.residual), initial=0.0), STEP_TOL)
        if unforced and not sys_.damped:
            checks["energy_drift"] = _check(trace.relative_drift(), DRIFT_TOL)
        if unforced and sys_.damped:
            inc = float(np.max(np.diff(H), initial=0.0))
            checks["energy_nonincreasing"] = _check(inc, 0.0)
    else:
        checks["no_divergence"] = _check(float(trace.diverged), 0.0)
    return {
        "analysis": "simulate",
        "integrator": trace.method,
        "dt [s]": cfg.dt,
        "n_steps": cfg.n_steps,
        "H_initial [J]": float(trace.H[0]),
        "H_final [J]": float(H[-1]),
        "max_relative_drift": trace.relative_drift(),
        "diverged": trace.diverged,
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------

def verification_suite(seed: int = 0, n_random: int = 20) -> dict:
    """Residuals of the structural identities on analytic and assembled data."""
    rng = np.random.default_rng(seed)
    checks: dict = {}

    adj = [verify.check_adjointness(verify.TestFieldSpec.random(rng)) for _ in range(n_random)]
    checks["adjointness_random"] = _check(max(adj), ADJOINT_TOL)
    box = (0.2, 0.8, 0.1, 0.9)
    bump = verify.Poly2.bump(box)
    const = verify.TestFieldSpec(verify.Poly2.random(rng, 2, bump.center) * bump,
                                 tuple(verify.Poly2.constant(v) for v in rng.uniform(-1, 1, 3)), box)
    lhs, rhs, _ = verify.adjointness_terms(const)
    checks["adjointness_constant_tensor"] = _check(max(abs(lhs), abs(rhs)), ADJOINT_TOL)

    pair = [verify.check_plate_pairing(verify.PlateEffort.random(rng), verify.PlateEffort.random(rng),
                                       (1.0, 1.0)).residual for _ in range(n_random)]
    checks["plate_pairing"] = _check(max(pair), PAIRING_TOL)

    beam_mesh = Mesh1D(1.0, 8)
    n = 2 * beam_mesh.n_nodes
    bp = []
    for _ in range(n_random):
        a = beam1d.beam_structure_element(beam_mesh, rng.standard_normal(n), rng.standard_normal(n))
        b = beam1d.beam_structure_element(beam_mesh, rng.standard_normal(n), rng.standard_normal(n))
        bp.append(abs(beam1d.beam_pairing(a, b)))
    checks["beam_pairing"] = _check(max(bp), PAIRING_TOL)

    gaps = []
    for side, pt in (("bottom", (0.3, 0.0)), ("right", (1.0, 0.6)), ("top", (0.7, 1.0)), ("left", (0.0, 0.2))):
        e = verify.PlateEffort.random(rng)
        try:
            verify.check_bpartial(e, pt, tol=BPARTIAL_TOL)
            gaps.append(0.0)
        except AssertionError:
            gaps.append(1.0)
    checks["bpartial_consistency"] = _check(max(gaps), 0.0)

    p = MaterialParams.from_rigidity(1.0, 1.0)
    mesh = Mesh2D(1.0, 1.0, 8, 8)
    systems = {
        "plate_force_ss": plate2d.assemble_plate_force_control(
            mesh, p=p, boundary={s: "simply_supported" for s in ("bottom", "right", "top", "left")}),
        "plate_force_mixed": plate2d.assemble_plate_force_control(
            mesh, p=p, boundary={"bottom": "clamped", "right": "input", "top": "free", "left": "simply_supported"}),
        "plate_kinematic": plate2d.assemble_plate_kinematic_control(
            Mesh2D(1.0, 1.0, 4, 4), p=p, boundary={"right": "input"}),
        "beam_force": beam1d.assemble_beam(beam_mesh, MaterialParams.beam(1.0, 1.0), "force",
                                           {"left": "clamped", "right": "free"}),
        "beam_kinematic": beam1d.assemble_beam(beam_mesh, MaterialParams.beam(1.0, 1.0), "kinematic",
                                               {"left": "clamped", "right": "free"}),
    }
    for name, s in systems.items():
        for key, val in structural_checks(plate2d.attach_damping(s, 0.1), rng).items():
            checks[f"{name}:{key}"] = val
    return {"analysis": "verify", "seed": seed, "checks": checks}


def all_passed(report: dict) -> bool:
    return all(c["passed"] for c in report.get("checks", {}).values())


def run(cfg: ScenarioConfig, out_dir, analysis: Optional[str] = None) -> dict:
    """Run the configured analysis, write artifacts and the JSON report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kind = analysis or cfg.analysis
    if cfg.source:
        (out / f"{cfg.prefix}.ini").write_text(cfg.source)
    if kind == "eigen":
        report = run_eigen(cfg, out)
    elif kind == "simulate":
        report = run_simulation(cfg, out)
    else:
        report = verification_suite(cfg.seed)
    report["passed"] = all_passed(report)
    write_json_report(out / f"{cfg.prefix}_report.json", report)
    return report
