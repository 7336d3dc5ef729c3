"""Partitioned finite element assembly of the Kirchhoff plate.

Two causalities are supported.

*Force control*: the momentum equation is integrated by parts twice, the
boundary inputs are the effective shear ``Q~_n`` and the flexural momentum
``M_nn``, and the collocated outputs are the (weak) traces of the velocity
and of its normal derivative.

*Kinematic control*: the three curvature equations are integrated by parts
twice instead, the inputs are the velocity trace and its normal
derivative, and the outputs are the weak ``Q~_n`` and ``M_nn``.

State blocks are ``velocity, kappa_xx, kappa_yy, kappa_xy`` in mass-scaled
coordinates.  Each side of the rectangle is a separate regular arc; the
kinematic input map keeps the arc-end terms ``[M_ns v]`` so that the weak
form is exact on a rectangle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import BasisSet, SideTraceSpace, TensorSpace
from .material import MaterialParams, bending_matrix, bending_rigidity
from .mesh import SIDES, Mesh2D, side_normal
from .phsys import BlockLayout, PhSystem
from .shapes import gauss_unit, hermite_cubic

BLOCKS = ("velocity", "kappa_xx", "kappa_yy", "kappa_xy")
CONDITIONS = ("clamped", "simply_supported", "free", "input")
QUAD_ORDER = 4


# ---------------------------------------------------------------------------
# element-level building blocks
# ---------------------------------------------------------------------------

def _quad2d(n: int = QUAD_ORDER):
    g, w = gauss_unit(n)
    XI, ETA = np.meshgrid(g, g, indexing="ij")
    W = np.outer(w, w)
    return XI.ravel(), ETA.ravel(), W.ravel()


def _scatter(rows: TensorSpace, cols: TensorSpace, local: np.ndarray) -> sp.csr_matrix:
    """Assemble identical element matrices ``local`` over the mesh."""
    cr, cc = rows.connectivity, cols.connectivity
    n_el = cr.shape[0]
    R = np.broadcast_to(cr[:, :, None], (n_el, cr.shape[1], cc.shape[1]))
    C = np.broadcast_to(cc[:, None, :], (n_el, cr.shape[1], cc.shape[1]))
    data = np.broadcast_to(local[None], R.shape)
    A = sp.coo_matrix((data.ravel(), (R.ravel(), C.ravel())), shape=(rows.n_dofs, cols.n_dofs))
    return A.tocsr()


def _element_integral(rows: TensorSpace, cols: TensorSpace, drow=(0, 0), dcol=(0, 0)) -> np.ndarray:
    xi, eta, w = _quad2d()
    m = rows.mesh
    Tr = rows.tabulate(xi, eta, *drow)
    Tc = cols.tabulate(xi, eta, *dcol)
    return (Tr * (w * m.hx * m.hy)[:, None]).T @ Tc


def mass_matrix(space: TensorSpace) -> sp.csr_matrix:
    """``int phi phi^T`` (symmetrized so it is exactly symmetric in floating point)."""
    A = _scatter(space, space, _element_integral(space, space))
    return sp.csr_matrix(0.5 * (A + A.T))


def coupling_matrix(rows: TensorSpace, cols: TensorSpace, drow=(0, 0), dcol=(0, 0)) -> sp.csr_matrix:
    """``int d^drow(phi_rows) d^dcol(phi_cols)^T`` with multi-index derivatives ``(dx, dy)``."""
    return _scatter(rows, cols, _element_integral(rows, cols, drow, dcol))


def load_vector(space: TensorSpace, density: Union[float, Callable]) -> np.ndarray:
    """``int phi f`` for a constant or a callable ``f(x, y)``."""
    m = space.mesh
    xi, eta, w = _quad2d()
    T = space.tabulate(xi, eta)
    org = m.element_origins()
    X = org[:, 0:1] + xi[None, :] * m.hx
    Y = org[:, 1:2] + eta[None, :] * m.hy
    F = np.broadcast_to(density(X, Y) if callable(density) else np.asarray(density, float), X.shape)
    local = (F * w[None, :] * m.hx * m.hy) @ T
    out = np.zeros(space.n_dofs)
    np.add.at(out, space.connectivity, local)
    return out


def _segment_points(side: str, t: np.ndarray):
    """Element-local coordinates of points at parameter ``t`` along a side edge."""
    if side == "bottom":
        return t, np.zeros_like(t)
    if side == "right":
        return np.ones_like(t), t
    if side == "top":
        return 1.0 - t, np.ones_like(t)
    if side == "left":
        return np.zeros_like(t), 1.0 - t
    side_normal(side)
    raise AssertionError


def _directional(space: TensorSpace, xi, eta, vec) -> np.ndarray:
    return vec[0] * space.tabulate(xi, eta, 1, 0) + vec[1] * space.tabulate(xi, eta, 0, 1)


def boundary_matrices(space: TensorSpace, trace: SideTraceSpace):
    """``B_1 = oint phi psi^T ds`` and ``B_2 = oint (d phi/dn) psi^T ds``."""
    m = space.mesh
    t, w = gauss_unit(QUAD_ORDER)
    B1 = np.zeros((space.n_dofs, trace.n_dofs))
    B2 = np.zeros_like(B1)
    for side in trace.sides:
        n = side_normal(side)
        h = trace.segment_length(side)
        psi = hermite_cubic(t, h) * (w * h)[:, None]
        xi, eta = _segment_points(side, t)
        val = space.tabulate(xi, eta)
        dn = _directional(space, xi, eta, n)
        for k, el in enumerate(m.side_elements(side)):
            rows = space.connectivity[el]
            cols = trace.segment_dofs(side, k)
            B1[np.ix_(rows, cols)] += val.T @ psi
            B2[np.ix_(rows, cols)] += dn.T @ psi
    return sp.csr_matrix(B1), sp.csr_matrix(B2)


def kinematic_boundary_matrices(space: TensorSpace, trace: SideTraceSpace):
    """Input maps of the kinematic causality, one row block per moment field.

    ``B_1`` pairs ``v_Q~n = -Div(V).n - d(s^T V n)/ds`` (plus the arc-end terms
    ``[s^T V n]``) with the velocity trace, ``B_2`` pairs ``v_Mnn = n^T V n``
    with the normal derivative trace.
    """
    m = space.mesh
    N = space.n_dofs
    t, w = gauss_unit(QUAD_ORDER)
    B1 = np.zeros((3 * N, trace.n_dofs))
    B2 = np.zeros_like(B1)
    for side in trace.sides:
        nx, ny = side_normal(side)
        sx, sy = -ny, nx
        h = trace.segment_length(side)
        psi = hermite_cubic(t, h) * (w * h)[:, None]
        xi, eta = _segment_points(side, t)
        T = space.tabulate(xi, eta)
        Tx = space.tabulate(xi, eta, 1, 0)
        Ty = space.tabulate(xi, eta, 0, 1)
        Ts = sx * Tx + sy * Ty
        # coefficients of (V_xx, V_yy, V_xy) in each boundary functional
        mnn = (nx * nx, ny * ny, 2 * nx * ny)
        mns = (-nx * ny, nx * ny, nx * nx - ny * ny)
        div_n = ((nx * Tx), (ny * Ty), (ny * Tx + nx * Ty))
        q_tab = [-div_n[f] - mns[f] * Ts for f in range(3)]
        elements = m.side_elements(side)
        for k, el in enumerate(elements):
            cols = trace.segment_dofs(side, k)
            for f in range(3):
                rows = f * N + space.connectivity[el]
                B1[np.ix_(rows, cols)] += q_tab[f].T @ psi
                B2[np.ix_(rows, cols)] += (mnn[f] * T).T @ psi
        # arc-end terms [M_ns v] at the end and start of the side
        for k, tt, sign in ((len(elements) - 1, 1.0, 1.0), (0, 0.0, -1.0)):
            el = elements[k]
            xe, ee = _segment_points(side, np.array([tt]))
            Te = space.tabulate(xe, ee)[0]
            psi_e = hermite_cubic(np.array([tt]), h)[0]
            cols = trace.segment_dofs(side, k)
            for f in range(3):
                rows = f * N + space.connectivity[el]
                B1[np.ix_(rows, cols)] += sign * mns[f] * np.outer(Te, psi_e)
    return sp.csr_matrix(B1), sp.csr_matrix(B2)


def trace_operators(space: TensorSpace, trace: SideTraceSpace):
    """Maps from ``bfs`` coefficients to the side-trace coefficients of the
    value and of the normal derivative."""
    if space.kind != "bfs":
        raise ValueError("trace operators are defined for the bfs space")
    m = space.mesh
    T1 = sp.lil_matrix((trace.n_dofs, space.n_dofs))
    T2 = sp.lil_matrix((trace.n_dofs, space.n_dofs))
    for side in trace.sides:
        nx, ny = side_normal(side)
        sx, sy = -ny, nx
        off = trace.offsets[side]
        for k, (i, j) in enumerate(m.side_node_grid(side)):
            d = 4 * int(m.node_index(i, j))
            T1[off + 2 * k, d] = 1.0
            T1[off + 2 * k + 1, d + 1] = sx
            T1[off + 2 * k + 1, d + 2] = sy
            T2[off + 2 * k, d + 1] = nx
            T2[off + 2 * k, d + 2] = ny
            T2[off + 2 * k + 1, d + 3] = nx * sy + ny * sx
    return T1.tocsr(), T2.tocsr()


def boundary_mass(trace: SideTraceSpace) -> sp.csr_matrix:
    t, w = gauss_unit(QUAD_ORDER)
    M = sp.lil_matrix((trace.n_dofs, trace.n_dofs))
    for side in trace.sides:
        h = trace.segment_length(side)
        psi = hermite_cubic(t, h)
        local = (psi * (w * h)[:, None]).T @ psi
        for k in range(len(trace.mesh.side_node_grid(side)) - 1):
            d = trace.segment_dofs(side, k)
            M[np.ix_(d, d)] = M[np.ix_(d, d)].toarray() + local
    return M.tocsr()


# ---------------------------------------------------------------------------
# assembled systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False, kw_only=True)
class PlatePhSystem(PhSystem):
    mesh: Mesh2D
    basis: BasisSet
    params: MaterialParams
    variant: str
    boundary: Mapping[str, str]
    trace: SideTraceSpace
    blocks: Mapping[str, sp.spmatrix] = field(default_factory=dict, repr=False)

    @property
    def n_velocity(self) -> int:
        return self.layout.sizes[0]

    def velocity_dofs(self) -> np.ndarray:
        """Indices of the retained velocity dofs in the unreduced numbering."""
        return self.state_index[: self.n_velocity]

    def port_index(self, side: str, kind: str) -> np.ndarray:
        prefix = f"{side}:{kind}:"
        return np.array([i for i, lab in enumerate(self.port_labels) if lab.startswith(prefix)],
                        dtype=int)

    def uniform_input(self, side: str, kind: str, value: float = 1.0) -> np.ndarray:
        """Input vector prescribing ``value`` uniformly along one side for one port kind."""
        idx = self.port_index(side, kind)
        if idx.size == 0:
            raise ValueError(f"no {kind!r} port on side {side!r} (ports: {sorted(set(l.rsplit(':', 1)[0] for l in self.port_labels))})")
        u = np.zeros(self.n_inputs)
        for i in idx:
            if self.port_labels[i].rsplit(":", 1)[1].startswith("v"):
                u[i] = value
        return u

    def fields_at(self, x, points) -> dict[str, np.ndarray]:
        """Co-energy fields ``v, Mxx, Myy, Mxy`` of state ``x`` at physical points."""
        e = self.expand(self.coenergy(x))
        full = self.basis.velocity.n_dofs
        Nq = self.basis.curvature.n_dofs
        X, Y = np.asarray(points, dtype=float).T
        out = {"v": self.basis.velocity.evaluate(e[:full], X, Y)}
        for k, name in enumerate(("Mxx", "Myy", "Mxy")):
            c = e[full + k * Nq: full + (k + 1) * Nq]
            out[name] = self.basis.curvature.evaluate(c, X, Y)
        return out


def _check_boundary(boundary: Optional[Mapping[str, str]]) -> dict[str, str]:
    bc = {side: "free" for side in SIDES}
    for side, cond in (boundary or {}).items():
        side_normal(side)
        if cond not in CONDITIONS:
            raise ValueError(f"unknown boundary condition {cond!r} on {side}; expected one of {CONDITIONS}")
        bc[side] = cond
    return bc


def _port_labels(trace: SideTraceSpace, kinds: tuple[str, str]) -> list[str]:
    labels = []
    for kind in kinds:
        for side in trace.sides:
            n_nodes = len(trace.mesh.side_node_grid(side))
            for k in range(n_nodes):
                labels += [f"{side}:{kind}:v{k}", f"{side}:{kind}:s{k}"]
    return labels


def _energy_gram(basis: BasisSet, p: MaterialParams, M1, Mq):
    K_kappa = sp.kron(bending_matrix(p), Mq)
    return sp.block_diag([M1 / p.surface_density, K_kappa], format="csr")


def assemble_plate_force_control(mesh: Mesh2D, basis: Optional[BasisSet] = None,
                                 p: Optional[MaterialParams] = None,
                                 boundary: Optional[Mapping[str, str]] = None,
                                 curvature: str = "dq3") -> PlatePhSystem:
    """Force/momentum boundary control: inputs ``(Q~_n, M_nn)`` on every side.

    ``boundary`` maps side tags to ``clamped``, ``simply_supported``,
    ``free`` or ``input`` (default ``free``).  Kinematic conditions are
    imposed by eliminating velocity dofs; the corresponding ports are removed.
    """
    p = p or MaterialParams()
    basis = basis or BasisSet.force_control(mesh, curvature)
    if basis.velocity.continuity != "C1":
        raise ValueError("force control needs a C1 velocity space (second derivatives of field 1)")
    bc = _check_boundary(boundary)
    V, Q = basis.velocity, basis.curvature
    trace = SideTraceSpace(mesh)

    M1 = mass_matrix(V)
    Mq = mass_matrix(Q)
    Dxx = coupling_matrix(Q, V, dcol=(2, 0))
    Dyy = coupling_matrix(Q, V, dcol=(0, 2))
    Dxy = coupling_matrix(Q, V, dcol=(1, 1))
    B1, B2 = boundary_matrices(V, trace)

    G = sp.vstack([Dxx, Dyy, 2.0 * Dxy], format="csr")
    J = sp.bmat([[None, -G.T], [G, None]], format="csr")
    M = sp.block_diag([M1, Mq, Mq, Mq], format="csr")
    K = _energy_gram(basis, p, M1, Mq)
    Bfull = sp.vstack([sp.hstack([B1, B2]), sp.csr_matrix((3 * Q.n_dofs, 2 * trace.n_dofs))],
                      format="csr")
    labels = _port_labels(trace, ("shear", "moment"))

    fixed = [V.essential_dofs(s, c) for s, c in bc.items() if c in ("clamped", "simply_supported")]
    fixed = np.unique(np.concatenate(fixed)) if fixed else np.array([], dtype=int)
    keep = np.setdiff1d(np.arange(M.shape[0]), fixed)
    dropped = {f"{s}:shear:" for s, c in bc.items() if c in ("clamped", "simply_supported")}
    dropped |= {f"{s}:moment:" for s, c in bc.items() if c == "clamped"}
    live = [i for i, lab in enumerate(labels) if lab.rsplit(":", 1)[0] + ":" not in dropped]

    blocks = {"M_1": M1, "M_2": Mq, "M_3": Mq, "M_4": Mq, "D_xx": Dxx, "D_yy": Dyy,
              "D_xy": Dxy, "B_1": B1, "B_2": B2}
    layout = BlockLayout(BLOCKS, (V.n_dofs, Q.n_dofs, Q.n_dofs, Q.n_dofs))
    sys_ = PlatePhSystem(M=M, J=J, K=K, B=Bfull[:, live], layout=layout,
                         port_labels=tuple(labels[i] for i in live), mesh=mesh, basis=basis,
                         params=p, variant="force", boundary=bc, trace=trace, blocks=blocks)
    return sys_.restrict(keep, drop_zero_ports=False)


def assemble_plate_kinematic_control(mesh: Mesh2D, basis: Optional[BasisSet] = None,
                                     p: Optional[MaterialParams] = None,
                                     boundary: Optional[Mapping[str, str]] = None) -> PlatePhSystem:
    """Kinematic boundary control: inputs are the velocity trace and its
    normal derivative on every side.

    Only ``clamped`` (zero input) and ``input`` sides are supported.
    """
    p = p or MaterialParams()
    basis = basis or BasisSet.kinematic_control(mesh)
    if basis.curvature.continuity != "C1":
        raise ValueError("kinematic control needs C1 moment spaces (div Div of the test fields)")
    bc = _check_boundary({s: "clamped" for s in SIDES} | dict(boundary or {}))
    for side, cond in bc.items():
        if cond not in ("clamped", "input"):
            raise ValueError(f"kinematic control supports clamped or input sides, got {cond!r} on {side}")
    V, Q = basis.velocity, basis.curvature
    trace = SideTraceSpace(mesh)

    M1 = mass_matrix(V)
    Mq = mass_matrix(Q)
    Dxx = coupling_matrix(Q, V, drow=(2, 0))
    Dyy = coupling_matrix(Q, V, drow=(0, 2))
    Dxy = coupling_matrix(Q, V, drow=(1, 1))
    Bk1, Bk2 = kinematic_boundary_matrices(Q, trace)

    G = sp.vstack([Dxx, Dyy, 2.0 * Dxy], format="csr")
    J = sp.bmat([[None, -G.T], [G, None]], format="csr")
    M = sp.block_diag([M1, Mq, Mq, Mq], format="csr")
    K = _energy_gram(basis, p, M1, Mq)
    Bfull = sp.vstack([sp.csr_matrix((V.n_dofs, 2 * trace.n_dofs)), sp.hstack([Bk1, Bk2])],
                      format="csr")
    labels = _port_labels(trace, ("velocity", "normal_slope"))
    blocks = {"M_1": M1, "M_2": Mq, "M_3": Mq, "M_4": Mq, "D_xx": Dxx, "D_yy": Dyy,
              "D_xy": Dxy, "B_1": Bk1, "B_2": Bk2}
    layout = BlockLayout(BLOCKS, (V.n_dofs, Q.n_dofs, Q.n_dofs, Q.n_dofs))
    return PlatePhSystem(M=M, J=J, K=K, B=Bfull, layout=layout, port_labels=tuple(labels),
                         mesh=mesh, basis=basis, params=p, variant="kinematic", boundary=bc,
                         trace=trace, blocks=blocks)


def attach_damping(sys_: PhSystem, r: Optional[float] = None) -> PhSystem:
    """Add viscous damping ``r dw/dt`` as a resistive port on the velocity block.

    ``G_R`` selects the velocity block and ``S = r M_1``, so the dissipated
    power is ``int r v^2``.
    """
    if r is None:
        r = getattr(getattr(sys_, "params", None), "damping", 0.0)
    if r < 0:
        raise ValueError(f"damping coefficient must be >= 0, got {r}")
    if r == 0:
        return sys_
    n1 = sys_.layout.sizes[0]
    G_R = sp.eye(sys_.size, n1, format="csr")
    S = r * sys_.M[:n1, :n1]
    return sys_.with_damping(G_R, S)


def attach_distributed_load(sys_: PlatePhSystem, load_density: Union[float, Callable]) -> PlatePhSystem:
    """Add the distributed force port: column ``int phi_1 f_d`` on the velocity block."""
    full = load_vector(sys_.basis.velocity, load_density)
    column = np.zeros(sys_.size)
    n1 = sys_.n_velocity
    column[:n1] = full[sys_.velocity_dofs()]
    return sys_.with_load(column)


def gravity_density(p: MaterialParams, g: float = 9.81) -> float:
    """Load density ``f_d = -mu g``."""
    return -p.surface_density * g


def static_deflection(sys_: PhSystem) -> np.ndarray:
    """Equilibrium displacement under the load port, from the pH blocks.

    At rest the velocity vanishes and the curvature state is ``M_2^-1 G w``;
    the momentum balance then reads ``G^T Q_2 G w = L``.
    """
    if sys_.load is None:
        raise ValueError("system has no distributed load port")
    n1 = sys_.layout.sizes[0]
    Keff = sys_.reduced_stiffness()
    return np.linalg.solve(Keff, sys_.load[:n1])


def bending_stiffness(space: TensorSpace, p: MaterialParams) -> sp.csr_matrix:
    """Classical bending stiffness ``int B^T D B`` with ``B = (d_xx, d_yy, 2 d_xy)``."""
    xi, eta, w = _quad2d()
    m = space.mesh
    Bxx = space.tabulate(xi, eta, 2, 0)
    Byy = space.tabulate(xi, eta, 0, 2)
    Bxy = 2.0 * space.tabulate(xi, eta, 1, 1)
    D = bending_matrix(p)
    local = np.zeros((space.n_local, space.n_local))
    for q in range(len(w)):
        Bq = np.vstack([Bxx[q], Byy[q], Bxy[q]])
        local += w[q] * m.hx * m.hy * Bq.T @ D @ Bq
    return _scatter(space, space, local)


# ---------------------------------------------------------------------------
# boundary physics
# ---------------------------------------------------------------------------

def boundary_quantities(e, grad_e, side):
    """Boundary forces and momenta from the efforts on a straight side.

    Parameters
    ----------
    e : array_like, shape (4, ...)
        ``(v, Mxx, Myy, Mxy)`` at the boundary points.
    grad_e : array_like, shape (4, 2, ...)
        Their gradients ``(d/dx, d/dy)``.
    side : str or array_like
        Side tag or outward unit normal.

    Returns
    -------
    Q_n, M_nn, M_ns, Q_eff
        Shear force, flexural and torsional momenta, effective shear
        ``Q_n - dM_ns/ds``.
    """
    nx, ny = side_normal(side)
    sx, sy = -ny, nx
    e = np.asarray(e, dtype=float)
    g = np.asarray(grad_e, dtype=float)
    Mxx, Myy, Mxy = e[1], e[2], e[3]
    Qx = -g[1, 0] - g[3, 1]
    Qy = -g[2, 1] - g[3, 0]
    Qn = nx * Qx + ny * Qy
    Mnn = nx * (Mxx * nx + Mxy * ny) + ny * (Mxy * nx + Myy * ny)
    Mns = sx * (Mxx * nx + Mxy * ny) + sy * (Mxy * nx + Myy * ny)
    ds = lambda k: sx * g[k, 0] + sy * g[k, 1]  # noqa: E731
    dMns = -nx * ny * ds(1) + nx * ny * ds(2) + (nx * nx - ny * ny) * ds(3)
    return Qn, Mnn, Mns, Qn - dMns


def simply_supported_frequencies(p: MaterialParams, a: float, b: float, n_modes: int = 5) -> np.ndarray:
    """Lowest ``omega_mn = pi^2 (m^2/a^2 + n^2/b^2) sqrt(D / mu)``, ascending,
    with repeated values kept."""
    k = int(np.ceil(np.sqrt(n_modes))) + n_modes
    m, n = np.meshgrid(np.arange(1, k + 1), np.arange(1, k + 1))
    w = np.pi**2 * ((m / a) ** 2 + (n / b) ** 2) * np.sqrt(bending_rigidity(p) / p.surface_density)
    return np.sort(w.ravel())[:n_modes]
