"""Euler-Bernoulli beam as a port-Hamiltonian system on cubic Hermite elements.

Both the linear momentum and the curvature are discretized with C1 cubic
Hermite functions (dofs ``(value, slope)`` per node).  Boundary ports follow
the end-point pairing::

    f_b = (e_w(0), de_w/dx(0), de_k/dx(L), e_k(L))
    e_b = (de_k/dx(0), -e_k(0), -e_w(L), de_w/dx(L))

so that ``dH/dt = e_b . f_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
import scipy.sparse as sp

from .material import MaterialParams
from .mesh import Mesh1D
from .phsys import BlockLayout, PhSystem
from .shapes import gauss_unit, hermite_cubic

QUAD_ORDER = 4
ENDS = ("left", "right")
CONDITIONS = ("clamped", "simply_supported", "free", "input")


def _connectivity(mesh: Mesh1D) -> np.ndarray:
    e = np.arange(mesh.n_elements)
    return 2 * e[:, None] + np.arange(4)[None, :]


def _assemble(mesh: Mesh1D, local: np.ndarray) -> sp.csr_matrix:
    conn = _connectivity(mesh)
    n = 2 * mesh.n_nodes
    R = np.broadcast_to(conn[:, :, None], (len(conn), 4, 4))
    C = np.broadcast_to(conn[:, None, :], (len(conn), 4, 4))
    data = np.broadcast_to(local[None], R.shape)
    return sp.coo_matrix((data.ravel(), (R.ravel(), C.ravel())), shape=(n, n)).tocsr()


def hermite_matrix(mesh: Mesh1D, d_row: int = 0, d_col: int = 0) -> sp.csr_matrix:
    """``int phi^(d_row) phi^(d_col)^T dx`` over the beam."""
    t, w = gauss_unit(QUAD_ORDER)
    h = mesh.h
    Tr = hermite_cubic(t, h, d_row)
    Tc = hermite_cubic(t, h, d_col)
    return _assemble(mesh, (Tr * (w * h)[:, None]).T @ Tc)


def hermite_interpolate(mesh: Mesh1D, f: Callable, df: Callable) -> np.ndarray:
    """Coefficients ``(f(x_i), f'(x_i))`` of the Hermite interpolant."""
    x = mesh.nodes
    c = np.empty((mesh.n_nodes, 2))
    c[:, 0] = np.broadcast_to(f(x), x.shape)
    c[:, 1] = np.broadcast_to(df(x), x.shape)
    return c.ravel()


def hermite_evaluate(mesh: Mesh1D, coeffs, x, deriv: int = 0) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    el = np.clip(np.floor(x / mesh.h).astype(int), 0, mesh.n_elements - 1)
    t = x / mesh.h - el
    tab = hermite_cubic(t, mesh.h, deriv)
    c = np.asarray(coeffs, dtype=float)[_connectivity(mesh)[el]]
    return np.einsum("pl,pl->p", tab, c)


@dataclass(frozen=True, eq=False, kw_only=True)
class BeamPhSystem(PhSystem):
    mesh: Mesh1D
    params: MaterialParams
    variant: str
    boundary: Mapping[str, str]
    blocks: Mapping[str, sp.spmatrix] = field(default_factory=dict, repr=False)

    def split_efforts(self, e) -> tuple[np.ndarray, np.ndarray]:
        """Full-length Hermite coefficients of ``(e_w, e_k)`` from an effort vector."""
        e = np.asarray(e, dtype=float)
        if e.shape[0] == self.size and self.size != self.full_size:
            e = self.expand(e)
        n = 2 * self.mesh.n_nodes
        if e.shape[0] != 2 * n:
            raise ValueError(f"effort vector of length {e.shape[0]} does not fit a beam with {n} dofs per field")
        return e[:n], e[n:]

    def fields_at(self, x, points) -> dict[str, np.ndarray]:
        """Co-energy fields ``v`` (velocity) and ``M`` (bending moment) of state ``x``."""
        e_w, e_k = self.split_efforts(self.coenergy(x))
        pts = np.asarray(points, dtype=float).reshape(-1)
        return {"v": hermite_evaluate(self.mesh, e_w, pts), "M": hermite_evaluate(self.mesh, e_k, pts)}


def _check_boundary(boundary) -> dict[str, str]:
    bc = {"left": "free", "right": "free"}
    for end, cond in (boundary or {}).items():
        if end not in ENDS:
            raise ValueError(f"unknown beam end {end!r}; expected one of {ENDS}")
        if cond not in CONDITIONS:
            raise ValueError(f"unknown boundary condition {cond!r}; expected one of {CONDITIONS}")
        bc[end] = cond
    return bc


def assemble_beam(mesh: Mesh1D, p: MaterialParams, variant: str = "force",
                  boundary: Optional[Mapping[str, str]] = None) -> BeamPhSystem:
    """Port-Hamiltonian beam with four boundary ports.

    ``variant='force'`` integrates the momentum equation by parts twice:
    inputs are ``(de_k/dx(0), -e_k(0), -de_k/dx(L), e_k(L))`` and outputs the
    end velocities and slope velocities.  ``variant='kinematic'`` integrates
    the curvature equation instead and swaps the roles.
    """
    if variant not in ("force", "kinematic"):
        raise ValueError(f"unknown control variant {variant!r}")
    bc = _check_boundary(boundary)
    n = 2 * mesh.n_nodes
    rho = p.linear_density
    EI = p.flexural_rigidity
    M0 = hermite_matrix(mesh)
    M0 = sp.csr_matrix(0.5 * (M0 + M0.T))
    last = n - 2
    ends = {"left": 0, "right": last}

    if variant == "force":
        G = hermite_matrix(mesh, 0, 2)              # int phi_k phi_w''^T
        Bw = sp.csr_matrix(([1.0, 1.0, 1.0, 1.0], ([0, 1, last, last + 1], [0, 1, 2, 3])), shape=(n, 4))
        B = sp.vstack([Bw, sp.csr_matrix((n, 4))], format="csr")
        labels = ("left:shear", "left:moment", "right:shear", "right:moment")
    else:
        G = hermite_matrix(mesh, 2, 0)              # int phi_k'' phi_w^T
        Bk = sp.csr_matrix(([1.0, -1.0, -1.0, 1.0], ([1, 0, last + 1, last], [0, 1, 2, 3])), shape=(n, 4))
        B = sp.vstack([sp.csr_matrix((n, 4)), Bk], format="csr")
        labels = ("left:velocity", "left:slope", "right:velocity", "right:slope")

    J = sp.bmat([[None, -G.T], [G, None]], format="csr")
    M = sp.block_diag([M0, M0], format="csr")
    K = sp.block_diag([M0 / rho, EI * M0], format="csr")

    fixed, dropped = [], set()
    for end, cond in bc.items():
        d = ends[end]
        i0 = 0 if end == "left" else 2
        if variant == "force":
            if cond == "clamped":
                fixed += [d, d + 1]
                dropped |= {i0, i0 + 1}
            elif cond == "simply_supported":
                fixed += [d]
                dropped |= {i0}
        else:
            if cond == "free":
                fixed += [n + d, n + d + 1]
                dropped |= {i0, i0 + 1}
            elif cond == "simply_supported":
                fixed += [n + d]
                dropped |= {i0 + 1}
    live = [i for i in range(4) if i not in dropped]
    sys_ = BeamPhSystem(M=M, J=J, K=K, B=B[:, live], layout=BlockLayout(("w", "kappa"), (n, n)),
                        port_labels=tuple(labels[i] for i in live), mesh=mesh, params=p,
                        variant=variant, boundary=bc,
                        blocks={"M_w": M0, "M_k": M0, "D_b": G, "B_b": B})
    keep = np.setdiff1d(np.arange(2 * n), fixed)
    return sys_.restrict(keep, drop_zero_ports=False)


def beam_boundary_ports(sys_: BeamPhSystem, efforts) -> tuple[np.ndarray, np.ndarray]:
    """End-point flow and effort 4-vectors of the effort field."""
    e_w, e_k = sys_.split_efforts(efforts)
    return _ports(e_w, e_k)


def _ports(e_w, e_k):
    last = len(e_w) - 2
    f_b = np.array([e_w[0], e_w[1], e_k[last + 1], e_k[last]])
    e_b = np.array([e_k[1], -e_k[0], -e_w[last], e_w[last + 1]])
    return f_b, e_b


@dataclass(frozen=True)
class BeamBond:
    """Element ``(f, f_b, e, e_b)`` of the beam structure built from Hermite efforts,
    with ``f = -J e``."""

    mesh: Mesh1D
    e_w: np.ndarray
    e_k: np.ndarray

    @property
    def ports(self) -> tuple[np.ndarray, np.ndarray]:
        return _ports(self.e_w, self.e_k)


def beam_structure_element(mesh: Mesh1D, e_w, e_k) -> BeamBond:
    n = 2 * mesh.n_nodes
    e_w = np.asarray(e_w, dtype=float)
    e_k = np.asarray(e_k, dtype=float)
    if e_w.shape != (n,) or e_k.shape != (n,):
        raise ValueError(f"effort coefficient vectors must have length {n}")
    return BeamBond(mesh, e_w, e_k)


def beam_pairing(a: BeamBond, b: BeamBond, quad_order: int = QUAD_ORDER) -> float:
    """Symmetric pairing ``int (f_a e_b + f_b e_a) dx + f_ba . e_bb + f_bb . e_ba``."""
    if a.mesh != b.mesh:
        raise ValueError("structure elements live on different meshes")
    mesh = a.mesh
    t, w = gauss_unit(quad_order)
    conn = _connectivity(mesh)
    T0 = hermite_cubic(t, mesh.h, 0)
    T2 = hermite_cubic(t, mesh.h, 2)

    def at(c, T):
        return c[conn] @ T.T  # (n_el, n_q)

    # f = -J e:  f_w = d2 e_k / dx2,  f_k = -d2 e_w / dx2
    fa_w, fa_k = at(a.e_k, T2), -at(a.e_w, T2)
    fb_w, fb_k = at(b.e_k, T2), -at(b.e_w, T2)
    integrand = (fa_w * at(b.e_w, T0) + fa_k * at(b.e_k, T0)
                 + fb_w * at(a.e_w, T0) + fb_k * at(a.e_k, T0))
    interior = float(np.sum(integrand * w[None, :]) * mesh.h)
    fa, ea = a.ports
    fb, eb = b.ports
    return interior + float(fa @ eb + fb @ ea)


def cantilever_root(n: int = 1, tol: float = 1e-13) -> float:
    """``n``-th positive root of ``cosh(x) cos(x) = -1`` by bisection."""
    g = lambda x: np.cosh(x) * np.cos(x) + 1.0  # noqa: E731
    if n < 1:
        raise ValueError(f"root index must be >= 1, got {n}")
    # roots sit just around (n - 1/2) pi
    lo, hi = (n - 0.5) * np.pi - 0.5, (n - 0.5) * np.pi + 0.5
    glo = g(lo)
    if glo * g(hi) > 0:
        raise ValueError(f"no sign change bracketing root {n}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cantilever_frequency(p: MaterialParams, length: float, n: int = 1) -> float:
    """Closed-form angular frequency ``(beta_n L)^2 sqrt(EI / rho) / L^2``."""
    return cantilever_root(n) ** 2 * np.sqrt(p.flexural_rigidity / p.linear_density) / length**2
