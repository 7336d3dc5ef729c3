"""Checks of the plate's structural identities on analytic fields.

All test fields are bivariate polynomials, so every derivative is exact and
tensor Gauss-Legendre quadrature integrates them exactly once its order is
high enough.  Compactly supported fields are polynomials multiplied by the
bump ``((x - x0)(x1 - x))^k ((y - y0)(y1 - y))^k`` on a box ``[x0, x1] x [y0, y1]``
and set to zero outside; with ``k >= 3`` they are twice continuously
differentiable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .mesh import SIDES, Mesh2D, side_normal
from .plate import boundary_quantities

BUMP_POWER = 3


class Poly2:
    """Bivariate polynomial ``sum c[i, j] (x - xc)^i (y - yc)^j``.

    Expanding about the centre of a support box keeps the coefficients of
    bump functions well scaled, so evaluation near the box edges does not
    lose digits to cancellation.
    """

    __slots__ = ("c", "center")

    def __init__(self, coef, center=(0.0, 0.0)):
        self.c = np.atleast_2d(np.asarray(coef, dtype=float))
        self.center = (float(center[0]), float(center[1]))

    @classmethod
    def constant(cls, value: float, center=(0.0, 0.0)) -> "Poly2":
        return cls([[value]], center)

    @classmethod
    def bump(cls, box, k: int = BUMP_POWER) -> "Poly2":
        """``((x - x0)(x1 - x))^k ((y - y0)(y1 - y))^k``, centred on the box."""
        x0, x1, y0, y1 = box
        rx, ry = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
        px = P.polypow([rx * rx, 0.0, -1.0], k)
        py = P.polypow([ry * ry, 0.0, -1.0], k)
        return cls(np.outer(px, py), (0.5 * (x0 + x1), 0.5 * (y0 + y1)))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int, center=(0.0, 0.0)) -> "Poly2":
        c = rng.uniform(-1.0, 1.0, (degree + 1, degree + 1))
        i, j = np.indices(c.shape)
        c[i + j > degree] = 0.0
        return cls(c, center)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float) - self.center[0]
        y = np.asarray(y, dtype=float) - self.center[1]
        return P.polyval2d(x, y, self.c)

    def d(self, dx: int = 0, dy: int = 0) -> "Poly2":
        c = self.c
        if dx:
            c = P.polyder(c, dx, axis=0) if c.shape[0] > dx else np.zeros((1, c.shape[1]))
        if dy:
            c = P.polyder(c, dy, axis=1) if c.shape[1] > dy else np.zeros((c.shape[0], 1))
        return Poly2(c, self.center)

    def _common(self, other: "Poly2") -> tuple[float, float]:
        if other.center == self.center:
            return self.center
        # constants can be moved anywhere
        if other.c.size == 1:
            return self.center
        if self.c.size == 1:
            return other.center
        raise ValueError("polynomials expanded about different centres")

    def __mul__(self, other):
        if isinstance(other, Poly2):
            center = self._common(other)
            a, b = self.c, other.c
            out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
            for i in range(a.shape[0]):
                for j in range(a.shape[1]):
                    if a[i, j] != 0.0:
                        out[i:i + b.shape[0], j:j + b.shape[1]] += a[i, j] * b
            return Poly2(out, center)
        return Poly2(self.c * float(other), self.center)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Poly2):
            other = Poly2.constant(float(other), self.center)
        center = self._common(other)
        a, b = self.c, other.c
        out = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])))
        out[: a.shape[0], : a.shape[1]] += a
        out[: b.shape[0], : b.shape[1]] += b
        return Poly2(out, center)

    __radd__ = __add__

    def __neg__(self):
        return Poly2(-self.c, self.center)

    def __sub__(self, other):
        return self + (-other)

    @property
    def degree(self) -> tuple[int, int]:
        return self.c.shape[0] - 1, self.c.shape[1] - 1


def _gauss_box(box, n: int):
    x0, x1, y0, y1 = box
    t, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x1 - x0) * (t + 1) + x0
    y = 0.5 * (y1 - y0) * (t + 1) + y0
    X, Y = np.meshgrid(x, y, indexing="ij")
    W = np.outer(w, w) * 0.25 * (x1 - x0) * (y1 - y0)
    return X, Y, W


def _hessian(f: Poly2):
    return f.d(2, 0), f.d(0, 2), f.d(1, 1)


def double_divergence(E: Sequence[Poly2]) -> Poly2:
    """``div Div E = E_xx,xx + E_yy,yy + 2 E_xy,xy``."""
    Exx, Eyy, Exy = E
    return Exx.d(2, 0) + Eyy.d(0, 2) + 2.0 * Exy.d(1, 1)


@dataclass
class TestFieldSpec:
    """Scalar field ``f`` and symmetric tensor ``E = (E_xx, E_yy, E_xy)`` on a box.

    Integrals are taken over ``box`` (the support); ``domain`` is the plate
    rectangle ``(a, b)`` that must contain it.  Either ``f`` and its gradient
    or ``E`` and its divergence must vanish on the box boundary, otherwise a
    ``ValueError`` reports the support violation.
    """

    __test__ = False  # not a pytest class

    f: Poly2
    E: tuple[Poly2, Poly2, Poly2]
    box: tuple[float, float, float, float]
    domain: tuple[float, float] = (1.0, 1.0)
    quad_order: int = 16
    support_tol: float = 1e-12

    def __post_init__(self):
        x0, x1, y0, y1 = self.box
        a, b = self.domain
        if not (0.0 <= x0 < x1 <= a and 0.0 <= y0 < y1 <= b):
            raise ValueError(f"support box {self.box} is not inside the domain [0, {a}] x [0, {b}]")
        if len(self.E) != 3:
            raise ValueError("tensor field needs three components (E_xx, E_yy, E_xy)")
        self.E = tuple(self.E)
        if self.boundary_violation() > self.support_tol:
            raise ValueError(f"support violation: boundary terms of size {self.boundary_violation():.3e} "
                             "do not vanish on the box boundary")

    def _boundary_samples(self, n: int = 17):
        x0, x1, y0, y1 = self.box
        s = np.linspace(0.0, 1.0, n)
        xs = np.concatenate([x0 + (x1 - x0) * s, np.full(n, x1), x1 - (x1 - x0) * s, np.full(n, x0)])
        ys = np.concatenate([np.full(n, y0), y0 + (y1 - y0) * s, np.full(n, y1), y1 - (y1 - y0) * s])
        return xs, ys

    def boundary_violation(self) -> float:
        """Relative size of the smaller of the two traces that must vanish."""
        xs, ys = self._boundary_samples()
        f = self.f
        ftr = max(np.abs(g(xs, ys)).max() for g in (f, f.d(1, 0), f.d(0, 1)))
        Exx, Eyy, Exy = self.E
        div = (Exx.d(1, 0) + Exy.d(0, 1), Exy.d(1, 0) + Eyy.d(0, 1))
        etr = max(np.abs(g(xs, ys)).max() for g in (*self.E, *div))
        X, Y, _ = _gauss_box(self.box, 8)
        fs = max(np.abs(f(X, Y)).max(), np.finfo(float).tiny)
        es = max(max(np.abs(g(X, Y)).max() for g in self.E), np.finfo(float).tiny)
        return float(min(ftr / fs, etr / es))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 3, box=(0.1, 0.9, 0.2, 0.8),
               domain=(1.0, 1.0), quad_order: int = 16, k: int = BUMP_POWER) -> "TestFieldSpec":
        """Random polynomial times bump for ``f``, random polynomial tensor ``E``."""
        bump = Poly2.bump(box, k)
        f = Poly2.random(rng, degree, bump.center) * bump
        E = tuple(Poly2.random(rng, degree, bump.center) for _ in range(3))
        return cls(f, E, box, domain, quad_order)


def adjointness_terms(spec: TestFieldSpec, quad_order: Optional[int] = None):
    """``(int divDiv(E) f, int E : Hess f, scale)`` over the support box."""
    X, Y, W = _gauss_box(spec.box, quad_order or spec.quad_order)
    lhs_i = double_divergence(spec.E)(X, Y) * spec.f(X, Y)
    fxx, fyy, fxy = (h(X, Y) for h in _hessian(spec.f))
    Exx, Eyy, Exy = (c(X, Y) for c in spec.E)
    rhs_i = Exx * fxx + Eyy * fyy + 2.0 * Exy * fxy
    scale = float(np.sum(W * (np.abs(lhs_i) + np.abs(Exx * fxx) + np.abs(Eyy * fyy) + 2 * np.abs(Exy * fxy))))
    return float(np.sum(W * lhs_i)), float(np.sum(W * rhs_i)), scale


def check_adjointness(spec: TestFieldSpec, quad_order: Optional[int] = None) -> float:
    """Relative gap between ``int divDiv(E) f`` and ``int E : Grad grad f``.

    The scale is the integral of the absolute integrands, so the residual is
    well defined when both sides vanish.
    """
    lhs, rhs, scale = adjointness_terms(spec, quad_order)
    if scale == 0.0:
        return abs(lhs - rhs)
    return abs(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# plate pairing
# ---------------------------------------------------------------------------

@dataclass
class PlateEffort:
    """Analytic efforts ``(v, M_xx, M_yy, M_xy)``."""

    v: Poly2
    Mxx: Poly2
    Myy: Poly2
    Mxy: Poly2

    @classmethod
    def zero(cls) -> "PlateEffort":
        z = Poly2.constant(0.0)
        return cls(z, z, z, z)

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 4) -> "PlateEffort":
        return cls(*(Poly2.random(rng, degree) for _ in range(4)))

    @property
    def fields(self) -> tuple[Poly2, Poly2, Poly2, Poly2]:
        return (self.v, self.Mxx, self.Myy, self.Mxy)

    def flows(self) -> tuple[Poly2, Poly2, Poly2, Poly2]:
        """``f = -J e``: ``(divDiv M, -v_xx, -v_yy, -v_xy)``."""
        vxx, vyy, vxy = _hessian(self.v)
        return (double_divergence((self.Mxx, self.Myy, self.Mxy)), -vxx, -vyy, -vxy)

    def values(self, x, y) -> np.ndarray:
        return np.array([g(x, y) for g in self.fields])

    def gradients(self, x, y) -> np.ndarray:
        return np.array([[g.d(1, 0)(x, y), g.d(0, 1)(x, y)] for g in self.fields])


@dataclass
class PairingResult:
    interior: float
    boundary: float
    corners: float
    scale: float
    residual: float = field(init=False)

    def __post_init__(self):
        total = self.interior + self.boundary + self.corners
        self.residual = abs(total) / self.scale if self.scale > 0 else abs(total)


def _effort_dot(e: PlateEffort, f, X, Y):
    # the xy entries appear twice in the tensor contraction
    ev = e.values(X, Y)
    fv = [g(X, Y) for g in f]
    return ev[0] * fv[0] + ev[1] * fv[1] + ev[2] * fv[2] + 2.0 * ev[3] * fv[3]


def boundary_vector(e: PlateEffort, x, y, side) -> np.ndarray:
    """``z = (Q~_n, v, M_nn, dv/dn)`` from the physical boundary quantities."""
    n = side_normal(side)
    _, Mnn, _, Qeff = boundary_quantities(e.values(x, y), e.gradients(x, y), n)
    g = e.gradients(x, y)
    return np.array([Qeff, e.v(x, y), Mnn, n[0] * g[0, 0] + n[1] * g[0, 1]])


def check_plate_pairing(e_a: PlateEffort, e_b: PlateEffort, mesh, quad_order: int = 12) -> PairingResult:
    """Evaluate the symmetric pairing of the structure elements generated by two efforts.

    The sum is ``int (e_a f_b + e_b f_a) + oint B_J(z_a, z_b) + corners`` with
    ``f = -J e`` and ``z = (Q~_n, v, M_nn, dv/dn)``.  The rectangle has four
    corners, so the tangential integration by parts leaves the point terms
    ``[M_ns,b v_a + M_ns,a v_b]`` between the ends of every side.  The total
    vanishes for exact fields; ``residual`` is relative to the sum of the
    absolute contributions.

    ``mesh`` may be a :class:`Mesh2D` or a ``(a, b)`` pair; only the rectangle
    is used.
    """
    a, b = (mesh.a, mesh.b) if isinstance(mesh, Mesh2D) else (float(mesh[0]), float(mesh[1]))
    X, Y, W = _gauss_box((0.0, a, 0.0, b), quad_order)
    fa, fb = e_a.flows(), e_b.flows()
    ia = _effort_dot(e_a, fb, X, Y)
    ib = _effort_dot(e_b, fa, X, Y)
    interior = float(np.sum(W * (ia + ib)))
    scale = float(np.sum(W * (np.abs(ia) + np.abs(ib))))

    t, w = np.polynomial.legendre.leggauss(quad_order)
    boundary = corners = 0.0
    geometry = {
        "bottom": (lambda s: (s, 0 * s), a),
        "right": (lambda s: (a + 0 * s, s), b),
        "top": (lambda s: (a - s, b + 0 * s), a),
        "left": (lambda s: (0 * s, b - s), b),
    }
    for side in SIDES:
        point, length = geometry[side]
        s = 0.5 * length * (t + 1)
        ws = 0.5 * length * w
        x, y = point(s)
        za = boundary_vector(e_a, x, y, side)
        zb = boundary_vector(e_b, x, y, side)
        bj = za[0] * zb[1] + za[1] * zb[0] + za[2] * zb[3] + za[3] * zb[2]
        boundary += float(ws @ bj)
        scale += float(ws @ np.abs(bj))
        xe, ye = point(np.array([0.0, length]))
        n = side_normal(side)
        mns_a = boundary_quantities(e_a.values(xe, ye), e_a.gradients(xe, ye), n)[2]
        mns_b = boundary_quantities(e_b.values(xe, ye), e_b.gradients(xe, ye), n)[2]
        term = mns_b * e_a.v(xe, ye) + mns_a * e_b.v(xe, ye)
        corners += float(term[1] - term[0])
        scale += float(np.abs(term).sum())
    return PairingResult(interior, boundary, corners, scale)


# ---------------------------------------------------------------------------
# boundary operator
# ---------------------------------------------------------------------------

def _side_of(point, domain, tol: float = 1e-12) -> str:
    x, y = point
    a, b = domain
    if not (-tol <= x <= a + tol and -tol <= y <= b + tol):
        raise ValueError(f"point {point} lies outside the rectangle")
    for side, hit in (("bottom", abs(y) <= tol), ("right", abs(x - a) <= tol),
                      ("top", abs(y - b) <= tol), ("left", abs(x) <= tol)):
        if hit:
            return side
    raise ValueError(f"point {point} is not on the boundary")


def bpartial_matrix_form(e: PlateEffort, x: float, y: float, normal) -> np.ndarray:
    """``z = B_d(e)`` assembled from the algebraic, gradient, normal- and
    tangential-derivative matrices acting on ``e = (v, M_xx, M_yy, M_xy)``."""
    nx, ny = side_normal(normal)
    sx, sy = -ny, nx
    A0 = np.array([[0, 0, 0, 0], [1, 0, 0, 0], [0, nx**2, ny**2, 2 * nx * ny], [0, 0, 0, 0]], dtype=float)
    Ax = np.zeros((4, 4))
    Ax[0] = [0, nx, 0, ny]
    Ay = np.zeros((4, 4))
    Ay[0] = [0, 0, ny, nx]
    An = np.zeros((4, 4))
    An[3, 0] = 1.0
    As = np.zeros((4, 4))
    As[0] = [0, -nx * ny, nx * ny, nx**2 - ny**2]
    val = e.values(x, y)
    g = e.gradients(x, y)
    ex, ey = g[:, 0], g[:, 1]
    dn = nx * ex + ny * ey
    ds = sx * ex + sy * ey
    return A0 @ val - Ax @ ex - Ay @ ey + An @ dn - As @ ds


def check_bpartial(e: PlateEffort, point, domain=(1.0, 1.0), normal=None, tol: float = 1e-12) -> np.ndarray:
    """Boundary vector ``(Q~_n, v, M_nn, dv/dn)`` at a boundary point.

    Evaluates the matrix form and the physical quantities independently and
    raises ``AssertionError`` if they disagree beyond ``tol`` (relative).
    ``normal`` is required at corners, where the side is ambiguous.
    """
    x, y = float(point[0]), float(point[1])
    side = _side_of((x, y), domain)
    n = side_normal(side if normal is None else normal)
    z_mat = bpartial_matrix_form(e, x, y, n)
    z_phys = boundary_vector(e, np.array([x]), np.array([y]), n)[:, 0]
    gap = np.abs(z_mat - z_phys).max()
    if gap > tol * max(1.0, np.abs(z_phys).max()):
        raise AssertionError(f"matrix form and physical boundary quantities differ by {gap:.3e}")
    return z_mat
