"""Tensor-product finite element spaces on :class:`~phplate.mesh.Mesh2D`.

Three families are provided:

``bfs``
    Bogner-Fox-Schmit bicubic Hermite rectangle, nodal dofs
    ``(w, w_x, w_y, w_xy)``; globally C1.
``q2``
    Biquadratic Lagrange, globally C0.
``dq3``
    Bicubic Lagrange at the 4x4 Gauss points of each element, fully
    discontinuous.  Its mass matrix is diagonal under the 4-point rule and it
    contains the second derivatives of every ``bfs`` function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .mesh import Mesh2D, side_normal
from .shapes import gauss_unit, hermite_cubic, lagrange

CONTINUITY = {"bfs": "C1", "q2": "C0", "dq3": "L2"}


class TensorSpace:
    """Scalar finite element space built from a 1D element basis."""

    def __init__(self, mesh: Mesh2D, kind: str):
        if kind not in CONTINUITY:
            raise ValueError(f"unknown space {kind!r}; expected one of {sorted(CONTINUITY)}")
        self.mesh = mesh
        self.kind = kind
        self.continuity = CONTINUITY[kind]
        if kind == "bfs":
            corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
            pairs = []
            for cx, cy in corners:
                for comp in range(4):
                    kx, ky = comp % 2, comp // 2
                    pairs.append((2 * cx + kx, 2 * cy + ky))
            self._pairs = np.array(pairs)
            self.n_dofs = 4 * mesh.n_nodes
        elif kind == "q2":
            self._pairs = np.array([(a, b) for b in range(3) for a in range(3)])
            self.n_dofs = (2 * mesh.nx + 1) * (2 * mesh.ny + 1)
        else:
            self._pairs = np.array([(a, b) for b in range(4) for a in range(4)])
            self.n_dofs = 16 * mesh.n_elements

    def __repr__(self):
        return f"TensorSpace({self.kind!r}, {self.mesh.nx}x{self.mesh.ny}, n_dofs={self.n_dofs})"

    @property
    def n_local(self) -> int:
        return len(self._pairs)

    def table1d(self, t, h: float, deriv: int) -> np.ndarray:
        if self.kind == "bfs":
            return hermite_cubic(t, h, deriv)
        if self.kind == "q2":
            return lagrange((0.0, 0.5, 1.0), t, h, deriv)
        return lagrange(tuple(gauss_unit(4)[0]), t, h, deriv)

    def tabulate(self, xi, eta, dx: int = 0, dy: int = 0) -> np.ndarray:
        """Local basis (or a partial derivative) at paired reference points.

        Returns an array of shape ``(n_points, n_local)``.
        """
        tx = self.table1d(xi, self.mesh.hx, dx)
        ty = self.table1d(eta, self.mesh.hy, dy)
        return tx[:, self._pairs[:, 0]] * ty[:, self._pairs[:, 1]]

    @cached_property
    def connectivity(self) -> np.ndarray:
        """Global dof of every local function, shape ``(n_elements, n_local)``."""
        m = self.mesh
        ex, ey = np.meshgrid(np.arange(m.nx), np.arange(m.ny))
        ex, ey = ex.ravel(), ey.ravel()
        if self.kind == "bfs":
            cols = []
            for cx, cy in [(0, 0), (1, 0), (1, 1), (0, 1)]:
                node = m.node_index(ex + cx, ey + cy)
                cols.extend(4 * node + comp for comp in range(4))
            return np.column_stack(cols)
        if self.kind == "q2":
            stride = 2 * m.nx + 1
            return np.column_stack([(2 * ey + b) * stride + 2 * ex + a for a, b in self._pairs])
        e = np.arange(m.n_elements)
        return 16 * e[:, None] + np.arange(16)[None, :]

    def evaluate(self, coeffs, x, y, dx: int = 0, dy: int = 0) -> np.ndarray:
        """Evaluate a field with coefficients ``coeffs`` at physical points."""
        coeffs = np.asarray(coeffs, dtype=float)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        el, xi, eta = self.mesh.locate(x, y)
        tab = self.tabulate(xi, eta, dx, dy)
        return np.einsum("pl,pl->p", tab, coeffs[self.connectivity[el]])

    def interpolate(self, f: Callable, fx: Optional[Callable] = None,
                    fy: Optional[Callable] = None, fxy: Optional[Callable] = None) -> np.ndarray:
        """Interpolation coefficients of a smooth function.

        ``bfs`` needs the derivatives ``fx``, ``fy`` and ``fxy`` as well.
        """
        m = self.mesh
        if self.kind == "bfs":
            if fx is None or fy is None or fxy is None:
                raise ValueError("bfs interpolation needs f, fx, fy and fxy")
            X, Y = m.nodes.T
            c = np.empty((m.n_nodes, 4))
            for comp, g in enumerate((f, fx, fy, fxy)):
                c[:, comp] = np.broadcast_to(g(X, Y), X.shape)
            return c.ravel()
        X, Y = self.dof_coordinates().T
        return np.broadcast_to(np.asarray(f(X, Y), dtype=float), X.shape).copy()

    def dof_coordinates(self) -> np.ndarray:
        """Physical location of every dof (nodal dofs only)."""
        m = self.mesh
        if self.kind == "bfs":
            return np.repeat(m.nodes, 4, axis=0)
        if self.kind == "q2":
            x = np.linspace(0.0, m.a, 2 * m.nx + 1)
            y = np.linspace(0.0, m.b, 2 * m.ny + 1)
            X, Y = np.meshgrid(x, y)
            return np.column_stack([X.ravel(), Y.ravel()])
        g = gauss_unit(4)[0]
        loc = np.column_stack([g[self._pairs[:, 0]] * m.hx, g[self._pairs[:, 1]] * m.hy])
        return (m.element_origins()[:, None, :] + loc[None, :, :]).reshape(-1, 2)

    def essential_dofs(self, side: str, condition: str) -> np.ndarray:
        """Dofs removed by a homogeneous kinematic condition on a side.

        ``clamped`` fixes value and normal derivative, ``simply_supported``
        fixes the value only.
        """
        if self.kind != "bfs":
            raise ValueError("kinematic conditions are imposed on the C1 (bfs) field only")
        if condition not in ("clamped", "simply_supported"):
            raise ValueError(f"no essential dofs for condition {condition!r}")
        nodes = np.array([self.mesh.node_index(i, j) for i, j in self.mesh.side_node_grid(side)])
        if condition == "clamped":
            comps = (0, 1, 2, 3)
        else:
            n = side_normal(side)
            # value and tangential derivative vanish along the side
            comps = (0, 2) if n[0] != 0 else (0, 1)
        return np.sort((4 * nodes[:, None] + np.array(comps)[None, :]).ravel())


class SideTraceSpace:
    """Cubic Hermite functions in arc length along each side of the rectangle.

    Every side is a separate arc, so corner nodes carry one pair of dofs
    ``(value, d/ds)`` per adjacent side.
    """

    def __init__(self, mesh: Mesh2D, sides=("bottom", "right", "top", "left")):
        self.mesh = mesh
        self.sides = tuple(sides)
        self.offsets = {}
        off = 0
        for side in self.sides:
            self.offsets[side] = off
            off += 2 * (len(mesh.side_node_grid(side)))
        self.n_dofs = off

    def side_dofs(self, side: str) -> np.ndarray:
        n = 2 * len(self.mesh.side_node_grid(side))
        return self.offsets[side] + np.arange(n)

    def segment_dofs(self, side: str, k: int) -> np.ndarray:
        return self.offsets[side] + 2 * k + np.arange(4)

    def segment_length(self, side: str) -> float:
        return self.mesh.hx if side in ("bottom", "top") else self.mesh.hy

    def constant(self, side: str, value: float = 1.0) -> np.ndarray:
        """Coefficients of a function equal to ``value`` on ``side`` and 0 elsewhere."""
        c = np.zeros(self.n_dofs)
        c[self.side_dofs(side)[0::2]] = value
        return c


@dataclass(frozen=True)
class BasisSet:
    """Spaces for the velocity field (1) and the three moment fields (2-4)."""

    velocity: TensorSpace
    curvature: TensorSpace

    @classmethod
    def force_control(cls, mesh: Mesh2D, curvature: str = "dq3") -> "BasisSet":
        return cls(TensorSpace(mesh, "bfs"), TensorSpace(mesh, curvature))

    @classmethod
    def kinematic_control(cls, mesh: Mesh2D) -> "BasisSet":
        return cls(TensorSpace(mesh, "bfs"), TensorSpace(mesh, "bfs"))

    @property
    def mesh(self) -> Mesh2D:
        return self.velocity.mesh
