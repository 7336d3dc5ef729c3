"""Uniform structured meshes for the beam and the rectangular plate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIDES = ("bottom", "right", "top", "left")

# outward normal per side; the tangent is s = (-n_y, n_x), so every side is
# traversed counter-clockwise
NORMALS = {
    "bottom": (0.0, -1.0),
    "right": (1.0, 0.0),
    "top": (0.0, 1.0),
    "left": (-1.0, 0.0),
}


def side_normal(side) -> np.ndarray:
    """Outward unit normal of a side tag, or a validated normal vector."""
    if isinstance(side, str):
        try:
            return np.array(NORMALS[side])
        except KeyError:
            raise ValueError(f"{side!r} is not a boundary side; expected one of {SIDES}") from None
    n = np.asarray(side, dtype=float)
    if n.shape != (2,) or abs(np.hypot(*n) - 1.0) > 1e-12:
        raise ValueError(f"boundary normal must be a unit 2-vector, got {side!r}")
    return n


def side_tangent(side) -> np.ndarray:
    n = side_normal(side)
    return np.array([-n[1], n[0]])


@dataclass(frozen=True)
class Mesh1D:
    length: float
    n_elements: int
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"length must be > 0, got {self.length}")
        if int(self.n_elements) < 1:
            raise ValueError(f"need at least one element, got {self.n_elements}")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        object.__setattr__(self, "nodes", np.linspace(0.0, self.length, self.n_elements + 1))

    @property
    def h(self) -> float:
        return self.length / self.n_elements

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    def endpoint_node(self, tag: str) -> int:
        if tag == "left":
            return 0
        if tag == "right":
            return self.n_elements
        raise ValueError(f"unknown beam end {tag!r}; expected 'left' or 'right'")


@dataclass(frozen=True)
class BoundaryEdge:
    nodes: tuple[int, int]  # ordered along the tangent
    side: str
    normal: tuple[float, float]
    tangent: tuple[float, float]
    element: int


@dataclass(frozen=True)
class Mesh2D:
    """``nx x ny`` uniform rectangles on ``[0, a] x [0, b]``.

    Node ``(i, j)`` has index ``j * (nx + 1) + i``; element ``(ex, ey)`` has
    index ``ey * nx + ex`` and counter-clockwise corner nodes.
    """

    a: float
    b: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"rectangle sides must be > 0, got a={self.a}, b={self.b}")
        if int(self.nx) < 1 or int(self.ny) < 1:
            raise ValueError(f"need at least one element per direction, got {self.nx}x{self.ny}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @property
    def hx(self) -> float:
        return self.a / self.nx

    @property
    def hy(self) -> float:
        return self.b / self.ny

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def area(self) -> float:
        return self.a * self.b

    def node_index(self, i, j):
        return np.asarray(j) * (self.nx + 1) + np.asarray(i)

    @property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, self.a, self.nx + 1)
        y = np.linspace(0.0, self.b, self.ny + 1)
        X, Y = np.meshgrid(x, y)
        return np.column_stack([X.ravel(), Y.ravel()])

    @property
    def elements(self) -> np.ndarray:
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        ex, ey = ex.ravel(), ey.ravel()
        return np.column_stack([self.node_index(ex, ey), self.node_index(ex + 1, ey),
                                self.node_index(ex + 1, ey + 1), self.node_index(ex, ey + 1)])

    def element_origins(self) -> np.ndarray:
        """Lower-left corner of every element, shape ``(n_elements, 2)``."""
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        return np.column_stack([ex.ravel() * self.hx, ey.ravel() * self.hy])

    def side_node_grid(self, side: str) -> list[tuple[int, int]]:
        """Grid coordinates ``(i, j)`` of the nodes of a side, ordered along its tangent."""
        nx, ny = self.nx, self.ny
        if side == "bottom":
            return [(i, 0) for i in range(nx + 1)]
        if side == "right":
            return [(nx, j) for j in range(ny + 1)]
        if side == "top":
            return [(i, ny) for i in range(nx, -1, -1)]
        if side == "left":
            return [(0, j) for j in range(ny, -1, -1)]
        side_normal(side)  # raises
        raise AssertionError

    def side_length(self, side: str) -> float:
        return self.a if side in ("bottom", "top") else self.b

    def side_point(self, side: str, s):
        """Physical coordinates at arc length ``s`` along a side."""
        s = np.asarray(s, dtype=float)
        if side == "bottom":
            return s, np.zeros_like(s)
        if side == "right":
            return np.full_like(s, self.a), s
        if side == "top":
            return self.a - s, np.full_like(s, self.b)
        if side == "left":
            return np.zeros_like(s), self.b - s
        side_normal(side)
        raise AssertionError

    def side_elements(self, side: str) -> list[int]:
        """Elements adjacent to a side, ordered along the tangent."""
        nx, ny = self.nx, self.ny
        if side == "bottom":
            return [ex for ex in range(nx)]
        if side == "right":
            return [ey * nx + nx - 1 for ey in range(ny)]
        if side == "top":
            return [(ny - 1) * nx + ex for ex in range(nx - 1, -1, -1)]
        if side == "left":
            return [ey * nx for ey in range(ny - 1, -1, -1)]
        side_normal(side)
        raise AssertionError

    @property
    def boundary_edges(self) -> list[BoundaryEdge]:
        edges = []
        for side in SIDES:
            grid = self.side_node_grid(side)
            n = NORMALS[side]
            t = (-n[1], n[0])
            for k, el in enumerate(self.side_elements(side)):
                a = int(self.node_index(*grid[k]))
                b = int(self.node_index(*grid[k + 1]))
                edges.append(BoundaryEdge((a, b), side, n, t, el))
        return edges

    def locate(self, x, y):
        """Element index and local coordinates in ``[0, 1]^2`` of points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ex = np.clip(np.floor(x / self.hx).astype(int), 0, self.nx - 1)
        ey = np.clip(np.floor(y / self.hy).astype(int), 0, self.ny - 1)
        return ey * self.nx + ex, x / self.hx - ex, y / self.hy - ey
