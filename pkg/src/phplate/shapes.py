"""One-dimensional shape functions and Gauss rules on the unit interval.

Every tabulation routine takes reference coordinates ``xi`` in ``[0, 1]``,
the physical element length ``h`` and a derivative order, and returns an
array of shape ``(len(xi), n_local)`` holding *physical* derivatives.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=None)
def gauss_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights mapped to ``[0, 1]``."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def hermite_cubic(xi, h: float, deriv: int = 0) -> np.ndarray:
    """Cubic Hermite functions ordered ``(v0, s0, v1, s1)``.

    ``v`` functions interpolate the value at an end, ``s`` functions the
    physical slope ``d/dx``.
    """
    t = np.atleast_1d(np.asarray(xi, dtype=float))
    one = np.ones_like(t)
    if deriv == 0:
        cols = [1 - 3 * t**2 + 2 * t**3, h * (t - 2 * t**2 + t**3),
                3 * t**2 - 2 * t**3, h * (-t**2 + t**3)]
    elif deriv == 1:
        cols = [-6 * t + 6 * t**2, h * (1 - 4 * t + 3 * t**2),
                6 * t - 6 * t**2, h * (-2 * t + 3 * t**2)]
    elif deriv == 2:
        cols = [-6 + 12 * t, h * (-4 + 6 * t), 6 - 12 * t, h * (-2 + 6 * t)]
    elif deriv == 3:
        cols = [12 * one, 6 * h * one, -12 * one, 6 * h * one]
    else:
        cols = [0 * one] * 4
    return np.stack(cols, axis=-1) / h**deriv


@lru_cache(maxsize=None)
def _lagrange_polys(nodes: tuple[float, ...]) -> tuple[Polynomial, ...]:
    polys = []
    for i, xi in enumerate(nodes):
        others = [xj for j, xj in enumerate(nodes) if j != i]
        p = Polynomial.fromroots(others)
        polys.append(p / p(xi))
    return tuple(polys)


def lagrange(nodes, xi, h: float, deriv: int = 0) -> np.ndarray:
    """Lagrange polynomials on ``nodes`` (reference coordinates)."""
    t = np.atleast_1d(np.asarray(xi, dtype=float))
    polys = _lagrange_polys(tuple(float(x) for x in nodes))
    cols = [p.deriv(deriv)(t) if deriv else p(t) for p in polys]
    return np.stack(cols, axis=-1) / h**deriv
