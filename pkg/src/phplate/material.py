"""Material constants, the isotropic bending law and the pointwise plate energy.

Curvatures are ordered ``(kappa_xx, kappa_yy, kappa_xy)`` with
``kappa_xy = 2 * d2w/dxdy`` (engineering shear convention).  The bending
matrix therefore carries ``(1 - nu) / 2`` on its last diagonal entry.  The
tensorial convention (``kappa_xy = d2w/dxdy``) is only used inside
:mod:`phplate.verify`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants of a plate or beam.

    Plate models use ``surface_density``, ``young_modulus``, ``poisson`` and
    ``thickness``.  Beam models use ``line_density`` and ``second_moment``
    together with ``young_modulus``.  ``damping`` is the viscous coefficient
    ``r`` of the fluid damping term ``r dw/dt``.
    """

    young_modulus: float = 1.0
    poisson: float = 0.0
    thickness: float = 1.0
    surface_density: float = 1.0
    damping: float = 0.0
    line_density: Optional[float] = None
    second_moment: Optional[float] = None

    def __post_init__(self):
        if not self.surface_density > 0:
            raise ValueError(f"surface_density must be > 0, got {self.surface_density}")
        if not self.young_modulus > 0:
            raise ValueError(f"young_modulus must be > 0, got {self.young_modulus}")
        if not self.thickness > 0:
            raise ValueError(f"thickness must be > 0, got {self.thickness}")
        if not 0.0 <= self.poisson < 0.5:
            raise ValueError(f"poisson must lie in [0, 0.5), got {self.poisson}")
        if not self.damping >= 0:
            raise ValueError(f"damping must be >= 0, got {self.damping}")
        if self.line_density is not None and not self.line_density > 0:
            raise ValueError(f"line_density must be > 0, got {self.line_density}")
        if self.second_moment is not None and not self.second_moment > 0:
            raise ValueError(f"second_moment must be > 0, got {self.second_moment}")

    @classmethod
    def from_rigidity(cls, rigidity: float, surface_density: float,
                      poisson: float = 0.0, damping: float = 0.0) -> "MaterialParams":
        """Plate parameters with a prescribed bending rigidity ``D`` (unit thickness)."""
        return cls(young_modulus=12.0 * rigidity * (1.0 - poisson**2), poisson=poisson,
                   thickness=1.0, surface_density=surface_density, damping=damping)

    @classmethod
    def beam(cls, flexural_rigidity: float, line_density: float,
             damping: float = 0.0) -> "MaterialParams":
        """Beam parameters with ``E I = flexural_rigidity`` and ``I = 1``."""
        return cls(young_modulus=flexural_rigidity, second_moment=1.0,
                   line_density=line_density, damping=damping)

    @property
    def rigidity(self) -> float:
        return bending_rigidity(self)

    @property
    def flexural_rigidity(self) -> float:
        if self.second_moment is None:
            raise ValueError("second_moment is not set; not a beam parameter set")
        return self.young_modulus * self.second_moment

    @property
    def linear_density(self) -> float:
        if self.line_density is None:
            raise ValueError("line_density is not set; not a beam parameter set")
        return self.line_density


def bending_rigidity(p) -> float:
    """``D = E h^3 / (12 (1 - nu^2))``."""
    nu = p.poisson
    if nu * nu >= 1.0:
        raise ValueError(f"bending rigidity undefined for nu^2 >= 1 (nu={nu})")
    return p.young_modulus * p.thickness**3 / (12.0 * (1.0 - nu * nu))


def bending_matrix(p) -> np.ndarray:
    """3x3 matrix mapping ``(kxx, kyy, kxy)`` to ``(Mxx, Myy, Mxy)``."""
    nu = p.poisson
    return bending_rigidity(p) * np.array([[1.0, nu, 0.0],
                                           [nu, 1.0, 0.0],
                                           [0.0, 0.0, 0.5 * (1.0 - nu)]])


def coenergy_pointwise(alpha, p) -> np.ndarray:
    """Co-energy ``(v, Mxx, Myy, Mxy)`` of the energy variables
    ``alpha = (mu v, kxx, kyy, kxy)``.  Trailing axes broadcast."""
    alpha = np.asarray(alpha, dtype=float)
    e = np.empty_like(alpha)
    e[0] = alpha[0] / p.surface_density
    e[1:] = np.tensordot(bending_matrix(p), alpha[1:], axes=1)
    return e


def hamiltonian_density(alpha, p):
    """Energy per unit area ``1/2 alpha_w^2 / mu + 1/2 kappa^T D kappa``."""
    alpha = np.asarray(alpha, dtype=float)
    return 0.5 * np.sum(alpha * coenergy_pointwise(alpha, p), axis=0)
