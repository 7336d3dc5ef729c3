"""Finite-dimensional port-Hamiltonian systems in mass-scaled coordinates.

A system is stored through its block-diagonal mass matrix ``M``, the
skew-symmetric interconnection ``J``, the energy Gram matrix ``K`` and the
input map ``B``.  States are the mass-scaled energy coordinates
``x = M alpha``; the Hamiltonian is ``H(x) = 1/2 alpha^T K alpha`` and the
co-energy (effort) vector is its gradient ``e = M^-1 K M^-1 x``.  The
dynamics read::

    dx/dt = (J - G_R S G_R^T) e + B u + L s
    y     = B^T e

with an optional resistive port ``(G_R, S)`` and a distributed load column
``L`` scaled by the scalar signal ``s``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)


class AssemblyError(RuntimeError):
    """An assembled operator violates a structural invariant."""


class SolverError(RuntimeError):
    """A linear or eigenvalue solve failed; carries the observed residual."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class BlockLayout:
    names: tuple[str, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.sizes):
            raise ValueError("one size per block name is required")

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate([[0], np.cumsum(self.sizes)]))

    @property
    def size(self) -> int:
        return int(sum(self.sizes))

    def slice(self, name: str) -> slice:
        i = self.names.index(name)
        off = self.offsets
        return slice(off[i], off[i + 1])

    def split(self, x) -> dict[str, np.ndarray]:
        x = np.asarray(x)
        return {n: x[self.slice(n)] for n in self.names}


@dataclass(frozen=True)
class PhStateVector:
    """Concatenated tilde coordinates with their block map."""

    layout: BlockLayout
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != (self.layout.size,):
            raise ValueError(f"state has shape {data.shape}, layout expects ({self.layout.size},)")
        object.__setattr__(self, "data", data)

    def block(self, name: str) -> np.ndarray:
        return self.data[self.layout.slice(name)]


@dataclass
class EigenResult:
    omega: np.ndarray
    modes: np.ndarray
    n_zero: int = 0
    real_ratio: float = 0.0
    method: str = "reduced"

    @property
    def frequency_hz(self) -> np.ndarray:
        return self.omega / (2.0 * np.pi)


def _csr(A) -> sp.csr_matrix:
    return sp.csr_matrix(A, dtype=float)


def _is_diagonal(A: sp.spmatrix) -> bool:
    A = sp.coo_matrix(A)
    return bool(np.all(A.row == A.col))


@dataclass(frozen=True, eq=False, kw_only=True)
class PhSystem:
    M: sp.csr_matrix
    J: sp.csr_matrix
    K: sp.csr_matrix
    B: sp.csr_matrix
    layout: BlockLayout
    port_labels: tuple[str, ...] = ()
    G_R: Optional[sp.csr_matrix] = None
    S: Optional[sp.csr_matrix] = None
    load: Optional[np.ndarray] = None
    state_index: Optional[np.ndarray] = field(default=None, repr=False)
    full_size: Optional[int] = None

    def __post_init__(self):
        for name in ("M", "J", "K", "B"):
            object.__setattr__(self, name, _csr(getattr(self, name)))
        n = self.layout.size
        if self.M.shape != (n, n) or self.J.shape != (n, n) or self.K.shape != (n, n):
            raise ValueError(f"M, J, K must be {n}x{n}")
        if self.B.shape[0] != n:
            raise ValueError(f"B has {self.B.shape[0]} rows, expected {n}")
        if not self.port_labels:
            object.__setattr__(self, "port_labels", tuple(f"u{i}" for i in range(self.B.shape[1])))
        if len(self.port_labels) != self.B.shape[1]:
            raise ValueError("one port label per column of B is required")
        if (self.G_R is None) != (self.S is None):
            raise ValueError("a resistive port needs both G_R and S")
        if self.G_R is not None:
            object.__setattr__(self, "G_R", _csr(self.G_R))
            object.__setattr__(self, "S", _csr(self.S))
        if self.load is not None:
            load = np.asarray(self.load, dtype=float)
            if load.shape != (n,):
                raise ValueError(f"load column must have shape ({n},)")
            object.__setattr__(self, "load", load)
        if self.state_index is None:
            object.__setattr__(self, "state_index", np.arange(n))
        if self.full_size is None:
            object.__setattr__(self, "full_size", n)
        skew = abs(self.J + self.J.T)
        if skew.nnz and skew.max() != 0.0:
            raise AssemblyError(f"interconnection is not skew-symmetric (max |J+J^T| = {skew.max()})")

    # sizes -----------------------------------------------------------------
    @property
    def size(self) -> int:
        return self.layout.size

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def R(self) -> sp.csr_matrix:
        if self.G_R is None:
            return sp.csr_matrix((self.size, self.size))
        return _csr(self.G_R @ self.S @ self.G_R.T)

    @property
    def damped(self) -> bool:
        return self.G_R is not None and self.S.count_nonzero() > 0

    def state(self, x) -> PhStateVector:
        return PhStateVector(self.layout, x)

    # factorizations ----------------------------------------------------------
    @cached_property
    def _mass_lu(self):
        return spla.splu(sp.csc_matrix(self.M))

    def _solve_mass(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.size:
            raise ValueError(f"vector of length {b.shape[0]} does not match system size {self.size}")
        return self._mass_lu.solve(b)

    # energy ---------------------------------------------------------------------
    def energy_variables(self, x) -> np.ndarray:
        """``alpha = M^-1 x``."""
        return self._solve_mass(x)

    def tilde(self, alpha) -> np.ndarray:
        """``x = M alpha``."""
        return self.M @ np.asarray(alpha, dtype=float)

    def coenergy(self, x) -> np.ndarray:
        """Gradient of the discrete Hamiltonian, ``M^-1 K M^-1 x``."""
        return self._solve_mass(self.K @ self._solve_mass(x))

    def hamiltonian(self, x) -> float:
        alpha = self._solve_mass(x)
        return 0.5 * float(alpha @ (self.K @ alpha))

    def hamiltonian_alpha(self, alpha) -> float:
        alpha = np.asarray(alpha, dtype=float)
        return 0.5 * float(alpha @ (self.K @ alpha))

    # ports --------------------------------------------------------------------
    def _inputs(self, u) -> np.ndarray:
        if u is None:
            return np.zeros(self.n_inputs)
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape != (self.n_inputs,):
            raise ValueError(f"input has {u.size} entries, system has {self.n_inputs} ports")
        return u

    def output(self, e) -> np.ndarray:
        return self.B.T @ e

    def load_output(self, e) -> float:
        return 0.0 if self.load is None else float(self.load @ e)

    def dissipation(self, e) -> float:
        """Dissipated power ``e^T R e`` (non-negative)."""
        if self.G_R is None:
            return 0.0
        z = self.G_R.T @ e
        return float(z @ (self.S @ z))

    def dynamics(self, x, u=None, load_scale: float = 1.0):
        """Return ``(dx/dt, y)`` at state ``x`` and boundary input ``u``."""
        u = self._inputs(u)
        e = self.coenergy(x)
        xdot = self.J @ e - self.R @ e + self.B @ u
        if self.load is not None:
            xdot = xdot + load_scale * self.load
        return xdot, self.output(e)

    def power_balance_residual(self, x, u=None, load_scale: float = 1.0) -> float:
        """``dH/dt - (y^T u + y_d s - e^T R e)``; zero up to round-off."""
        u = self._inputs(u)
        e = self.coenergy(x)
        xdot, y = self.dynamics(x, u, load_scale)
        supplied = float(y @ u) + load_scale * self.load_output(e) - self.dissipation(e)
        return float(xdot @ e) - supplied

    # construction helpers -----------------------------------------------------------
    def with_damping(self, G_R, S) -> "PhSystem":
        G_R = _csr(G_R)
        S = _csr(S)
        if G_R.shape[0] != self.size or S.shape != (G_R.shape[1], G_R.shape[1]):
            raise ValueError("resistive port shapes do not match the system")
        asym = abs(S - S.T)
        if asym.nnz and asym.max() > 0.0:
            raise ValueError("S must be symmetric")
        return replace(self, G_R=G_R, S=S)

    def with_load(self, column) -> "PhSystem":
        return replace(self, load=np.asarray(column, dtype=float))

    def restrict(self, keep: Sequence[int], drop_zero_ports: bool = True) -> "PhSystem":
        """Eliminate every state dof not in ``keep`` (homogeneous essential conditions)."""
        keep = np.unique(np.asarray(keep, dtype=int))
        if keep.size and (keep[0] < 0 or keep[-1] >= self.size):
            raise IndexError("kept dof out of range")
        off = self.layout.offsets
        sizes = tuple(int(np.count_nonzero((keep >= off[i]) & (keep < off[i + 1])))
                      for i in range(len(self.layout.names)))
        sub = lambda A: A[keep][:, keep]  # noqa: E731
        B = self.B[keep]
        labels = self.port_labels
        if drop_zero_ports and B.shape[1]:
            live = np.flatnonzero(np.asarray(abs(B).sum(axis=0)).ravel() > 0)
            B = B[:, live]
            labels = tuple(labels[i] for i in live)
        G_R = None if self.G_R is None else self.G_R[keep]
        load = None if self.load is None else self.load[keep]
        return replace(self, M=sub(self.M), J=sub(self.J), K=sub(self.K), B=B,
                       layout=BlockLayout(self.layout.names, sizes), port_labels=labels,
                       G_R=G_R, load=load, state_index=self.state_index[keep])

    def expand(self, v, fill: float = 0.0) -> np.ndarray:
        """Scatter a reduced vector back to the unreduced state numbering."""
        out = np.full(self.full_size, fill, dtype=float)
        out[self.state_index] = v
        return out

    # structure queries -----------------------------------------------------------------
    @cached_property
    def separable(self) -> bool:
        """True when the first block only couples to the others through ``J``."""
        n1 = self.layout.sizes[0]
        def zero(A):
            return A.nnz == 0 or abs(A).max() == 0.0
        J, M, K = self.J, self.M, self.K
        return (len(self.layout.sizes) > 1 and zero(J[:n1, :n1]) and zero(J[n1:, n1:])
                and zero(M[:n1, n1:]) and zero(K[:n1, n1:]))

    def partition(self):
        """``(G, M1, K1, M2, K2)`` with ``J = [[0, -G^T], [G, 0]]``."""
        if not self.separable:
            raise ValueError("system is not separable into velocity and curvature blocks")
        n1 = self.layout.sizes[0]
        return (self.J[n1:, :n1], self.M[:n1, :n1], self.K[:n1, :n1],
                self.M[n1:, n1:], self.K[n1:, n1:])

    def reduced_stiffness(self) -> np.ndarray:
        """Stiffness ``G^T M2^-1 K2 M2^-1 G`` acting on velocity-block efforts."""
        G, _, _, M2, K2 = self.partition()
        if _is_diagonal(M2):
            d = 1.0 / M2.diagonal()
            Y = sp.diags(d) @ G
            return np.asarray((Y.T @ K2 @ Y).toarray())
        lu = spla.splu(sp.csc_matrix(M2))
        Y = lu.solve(G.toarray())
        return Y.T @ (K2 @ Y)

    def reduced_mass(self) -> np.ndarray:
        """``M1 K1^-1 M1``, the inverse of the velocity-block effort map."""
        _, M1, K1, _, _ = self.partition()
        lu = spla.splu(sp.csc_matrix(K1))
        return M1.T @ lu.solve(M1.toarray())

    # spectral analysis -----------------------------------------------------------------
    def eigenmodes(self, n_modes: Optional[int] = None, fixed: Optional[Sequence[int]] = None,
                   method: str = "auto", zero_tol: Optional[float] = None) -> EigenResult:
        """Angular frequencies (ascending, zero modes dropped) and mode shapes.

        ``fixed`` lists extra state dofs to eliminate before the analysis.
        The ``reduced`` method solves the symmetric pencil on the velocity
        block of a separable undamped system and returns effort mode shapes
        there.  The ``dense`` method computes the full spectrum of
        ``(J - R) M^-1 K M^-1`` and returns complex state eigenvectors.
        ``zero_tol`` is relative to the largest eigenvalue (``omega^2`` for
        the reduced method, ``|lambda|`` for the dense one); it defaults to
        1e-13 and 1e-6 respectively since rigid modes are defective in the
        first-order form.
        """
        sys_ = self
        if fixed is not None and len(fixed):
            sys_ = self.restrict(np.setdiff1d(np.arange(self.size), fixed), drop_zero_ports=False)
        if method == "auto":
            method = "reduced" if sys_.separable and not sys_.damped else "dense"
        if method == "reduced":
            if sys_.damped:
                raise ValueError("reduced eigenanalysis requires an undamped system")
            Keff = sys_.reduced_stiffness()
            Meff = sys_.reduced_mass()
            Keff = 0.5 * (Keff + Keff.T)
            Meff = 0.5 * (Meff + Meff.T)
            try:
                w2, V = la.eigh(Keff, Meff)
            except la.LinAlgError as exc:
                raise SolverError(f"generalized eigenproblem failed: {exc}") from exc
            res = np.linalg.norm(Keff @ V - Meff @ V * w2) / max(np.linalg.norm(Keff), 1e-300)
            if res > 1e-6:
                raise SolverError("eigen solve residual too large", res)
            scale = max(abs(w2).max(), 1e-300)
            zero_tol = 1e-13 if zero_tol is None else zero_tol
            nonzero = w2 > zero_tol * scale
            omega = np.sqrt(w2[nonzero])
            modes = V[:, nonzero]
            result = EigenResult(omega, modes, int(np.count_nonzero(~nonzero)), 0.0, "reduced")
        elif method == "dense":
            Q = sys_._solve_mass(sys_._solve_mass(sys_.K.toarray()).T)
            Q = 0.5 * (Q + Q.T)
            A = (sys_.J - sys_.R).toarray() @ Q
            lam, V = la.eig(A)
            scale = max(abs(lam).max(), 1e-300)
            zero_tol = 1e-6 if zero_tol is None else zero_tol
            zero = abs(lam) <= zero_tol * scale
            keep = (~zero) & (lam.imag > 0)
            order = np.argsort(lam.imag[keep])
            lam_k = lam[keep][order]
            im_max = abs(lam.imag).max() if np.any(~zero) else 1.0
            ratio = float(abs(lam.real).max() / im_max) if im_max > 0 else float("inf")
            result = EigenResult(lam_k.imag.copy(), V[:, keep][:, order],
                                 int(np.count_nonzero(zero)), ratio, "dense")
            result.eigenvalues = lam_k
        else:
            raise ValueError(f"unknown eigen method {method!r}")
        if n_modes is not None:
            result.omega = result.omega[:n_modes]
            result.modes = result.modes[:, :n_modes]
        return result

    def mode_state(self, mode: np.ndarray) -> np.ndarray:
        """Initial state whose velocity-block effort equals ``mode`` and whose
        remaining blocks are empty (reduced-method mode shapes only)."""
        _, M1, K1, _, _ = self.partition()
        x = np.zeros(self.size)
        x[: self.layout.sizes[0]] = M1 @ spla.spsolve(sp.csc_matrix(K1), M1 @ mode)
        return x
