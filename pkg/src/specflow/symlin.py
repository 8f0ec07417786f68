"""Dense symmetric linear algebra: eigendecomposition, inertia, kernel bases,
and relative Morse indices.

Everything in this module is pure: inputs are never mutated, stored arrays are
read-only, and results are deterministic for fixed inputs, so callers may
evaluate over collections in parallel and merge results in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "REL_ZERO_TOL",
    "RANK_TOL",
    "EigenSolverError",
    "SymMatrix",
    "EigenDecomposition",
    "Inertia",
    "as_sym",
    "default_zero_tol",
    "eigensym",
    "inertia",
    "kernel_basis",
    "rel_morse",
]

#: Relative eigenvalue tolerance used whenever no explicit zero_tol is given.
REL_ZERO_TOL = 1e-8

#: Rank tolerance for spectral-subspace intersections in :func:`rel_morse`.
RANK_TOL = 1e-8

_RECON_TOL = 1e-10
_ORTH_TOL = 1e-10


class EigenSolverError(RuntimeError):
    """The symmetric eigensolver failed to converge or produced bad factors."""


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """A dense real symmetric matrix.

    The constructor symmetrizes its input via ``(S + S.T) / 2``, so ``entries``
    is exactly symmetric afterwards; non-finite or non-square input is
    rejected.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.entries, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {s.shape}")
        if s.shape[0] == 0:
            raise ValueError("matrix must have positive dimension")
        if not np.all(np.isfinite(s)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", _readonly((s + s.T) / 2.0))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def norm_fro(self) -> float:
        return float(np.linalg.norm(self.entries))

    def shifted(self, delta: float) -> "SymMatrix":
        """Return ``S + delta * Id``."""
        return SymMatrix(self.entries + delta * np.eye(self.dim))


def as_sym(value) -> SymMatrix:
    """Coerce an array-like (or pass through a SymMatrix) to a SymMatrix."""
    if isinstance(value, SymMatrix):
        return value
    return SymMatrix(np.asarray(value, dtype=float))


def default_zero_tol(S) -> float:
    """Scale-relative kernel tolerance: ``1e-8 * max(1, ||S||_F / sqrt(dim))``."""
    S = as_sym(S)
    return REL_ZERO_TOL * max(1.0, S.norm_fro() / math.sqrt(S.dim))


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Spectral factors of a symmetric matrix.

    ``eigenvalues`` is sorted ascending and ``eigenvectors`` holds the matching
    orthonormal columns, with ``S = V diag(w) V.T`` up to the reconstruction
    tolerance enforced by :func:`eigensym`.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v, w = self.eigenvectors, self.eigenvalues
        return (v * w) @ v.T


@dataclass(frozen=True)
class Inertia:
    """Eigenvalue counts below, inside, and above the band ``[-zero_tol, zero_tol]``."""

    neg: int
    zero: int
    pos: int
    zero_tol: float

    @property
    def dim(self) -> int:
        return self.neg + self.zero + self.pos

    @property
    def morse_index(self) -> int:
        return self.neg

    @property
    def signature(self) -> int:
        return self.pos - self.neg

    @property
    def kernel_dim(self) -> int:
        return self.zero


def _eigvalsh(entries: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(entries)
    except np.linalg.LinAlgError as err:
        off = float(np.linalg.norm(entries - np.diag(np.diag(entries))))
        raise EigenSolverError(
            f"symmetric eigensolver did not converge "
            f"(off-diagonal residual {off:.3e})"
        ) from err


def eigensym(S) -> EigenDecomposition:
    """Full spectral decomposition of a symmetric matrix.

    Raises :class:`EigenSolverError` when the solver fails to converge or the
    factors violate the reconstruction / orthonormality tolerances.
    """
    S = as_sym(S)
    try:
        w, v = np.linalg.eigh(S.entries)
    except np.linalg.LinAlgError as err:
        off = float(np.linalg.norm(S.entries - np.diag(np.diag(S.entries))))
        raise EigenSolverError(
            f"symmetric eigensolver did not converge "
            f"(off-diagonal residual {off:.3e})"
        ) from err
    scale = max(1.0, S.norm_fro())
    resid = float(np.linalg.norm(S.entries - (v * w) @ v.T))
    orth = float(np.linalg.norm(v.T @ v - np.eye(S.dim)))
    if resid > _RECON_TOL * scale or orth > _ORTH_TOL * S.dim:
        raise EigenSolverError(
            f"eigendecomposition failed validation: reconstruction residual "
            f"{resid:.3e}, orthonormality defect {orth:.3e}"
        )
    return EigenDecomposition(_readonly(w), _readonly(v))


def inertia(S, zero_tol: float | None = None) -> Inertia:
    """Count eigenvalues of ``S`` below ``-zero_tol``, within the tolerance
    band, and above ``+zero_tol``.

    ``zero_tol=None`` selects the scale-relative default.
    """
    S = as_sym(S)
    if zero_tol is None:
        zero_tol = default_zero_tol(S)
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    w = _eigvalsh(S.entries)
    neg = int(np.sum(w < -zero_tol))
    pos = int(np.sum(w > zero_tol))
    return Inertia(neg=neg, zero=S.dim - neg - pos, pos=pos, zero_tol=zero_tol)


def kernel_basis(S, zero_tol: float | None = None) -> np.ndarray:
    """Orthonormal eigenvectors for eigenvalues with ``|w| <= zero_tol``.

    Returns a ``dim x k`` read-only array; ``k`` equals ``inertia(S).zero``.
    """
    S = as_sym(S)
    if zero_tol is None:
        zero_tol = default_zero_tol(S)
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    dec = eigensym(S)
    keep = np.abs(dec.eigenvalues) <= zero_tol
    return _readonly(dec.eigenvectors[:, keep])


def _intersection_dim(bu: np.ndarray, bv: np.ndarray) -> int:
    # dim(U ∩ V) = dim U - rank((Id - P_V) restricted to U), with orthonormal
    # bases bu, bv of U, V.
    if bu.shape[1] == 0 or bv.shape[1] == 0:
        return 0
    resid = bu - bv @ (bv.T @ bu)
    sv = np.linalg.svd(resid, compute_uv=False)
    return bu.shape[1] - int(np.sum(sv > RANK_TOL))


def rel_morse(S, T, kernel_side: str = "positive") -> int:
    """Relative Morse index dim(E-(S) ∩ E+(T)) - dim(E-(T) ∩ E+(S)).

    ``kernel_side`` chooses where eigenvalues inside the tolerance band land:
    ``"negative"`` puts them in E- (spectrum in (-inf, 0]), ``"positive"`` puts
    them in E+ (the convention matching the positive shift used by the
    extended spectral flow). Computed from spectral projectors with rank
    tolerance :data:`RANK_TOL`, not from Morse-index differences, so the
    finite-dimensional identity against the latter is a genuine cross-check.
    """
    S = as_sym(S)
    T = as_sym(T)
    if S.dim != T.dim:
        raise ValueError(f"dimension mismatch: {S.dim} vs {T.dim}")
    if kernel_side not in ("negative", "positive"):
        raise ValueError("kernel_side must be 'negative' or 'positive'")
    dec_s = eigensym(S)
    dec_t = eigensym(T)
    tol_s = default_zero_tol(S)
    tol_t = default_zero_tol(T)
    if kernel_side == "negative":
        in_neg_s = dec_s.eigenvalues <= tol_s
        in_neg_t = dec_t.eigenvalues <= tol_t
    else:
        in_neg_s = dec_s.eigenvalues < -tol_s
        in_neg_t = dec_t.eigenvalues < -tol_t
    em_s = dec_s.eigenvectors[:, in_neg_s]
    ep_s = dec_s.eigenvectors[:, ~in_neg_s]
    em_t = dec_t.eigenvectors[:, in_neg_t]
    ep_t = dec_t.eigenvectors[:, ~in_neg_t]
    return _intersection_dim(em_s, ep_t) - _intersection_dim(em_t, ep_s)
