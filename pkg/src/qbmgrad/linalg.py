"""Dense complex Hermitian linear algebra for small (dim <= 256) operators.

Everything here is pure and operates on plain ``numpy`` arrays; validation
helpers absorb floating-point asymmetry at construction and reject anything
worse.  Spectral decompositions carry their own reconstruction check so that
downstream matrix functions can trust them blindly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GuardError, SpecError

HERMITICITY_ATOL = 1e-12
EIGH_RESIDUAL_TOL = 1e-10
PSD_FLOOR = -1e-10
TRACE_ATOL = 1e-10
MAX_DIM = 256


def hermitize(a: np.ndarray) -> np.ndarray:
    """Average with the conjugate transpose (no validation)."""
    return (a + a.conj().T) / 2


def as_hermitian(a, *, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """Validate a square matrix as Hermitian and symmetrize away noise.

    Asymmetry up to ``atol`` (max-abs entrywise) is treated as float noise
    and removed by averaging; larger asymmetry is rejected so genuine bugs
    are not masked.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpecError(f"expected a square matrix, got shape {a.shape}")
    if not 1 <= a.shape[0] <= MAX_DIM:
        raise SpecError(f"dimension {a.shape[0]} outside supported range [1, {MAX_DIM}]")
    gap = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if gap >= atol:
        raise SpecError(f"matrix is not Hermitian: max asymmetry {gap:.3e} >= {atol:.0e}")
    return hermitize(a)


def as_density(a, *, psd_floor: float = PSD_FLOOR, trace_atol: float = TRACE_ATOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD within floor, unit trace."""
    rho = as_hermitian(a)
    w = np.linalg.eigvalsh(rho)
    if w[0] < psd_floor:
        raise SpecError(f"state not positive semidefinite: min eigenvalue {w[0]:.3e}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > trace_atol:
        raise SpecError(f"state trace {tr!r} differs from 1 by more than {trace_atol:.0e}")
    return rho


@dataclass(frozen=True)
class Eigensystem:
    """Spectral decomposition U diag(vals) U^dag with ascending eigenvalues."""

    vals: np.ndarray
    vecs: np.ndarray

    @property
    def dim(self) -> int:
        return self.vals.shape[0]

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Matrix function U diag(f(vals)) U^dag for a scalar function f."""
        with np.errstate(all="ignore"):
            fw = np.asarray(f(self.vals), dtype=float)
        if not np.all(np.isfinite(fw)):
            raise SpecError("matrix function undefined at an eigenvalue")
        return hermitize((self.vecs * fw) @ self.vecs.conj().T)

    def power(self, p: float) -> np.ndarray:
        return self.apply(lambda w: np.power(w, p))


def eigh(x, *, residual_tol: float = EIGH_RESIDUAL_TOL) -> Eigensystem:
    """Eigendecompose a Hermitian matrix, checking the reconstruction."""
    x = as_hermitian(x)
    w, v = np.linalg.eigh(x)
    resid = spectral_norm((v * w) @ v.conj().T - x)
    if resid > residual_tol * x.shape[0]:
        raise GuardError(f"eigendecomposition residual {resid:.3e} too large")
    return Eigensystem(w, v)


def matrix_function(es: Eigensystem, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """U diag(f(lambda)) U^dag; errors if f is undefined at an eigenvalue."""
    return es.apply(f)


def tensor(a, b) -> np.ndarray:
    """Kronecker product (first factor = leftmost register)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class BipartiteDims:
    """Visible x hidden register split of a joint operator."""

    d_v: int
    d_h: int

    def __post_init__(self):
        if self.d_v < 1 or self.d_h < 1:
            raise SpecError("subsystem dimensions must be positive")

    @property
    def total(self) -> int:
        return self.d_v * self.d_h

    def check(self, x: np.ndarray) -> None:
        if x.shape[0] != self.total:
            raise SpecError(
                f"operator dim {x.shape[0]} != d_v*d_h = {self.d_v}*{self.d_h}"
            )


def partial_trace(x, dims: BipartiteDims, keep: str) -> np.ndarray:
    """Trace out one subsystem of a (d_v*d_h)-dim operator."""
    x = np.asarray(x, dtype=complex)
    dims.check(x)
    t = x.reshape(dims.d_v, dims.d_h, dims.d_v, dims.d_h)
    if keep == "visible":
        return np.einsum("vhwh->vw", t)
    if keep == "hidden":
        return np.einsum("vhvk->hk", t)
    raise SpecError(f"keep must be 'visible' or 'hidden', got {keep!r}")


def expectation(obs, state, *, imag_atol: float = 1e-10) -> float:
    """Tr[obs @ state], checked to be real up to a small residue."""
    obs = np.asarray(obs, dtype=complex)
    state = np.asarray(state, dtype=complex)
    if obs.shape != state.shape:
        raise SpecError(f"shape mismatch {obs.shape} vs {state.shape}")
    val = complex(np.einsum("ij,ji->", obs, state))
    scale = max(1.0, abs(val))
    if abs(val.imag) > imag_atol * scale:
        raise GuardError(f"expectation has imaginary residue {val.imag:.3e}")
    return val.real


def spectral_norm(x) -> float:
    """Largest singular value (= max |eigenvalue| for Hermitian input)."""
    return float(np.linalg.norm(np.asarray(x), ord=2))


def trace_norm(x) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(x), compute_uv=False)))


def norms(x) -> tuple[float, float]:
    """(spectral, trace) norm pair."""
    s = np.linalg.svd(np.asarray(x), compute_uv=False)
    return float(s[0]) if s.size else 0.0, float(np.sum(s))
