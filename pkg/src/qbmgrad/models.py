"""Parameterized Hamiltonians and their thermal models.

A model Hamiltonian is a linear combination G(theta) = sum_j theta_j G_j of
fixed Hermitian terms on a visible (x) hidden register pair.  Thermalizing
produces the Gibbs state e^{-G}/Z, its visible marginal, cached spectra, and
the conditioning number kappa = 1/lambda_min(sigma_v) that controls every
downstream amplification.  Block decompositions cover the two commuting
special cases (classical hidden or classical visible register).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ScaleError, SpecError, StructureError
from .linalg import (
    BipartiteDims,
    Eigensystem,
    as_hermitian,
    eigh,
    hermitize,
    partial_trace,
    spectral_norm,
    tensor,
)

EXP_NORM_GUARD = 700.0
BLOCK_ATOL = 1e-10


@dataclass(frozen=True)
class ParamHamiltonian:
    """Terms G_j on the joint register plus the current parameter vector."""

    dims: BipartiteDims
    terms: tuple[np.ndarray, ...]
    theta: np.ndarray

    def __post_init__(self):
        if len(self.terms) < 1:
            raise SpecError("need at least one Hamiltonian term")
        object.__setattr__(
            self, "terms", tuple(as_hermitian(t) for t in self.terms)
        )
        for t in self.terms:
            self.dims.check(t)
        theta = np.asarray(self.theta, dtype=float)
        if theta.shape != (len(self.terms),):
            raise SpecError(
                f"theta length {theta.shape} != number of terms {len(self.terms)}"
            )
        object.__setattr__(self, "theta", theta)

    @property
    def n_params(self) -> int:
        return len(self.terms)

    def assemble(self, theta=None) -> np.ndarray:
        th = self.theta if theta is None else np.asarray(theta, dtype=float)
        g = np.zeros((self.dims.total, self.dims.total), dtype=complex)
        for c, t in zip(th, self.terms):
            g += c * t
        return hermitize(g)

    def with_theta(self, theta) -> "ParamHamiltonian":
        return replace(self, theta=np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class ThermalModel:
    """Gibbs data of one parameter point, with cached spectra."""

    hamiltonian: ParamHamiltonian
    G: np.ndarray
    Z: float
    sigma_vh: np.ndarray
    sigma_v: np.ndarray
    g_eig: Eigensystem
    sigma_vh_eig: Eigensystem
    sigma_v_eig: Eigensystem
    kappa: float

    @property
    def dims(self) -> BipartiteDims:
        return self.hamiltonian.dims


def thermalize(h: ParamHamiltonian) -> ThermalModel:
    """Build the thermal model e^{-G(theta)}/Z with all cached fields."""
    g = h.assemble()
    norm = spectral_norm(g)
    if norm > EXP_NORM_GUARD:
        raise ScaleError(f"|G| = {norm:.1f} exceeds the exponent guard {EXP_NORM_GUARD}")
    g_eig = eigh(g)
    shifted = g_eig.vals - np.min(g_eig.vals)
    boltz = np.exp(-shifted)
    z_shifted = float(np.sum(boltz))
    z = z_shifted * float(np.exp(-np.min(g_eig.vals)))
    weights = boltz / z_shifted
    sigma_vh = hermitize((g_eig.vecs * weights) @ g_eig.vecs.conj().T)
    sigma_v = hermitize(partial_trace(sigma_vh, h.dims, keep="visible"))
    order = np.argsort(weights)
    sigma_vh_eig = Eigensystem(weights[order], g_eig.vecs[:, order])
    sigma_v_eig = eigh(sigma_v)
    lam_min = float(sigma_v_eig.vals[0])
    if lam_min <= 0.0:
        raise ScaleError("visible marginal lost strict positivity")
    return ThermalModel(
        hamiltonian=h,
        G=g,
        Z=z,
        sigma_vh=sigma_vh,
        sigma_v=sigma_v,
        g_eig=g_eig,
        sigma_vh_eig=sigma_vh_eig,
        sigma_v_eig=sigma_v_eig,
        kappa=1.0 / lam_min,
    )


@dataclass(frozen=True)
class RestrictedSpec:
    """Bias/bias/coupling parameterization (a, b, w) over operator lists.

    G(theta) = sum_i a_i V_i (x) I + I (x) sum_j b_j H_j
               + sum_ij w_ij V_i (x) H_j,
    with theta packed in the order (a, b, row-major w).
    """

    a: np.ndarray
    b: np.ndarray
    w: np.ndarray
    V: tuple[np.ndarray, ...]
    H: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "V", tuple(as_hermitian(v) for v in self.V))
        object.__setattr__(self, "H", tuple(as_hermitian(x) for x in self.H))
        m, n = len(self.V), len(self.H)
        if m < 1 or n < 1:
            raise SpecError("need at least one visible and one hidden operator")
        if self.a.shape != (m,) or self.b.shape != (n,) or self.w.shape != (m, n):
            raise SpecError("restricted parameter shapes inconsistent with V/H lists")
        dv = {v.shape[0] for v in self.V}
        dh = {x.shape[0] for x in self.H}
        if len(dv) != 1 or len(dh) != 1:
            raise SpecError("operator lists mix dimensions")

    @property
    def dims(self) -> BipartiteDims:
        return BipartiteDims(self.V[0].shape[0], self.H[0].shape[0])

    def pack_theta(self) -> np.ndarray:
        return np.concatenate([self.a, self.b, self.w.ravel()])

    def unpack(self, vec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        vec = np.asarray(vec, dtype=float)
        m, n = len(self.V), len(self.H)
        if vec.shape != (m + n + m * n,):
            raise SpecError("packed vector has wrong length")
        return vec[:m], vec[m : m + n], vec[m + n :].reshape(m, n)


def restricted_to_param(spec: RestrictedSpec) -> ParamHamiltonian:
    """Expand an (a, b, w) spec into generic terms with packed theta."""
    dims = spec.dims
    iv = np.eye(dims.d_v)
    ih = np.eye(dims.d_h)
    terms = [tensor(v, ih) for v in spec.V]
    terms += [tensor(iv, x) for x in spec.H]
    terms += [tensor(v, x) for v in spec.V for x in spec.H]
    return ParamHamiltonian(dims=dims, terms=tuple(terms), theta=spec.pack_theta())


def _validate_unitary(u: np.ndarray, d: int, what: str) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise SpecError(f"{what} must be {d}x{d}, got {u.shape}")
    if spectral_norm(u.conj().T @ u - np.eye(d)) > 1e-10:
        raise SpecError(f"{what} is not unitary within 1e-10")
    return u


def _blocks(term: np.ndarray, dims: BipartiteDims, classical: str) -> list[np.ndarray]:
    """Diagonal blocks of a term over the classical register's basis states."""
    t = term.reshape(dims.d_v, dims.d_h, dims.d_v, dims.d_h)
    scale = max(1.0, float(np.max(np.abs(term))))
    if classical == "hidden":
        n, mat = dims.d_h, (lambda x, y: t[:, x, :, y])
    else:
        n, mat = dims.d_v, (lambda x, y: t[x, :, y, :])
    off = max(
        (float(np.max(np.abs(mat(x, y)))) for x in range(n) for y in range(n) if x != y),
        default=0.0,
    )
    if off > BLOCK_ATOL * scale:
        raise StructureError(
            f"term is not block-diagonal over the declared {classical} basis "
            f"(off-block magnitude {off:.3e})"
        )
    return [as_hermitian(mat(x, x)) for x in range(n)]


def _thermal_blocks(block_hams: list[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    """(p_x, sigma_x) for a list of per-label Hamiltonians.

    Each state uses its own eigenvalue shift; the weights p_x come from the
    per-block log partition functions, so nothing underflows even when the
    blocks sit at very different energies.
    """
    log_zs, states = [], []
    for g in block_hams:
        es = eigh(g)
        lo = float(es.vals[0])
        boltz = np.exp(-(es.vals - lo))
        zx = float(np.sum(boltz))
        states.append(hermitize((es.vecs * (boltz / zx)) @ es.vecs.conj().T))
        log_zs.append(np.log(zx) - lo)
    log_zs = np.asarray(log_zs)
    p = np.exp(log_zs - np.max(log_zs))
    return p / p.sum(), states


@dataclass(frozen=True)
class QCModel:
    """Quantum visible, classical hidden: G_j = sum_x G_v^{j,x} (x) |x><x|."""

    dims: BipartiteDims
    hidden_basis: np.ndarray
    terms_x: tuple[tuple[np.ndarray, ...], ...]  # [j][x] -> d_v x d_v
    theta: np.ndarray
    p: np.ndarray = field(init=False)
    sigma_x: tuple[np.ndarray, ...] = field(init=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        p, states = _thermal_blocks([self.block_ham(x) for x in range(self.dims.d_h)])
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "sigma_x", tuple(states))

    @property
    def n_params(self) -> int:
        return len(self.terms_x)

    def block_ham(self, x: int, theta=None) -> np.ndarray:
        th = self.theta if theta is None else theta
        g = np.zeros((self.dims.d_v, self.dims.d_v), dtype=complex)
        for c, tj in zip(th, self.terms_x):
            g += c * tj[x]
        return hermitize(g)

    def visible_state(self) -> np.ndarray:
        out = np.zeros((self.dims.d_v, self.dims.d_v), dtype=complex)
        for px, sx in zip(self.p, self.sigma_x):
            out += px * sx
        return hermitize(out)

    def with_theta(self, theta) -> "QCModel":
        return replace(self, theta=np.asarray(theta, dtype=float))

    def assemble_state(self) -> np.ndarray:
        """sum_x p_x sigma_x (x) |x><x| back on the joint register."""
        w = self.hidden_basis
        out = np.zeros((self.dims.total, self.dims.total), dtype=complex)
        for x in range(self.dims.d_h):
            proj = np.outer(w[:, x], w[:, x].conj())
            out += self.p[x] * tensor(self.sigma_x[x], proj)
        return hermitize(out)


@dataclass(frozen=True)
class CQModel:
    """Classical visible, quantum hidden: G_j = sum_x |x><x| (x) G_h^{j,x}."""

    dims: BipartiteDims
    visible_basis: np.ndarray
    terms_x: tuple[tuple[np.ndarray, ...], ...]  # [j][x] -> d_h x d_h
    theta: np.ndarray
    p: np.ndarray = field(init=False)
    sigma_x: tuple[np.ndarray, ...] = field(init=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        p, states = _thermal_blocks([self.block_ham(x) for x in range(self.dims.d_v)])
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "sigma_x", tuple(states))

    @property
    def n_params(self) -> int:
        return len(self.terms_x)

    def block_ham(self, x: int, theta=None) -> np.ndarray:
        th = self.theta if theta is None else theta
        g = np.zeros((self.dims.d_h, self.dims.d_h), dtype=complex)
        for c, tj in zip(th, self.terms_x):
            g += c * tj[x]
        return hermitize(g)

    def with_theta(self, theta) -> "CQModel":
        return replace(self, theta=np.asarray(theta, dtype=float))


def qc_decompose(h: ParamHamiltonian, hidden_basis=None) -> QCModel:
    """Split every term over a declared classical hidden basis.

    The basis is validated, never searched for: each rotated term must be
    block-diagonal over the basis projectors or a StructureError is raised.
    """
    dims = h.dims
    w = (
        np.eye(dims.d_h, dtype=complex)
        if hidden_basis is None
        else _validate_unitary(hidden_basis, dims.d_h, "hidden basis")
    )
    rot = tensor(np.eye(dims.d_v), w)
    terms_x = tuple(
        tuple(_blocks(hermitize(rot.conj().T @ t @ rot), dims, "hidden"))
        for t in h.terms
    )
    return QCModel(dims=dims, hidden_basis=w, terms_x=terms_x, theta=h.theta)


def cq_decompose(h: ParamHamiltonian, visible_basis=None) -> CQModel:
    """Mirror of qc_decompose with the classical register on the visible side."""
    dims = h.dims
    w = (
        np.eye(dims.d_v, dtype=complex)
        if visible_basis is None
        else _validate_unitary(visible_basis, dims.d_v, "visible basis")
    )
    rot = tensor(w, np.eye(dims.d_h))
    terms_x = tuple(
        tuple(_blocks(hermitize(rot.conj().T @ t @ rot), dims, "visible"))
        for t in h.terms
    )
    return CQModel(dims=dims, visible_basis=w, terms_x=terms_x, theta=h.theta)
