"""Shot-based estimation of the gradient's target term, at desk scale.

The estimation circuit acts on registers (c, a, v1, v2, h): a control qubit,
the ancilla of an inverse-square-root block-encoding, two copies of the
visible register and the hidden register.  Per shot, a modular time s and an
evolution time t are drawn from the logistic and high-peak-tent densities,
the target state is conjugated by sigma_v^{-is/2} and the block-encoding of
sigma_v^{-1/2}, and a controlled swap against a fresh thermal state followed
by a joint (X_c, observable) measurement yields Y = (-1)^z g.  The mean of
kappa * Y over Hoeffding-many shots estimates the lifted-state term.

Block-encodings here are exact unitary dilations (normalization alpha,
declared spectral error delta); the error-composition and sample-count
accounting still covers the inexact case and is exercised by injecting
controlled perturbations.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .densities import (
    HIGH_PEAK_TENT,
    LOGISTIC,
    SeededSampler,
    expectation_nodes,
    pdf,
    quantile,
)
from .errors import ScaleError, SpecError
from .linalg import as_density, as_hermitian, eigh, hermitize, partial_trace, spectral_norm, tensor
from .models import ThermalModel

MAX_CIRCUIT_DIM = 256
PROB_CLAMP = -1e-10
PROB_DEFECT = 1e-8


@dataclass(frozen=True)
class BlockEncoding:
    """Unitary whose top-left block is target/alpha up to spectral error delta."""

    unitary: np.ndarray
    alpha: float
    ancillas: int
    delta: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        d = u.shape[0]
        if spectral_norm(u.conj().T @ u - np.eye(d)) > 1e-10:
            raise SpecError("block-encoding matrix is not unitary within 1e-10")
        object.__setattr__(self, "unitary", u)

    @property
    def meta(self) -> "BEMeta":
        return BEMeta(self.alpha, self.ancillas, self.delta)

    def extract(self) -> np.ndarray:
        """alpha * (<0| (x) I) U (|0> (x) I): the encoded matrix."""
        d = self.unitary.shape[0] >> self.ancillas
        return self.alpha * self.unitary[:d, :d]


@dataclass(frozen=True)
class BEMeta:
    """(normalization, ancilla count, spectral error) of a block-encoding."""

    alpha: float
    ancillas: int
    delta: float


def be_product(a: BEMeta, b: BEMeta) -> BEMeta:
    """Composition metadata for a product of block-encoded matrices.

    Encoding A with (alpha, delta) times encoding B with (beta, eps) yields
    AB with normalization alpha*beta and error alpha*eps + beta*delta +
    delta*eps (the cross term is required; dropping it undercounts).
    """
    return BEMeta(
        a.alpha * b.alpha,
        a.ancillas + b.ancillas,
        a.alpha * b.delta + b.alpha * a.delta + a.delta * b.delta,
    )


def dilate(contraction, alpha: float) -> BlockEncoding:
    """Exact one-ancilla unitary dilation of a contraction C.

    U = [[C, (I - C C^dag)^{1/2}], [(I - C^dag C)^{1/2}, -C^dag]] with the
    ancilla as the leading register, so (<0| (x) I) U (|0> (x) I) = C.
    Built through the SVD so each cosine/sine pair comes from one singular
    value; unitarity then survives C touching the boundary |C| = 1.
    """
    c = np.asarray(contraction, dtype=complex)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise SpecError("contraction must be square")
    u_l, sing, v_h = np.linalg.svd(c)
    if sing[0] > 1.0 + 1e-10:
        raise SpecError(f"contraction norm {sing[0]:.6f} exceeds 1")
    cos = np.minimum(sing, 1.0)
    sin = np.sqrt(np.maximum(1.0 - cos * cos, 0.0))
    middle = np.block(
        [[np.diag(cos), np.diag(sin)], [np.diag(sin), -np.diag(cos)]]
    ).astype(complex)
    d = c.shape[0]
    left = np.zeros((2 * d, 2 * d), dtype=complex)
    left[:d, :d] = u_l
    left[d:, d:] = v_h.conj().T
    right = np.zeros((2 * d, 2 * d), dtype=complex)
    right[:d, :d] = v_h
    right[d:, d:] = u_l.conj().T
    u = left @ middle @ right
    return BlockEncoding(u, float(alpha), 1, 0.0)


def modular_unitary(model: ThermalModel, s: float) -> BlockEncoding:
    """Exact encoding of the modular-flow unitary sigma_v^{-is/2} (no ancilla)."""
    es = model.sigma_v_eig
    if float(es.vals[0]) <= 0.0:
        raise SpecError("visible marginal must be strictly positive")
    phases = np.exp(-0.5j * s * np.log(es.vals))
    u = (es.vecs * phases) @ es.vecs.conj().T
    return BlockEncoding(u, 1.0, 0, 0.0)


def inv_sqrt_encoding(model: ThermalModel) -> BlockEncoding:
    """Exact (sqrt(kappa), 0)-block-encoding of sigma_v^{-1/2}."""
    if not np.isfinite(model.kappa):
        raise SpecError("kappa must be finite")
    root_kappa = math.sqrt(model.kappa)
    contraction = model.sigma_v_eig.power(-0.5) / root_kappa
    return dilate(contraction, root_kappa)


@dataclass(frozen=True)
class ShotRecord:
    """One circuit execution: times, outcomes, and the signed value Y."""

    s: float
    t: float
    z: int
    g: float
    y: float


@dataclass(frozen=True)
class EstimatorConfig:
    """Error target, failure probability, optional fixed shot count, seed."""

    epsilon: float = 0.05
    delta_fail: float = 0.05
    shots: int = 0  # 0 = auto from the Hoeffding bound
    seed: int = 0
    chunk: int = 8192
    threads: int = 1

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise SpecError("epsilon must be positive")
        if not 0.0 < self.delta_fail < 1.0:
            raise SpecError("delta_fail must lie in (0, 1)")
        if self.shots < 0 or self.chunk < 1 or self.threads < 1:
            raise SpecError("shots, chunk and threads must be nonnegative/positive")


def hoeffding_shots(kappa: float, g_norm: float, epsilon: float, delta_fail: float) -> int:
    """Two-sided Hoeffding count for range 2*kappa*g_norm samples:
    ceil(2 (kappa g / eps)^2 ln(2/delta))."""
    if min(kappa, g_norm, epsilon) <= 0.0 or not 0.0 < delta_fail < 1.0:
        raise SpecError("hoeffding_shots needs positive inputs and delta in (0,1)")
    return int(math.ceil(2.0 * (kappa * g_norm / epsilon) ** 2 * math.log(2.0 / delta_fail)))


# ---------------------------------------------------------------------------
# honest full-register circuit
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _swap_perm(d_v: int, d_h: int) -> np.ndarray:
    """Index permutation of the controlled swap on (c, a, v1, v2, h)."""
    dim = 2 * 2 * d_v * d_v * d_h
    idx = np.arange(dim).reshape(2, 2, d_v, d_v, d_h)
    perm = idx.copy()
    perm[1] = idx[1].transpose(0, 2, 1, 3)
    return perm.reshape(-1)


def _circuit_pieces(model: ThermalModel, rho, s: float, t: float, g_j, modular, inv_sqrt):
    d_v, d_h = model.dims.d_v, model.dims.d_h
    dim = 2 * 2 * d_v * d_v * d_h
    if dim > MAX_CIRCUIT_DIM:
        raise ScaleError(f"circuit register dim {dim} exceeds {MAX_CIRCUIT_DIM}")
    mod = modular if modular is not None else modular_unitary(model, s)
    inv = inv_sqrt if inv_sqrt is not None else inv_sqrt_encoding(model)
    if mod.ancillas != 0 or inv.ancillas != 1:
        raise SpecError("circuit expects an ancilla-free modular encoding and a one-ancilla inverse-root encoding")
    rho = as_density(rho)
    rho_s = mod.unitary @ rho @ mod.unitary.conj().T
    embedded = np.zeros((2 * d_v, 2 * d_v), dtype=complex)
    embedded[:d_v, :d_v] = rho_s
    xi = inv.unitary @ embedded @ inv.unitary.conj().T
    omega = tensor(xi, model.sigma_vh)
    plus = np.full((2, 2), 0.5, dtype=complex)
    full = tensor(plus, omega)
    perm = _swap_perm(d_v, d_h)
    tau = full[np.ix_(perm, perm)]
    phases = np.exp(1j * model.g_eig.vals * t)
    u_t = (model.g_eig.vecs * phases) @ model.g_eig.vecs.conj().T
    o_t = hermitize(u_t @ as_hermitian(g_j) @ u_t.conj().T)
    scale = (mod.alpha * inv.alpha) ** 2
    return tau, o_t, scale


_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


def circuit_expectation(model: ThermalModel, rho, g_j, s: float, t: float, *, modular=None, inv_sqrt=None) -> float:
    """(alpha1 alpha2)^2 <X_c (x) O> on the post-swap circuit state.

    With exact encodings this equals
    (1/2) Tr[e^{iGt} G_j e^{-iGt} {sigma_vh, sigma_v^{-1/2} sigma_v^{-is/2}
    rho sigma_v^{is/2} sigma_v^{-1/2} (x) I_h}]; averaging over s and t
    yields the gradient's lifted-state term.
    """
    tau, o_t, scale = _circuit_pieces(model, rho, s, t, g_j, modular, inv_sqrt)
    d_v = model.dims.d_v
    meas = tensor(_PAULI_X, tensor(_P0, tensor(np.eye(d_v), o_t)))
    val = complex(np.einsum("ij,ji->", tau, meas))
    return scale * val.real


def eigen_groups(g_j, *, tol: float = 1e-9) -> tuple[np.ndarray, list[np.ndarray]]:
    """Distinct eigenvalues of an observable with their summed projectors."""
    es = eigh(g_j)
    scale = max(1.0, float(np.max(np.abs(es.vals))))
    values, projs = [], []
    i = 0
    while i < es.dim:
        j = i
        while j + 1 < es.dim and es.vals[j + 1] - es.vals[i] <= tol * scale:
            j += 1
        block = es.vecs[:, i : j + 1]
        values.append(float(np.mean(es.vals[i : j + 1])))
        projs.append(block @ block.conj().T)
        i = j + 1
    return np.asarray(values), projs


def outcome_distribution(model: ThermalModel, rho, g_j, s: float, t: float, *, modular=None, inv_sqrt=None):
    """Joint (z, g) outcome table of the commuting measurement pair.

    Returns (z, g, y, prob) arrays; g is the outcome of the full observable
    (ancilla projector times the evolved G_j), which is 0 whenever the
    ancillas miss |0>.  Probabilities are clamped above -1e-10 and
    renormalized; a larger defect raises.
    """
    tau, o_t, _ = _circuit_pieces(model, rho, s, t, g_j, modular, inv_sqrt)
    d_v, d_h = model.dims.d_v, model.dims.d_h
    dim = tau.shape[0]
    values, projs = eigen_groups(g_j)
    phases = np.exp(1j * model.g_eig.vals * t)
    u_t = (model.g_eig.vecs * phases) @ model.g_eig.vecs.conj().T
    obs_projs = []
    obs_vals = []
    covered = np.zeros((dim, dim), dtype=complex)
    for g_val, pk in zip(values, projs):
        if g_val == 0.0:
            continue
        full = tensor(_P0, tensor(np.eye(d_v), u_t @ pk @ u_t.conj().T))
        lifted = tensor(np.eye(2), full)
        obs_projs.append(lifted)
        obs_vals.append(g_val)
        covered += lifted
    obs_projs.append(np.eye(dim) - covered)
    obs_vals.append(0.0)

    x_projs = [
        tensor(0.5 * (np.eye(2) + sgn * _PAULI_X), np.eye(dim // 2)) for sgn in (+1.0, -1.0)
    ]
    z_out, g_out, p_out = [], [], []
    for z, xp in enumerate(x_projs):
        for g_val, op in zip(obs_vals, obs_projs):
            p = complex(np.einsum("ij,ji->", xp @ op, tau)).real
            z_out.append(z)
            g_out.append(g_val)
            p_out.append(p)
    prob = _clean_probs(np.asarray(p_out))
    z_arr = np.asarray(z_out)
    g_arr = np.asarray(g_out)
    y_arr = np.where(z_arr == 0, g_arr, -g_arr)
    return z_arr, g_arr, y_arr, prob


def _clean_probs(p: np.ndarray) -> np.ndarray:
    if float(p.min(initial=0.0)) < PROB_CLAMP:
        raise SpecError(f"negative outcome probability {float(p.min()):.3e}")
    p = np.maximum(p, 0.0)
    total = p.sum(axis=-1, keepdims=True)
    if np.any(np.abs(total - 1.0) > PROB_DEFECT):
        raise SpecError("outcome probabilities defect exceeds 1e-8")
    return p / total


def shot_sample(model: ThermalModel, rho, g_j, sampler_s: SeededSampler, sampler_t: SeededSampler, rng: np.random.Generator) -> ShotRecord:
    """One record of the estimation circuit with freshly drawn (s, t)."""
    s = sampler_s.sample()
    t = sampler_t.sample()
    z, g, y, prob = outcome_distribution(model, rho, g_j, s, t)
    idx = int(rng.choice(len(prob), p=prob))
    return ShotRecord(s=s, t=t, z=int(z[idx]), g=float(g[idx]), y=float(y[idx]))


# ---------------------------------------------------------------------------
# vectorized shot batches (identical statistics to the honest path)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _BatchContext:
    """Model- and observable-level constants reused across every shot."""

    rho_tilde: np.ndarray  # target in the sigma_v eigenbasis
    log_vals: np.ndarray  # ln eigenvalues of sigma_v
    bv: np.ndarray  # (first dilation column block) @ sigma_v eigvecs
    g_vals: np.ndarray  # eigenvalues of G
    g_vecs: np.ndarray
    d_weights: np.ndarray  # Gibbs weights of sigma_vh in the G eigenbasis
    sigma_h: np.ndarray
    y_values: np.ndarray  # per-outcome signed values
    proj_rot: np.ndarray  # (K, D, D) distinct-eigenvalue projectors, G basis
    c1: np.ndarray  # Tr[Pi_k sigma_vh]
    eye_h: np.ndarray
    kappa: float
    d_v: int


def _batch_context(model: ThermalModel, rho, g_j) -> _BatchContext:
    d_v, d_h = model.dims.d_v, model.dims.d_h
    if 2 * 2 * d_v * d_v * d_h > MAX_CIRCUIT_DIM:
        raise ScaleError("circuit register exceeds the supported size")
    rho = as_density(rho)
    sv = model.sigma_v_eig
    u2 = inv_sqrt_encoding(model).unitary
    values, projs = eigen_groups(g_j)
    g_vecs = model.g_eig.vecs
    proj_rot = np.stack([g_vecs.conj().T @ pk @ g_vecs for pk in projs])
    shifted = model.g_eig.vals - np.min(model.g_eig.vals)
    d_weights = np.exp(-shifted)
    d_weights /= d_weights.sum()
    c1 = np.einsum("kpp,p->k", proj_rot, d_weights).real
    return _BatchContext(
        rho_tilde=sv.vecs.conj().T @ rho @ sv.vecs,
        log_vals=np.log(sv.vals),
        bv=u2[:, :d_v] @ sv.vecs,
        g_vals=model.g_eig.vals,
        g_vecs=g_vecs,
        d_weights=d_weights,
        sigma_h=partial_trace(model.sigma_vh, model.dims, keep="hidden"),
        y_values=values,
        proj_rot=proj_rot,
        c1=c1,
        eye_h=np.eye(d_h, dtype=complex),
        kappa=model.kappa,
        d_v=d_v,
    )


def _batch_outcomes(ctx: _BatchContext, s: np.ndarray, t: np.ndarray):
    """Outcome values and per-shot probabilities for vectors of (s, t).

    Exploits the product structure of the circuit: traces against the
    swap factorize into visible-register contractions, so only
    (d_v d_h)^2-sized tensors appear per shot.
    """
    m = s.shape[0]
    d_v = ctx.d_v
    dim = ctx.g_vals.shape[0]
    phase_s = np.exp(-0.5j * np.outer(s, ctx.log_vals))  # (m, d_v)
    rho_s = phase_s[:, :, None] * ctx.rho_tilde[None, :, :] * phase_s.conj()[:, None, :]
    xi = ctx.bv @ rho_s @ ctx.bv.conj().T
    w0 = xi[:, :d_v, :d_v]
    w1 = xi[:, d_v:, d_v:]
    psi = np.exp(-1j * np.outer(t, ctx.g_vals))  # (m, D)
    vecs = ctx.g_vecs
    vecs_h = vecs.conj().T

    def rotated(w, right):
        lift = (w[:, :, None, :, None] * right[None, None, :, None, :]).reshape(m, dim, dim)
        return vecs_h @ lift @ vecs

    w0_eye = rotated(w0, ctx.eye_h)
    w0_sig = rotated(w0, ctx.sigma_h)
    w1_eye = rotated(w1, ctx.eye_h)
    w1_sig = rotated(w1, ctx.sigma_h)

    # evolved-projector contractions collapse to flat inner products:
    # T_mk = sum_pq proj[k,p,q] * (wt[m,q,p] * psi[m,q] psi*[m,p] (* D_p))
    proj_flat = ctx.proj_rot.reshape(-1, dim * dim)

    def contract(wt, weight_p):
        x = wt * psi[:, :, None] * psi.conj()[:, None, :]
        if weight_p is not None:
            x = x * weight_p[None, None, :]
        return x.transpose(0, 2, 1).reshape(m, dim * dim) @ proj_flat.T

    tr_w0 = np.einsum("mpp->m", w0).real
    tr_w1 = np.einsum("mpp->m", w1).real
    t2_0 = contract(w0_eye, ctx.d_weights)
    t3_0 = contract(w0_sig, None)
    # ancilla-miss branch: summing k over projectors collapses the evolution
    t2_1 = np.einsum("mpp,p->m", w1_eye, ctx.d_weights)
    t3_1 = np.einsum("mpp->m", w1_sig)

    k = ctx.y_values.shape[0]
    probs = np.empty((m, 2 * k + 2))
    base0 = tr_w0[:, None] * ctx.c1[None, :] + t3_0.real
    cross0 = 2.0 * t2_0.real
    probs[:, :k] = 0.25 * (base0 + cross0)  # z = 0, ancilla hit
    probs[:, k : 2 * k] = 0.25 * (base0 - cross0)  # z = 1, ancilla hit
    base1 = tr_w1 + t3_1.real
    cross1 = 2.0 * t2_1.real
    probs[:, 2 * k] = 0.25 * (base1 + cross1)
    probs[:, 2 * k + 1] = 0.25 * (base1 - cross1)
    y = np.concatenate([ctx.y_values, -ctx.y_values, [0.0, 0.0]])
    return y, _clean_probs(probs)


def _run_chunk(ctx: _BatchContext, seed: int, worker: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(seed ^ worker)
    u_s = np.clip(rng.random(n), 1e-16, 1 - 1e-16)
    u_t = np.clip(rng.random(n), 1e-16, 1 - 1e-16)
    s = np.asarray(quantile(LOGISTIC, u_s))
    t = np.asarray(quantile(HIGH_PEAK_TENT, u_t))
    y, probs = _batch_outcomes(ctx, s, t)
    cum = np.cumsum(probs, axis=1)
    draws = rng.random(n)
    idx = np.sum(draws[:, None] > cum, axis=1)
    return y[np.minimum(idx, y.shape[0] - 1)]


def estimate_first_term(model: ThermalModel, rho, g_j, config: EstimatorConfig) -> tuple[float, float, int]:
    """Shot estimate (mean, stderr, shots) of the lifted-state term.

    Shot count defaults to the Hoeffding bound for the configured
    (epsilon, delta_fail).  Work is split into fixed-size chunks with
    derived seeds (seed ^ chunk index) and merged in index order, so the
    result is reproducible for any thread count.
    """
    g_norm = spectral_norm(g_j)
    shots = config.shots or hoeffding_shots(model.kappa, g_norm, config.epsilon, config.delta_fail)
    ctx = _batch_context(model, rho, g_j)
    sizes = [config.chunk] * (shots // config.chunk)
    if shots % config.chunk:
        sizes.append(shots % config.chunk)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            parts = list(
                pool.map(lambda iw: _run_chunk(ctx, config.seed, iw[0], iw[1]), enumerate(sizes))
            )
    else:
        parts = [_run_chunk(ctx, config.seed, i, n) for i, n in enumerate(sizes)]
    y = np.concatenate(parts) if parts else np.zeros(0)
    mean = model.kappa * float(np.mean(y))
    stderr = model.kappa * float(np.std(y, ddof=1)) / math.sqrt(shots) if shots > 1 else float("inf")
    return mean, stderr, shots


def estimate_model_term(model: ThermalModel, g_j, shots: int, seed: int) -> tuple[float, float]:
    """Shot estimate of <G_j>_{sigma_vh} by direct thermal sampling."""
    values, projs = eigen_groups(g_j)
    p = np.array([np.einsum("ij,ji->", pk, model.sigma_vh).real for pk in projs])
    p = _clean_probs(p[None, :])[0]
    rng = np.random.default_rng(seed)
    draws = values[rng.choice(len(values), size=shots, p=p)]
    return float(np.mean(draws)), float(np.std(draws, ddof=1)) / math.sqrt(shots)


# ---------------------------------------------------------------------------
# deterministic (s, t)-quadrature of the circuit
# ---------------------------------------------------------------------------


def _logistic_panels(s_max: float, panels: int, per_panel: int):
    x, w = leggauss(per_panel)
    edges = np.linspace(-s_max, s_max, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        ss = 0.5 * (hi - lo) * x + 0.5 * (lo + hi)
        nodes.append(ss)
        weights.append(0.5 * (hi - lo) * w * pdf(LOGISTIC, ss))
    return np.concatenate(nodes), np.concatenate(weights)


def quadrature_first_term(
    model: ThermalModel,
    rho,
    g_j,
    *,
    s_max: float = 10.0,
    t_max: float = 10.0,
    s_panels: int = 8,
    s_nodes: int = 24,
    t_nodes: int = 1600,
    modular_noise=None,
    inv_sqrt=None,
) -> float:
    """Density-weighted (s, t)-quadrature average of circuit_expectation.

    By bilinearity the t-average is folded into the measured observable, so
    this equals the plain double-grid average of circuit expectations while
    costing one trace per s node.  ``modular_noise`` (a unitary applied after
    the modular flow) and ``inv_sqrt`` inject controlled encoding errors.
    """
    t_pts, t_wts, t_w0 = expectation_nodes(HIGH_PEAK_TENT, T=t_max, nodes=t_nodes)
    g_j = as_hermitian(g_j)
    o_bar = t_w0 * g_j
    for t_i, w_i in zip(t_pts, t_wts):
        phases = np.exp(1j * model.g_eig.vals * t_i)
        u_t = (model.g_eig.vecs * phases) @ model.g_eig.vecs.conj().T
        o_bar = o_bar + w_i * (u_t @ g_j @ u_t.conj().T)
    o_bar = hermitize(o_bar)

    d_v = model.dims.d_v
    inv = inv_sqrt if inv_sqrt is not None else inv_sqrt_encoding(model)
    s_pts, s_wts = _logistic_panels(s_max, s_panels, s_nodes)
    meas = tensor(_PAULI_X, tensor(_P0, tensor(np.eye(d_v), o_bar)))
    total = 0.0
    for s_i, w_i in zip(s_pts, s_wts):
        mod = modular_unitary(model, s_i)
        if modular_noise is not None:
            mod = BlockEncoding(modular_noise @ mod.unitary, mod.alpha, 0, mod.delta)
        tau, _, scale = _circuit_pieces(model, rho, s_i, 0.0, g_j, mod, inv)
        total += w_i * scale * complex(np.einsum("ij,ji->", tau, meas)).real
    return total


# ---------------------------------------------------------------------------
# error budget and cost model
# ---------------------------------------------------------------------------


def error_budget(eps1: float, eps2: float, kappa: float, g_norm: float) -> float:
    """Worst-case first-term bias from encoding errors eps1 (modular flow)
    and eps2 (inverse root): g_norm (2 sqrt(k) eps2 + 2 eps1 (k + sqrt(k) eps2))."""
    rk = math.sqrt(kappa)
    return g_norm * (2.0 * rk * eps2 + 2.0 * eps1 * (kappa + rk * eps2))


def budget_split(epsilon: float, kappa: float, g_norm: float) -> tuple[float, float]:
    """Split a total error target so the composed bias stays below epsilon/2.

    eps1 = eps/(10 k g), eps2 = eps/(10 sqrt(k) g); then the budget evaluates
    to 2 eps/5 + eps^2/(50 k g) <= eps/2 whenever eps <= 5 k g.
    """
    if min(epsilon, kappa, g_norm) <= 0.0:
        raise SpecError("budget_split needs positive inputs")
    return epsilon / (10.0 * kappa * g_norm), epsilon / (10.0 * math.sqrt(kappa) * g_norm)


def query_cost(
    kind: str,
    kappa: float,
    *,
    s: float = 0.0,
    g_norm: float = 1.0,
    epsilon: float = 0.01,
    delta_fail: float = 0.05,
) -> float:
    """Unit-constant asymptotic query counts (a cost model, not a guarantee).

    modular_flow:   kappa |s| ln(|s|/eps) ln(kappa)
    inv_sqrt:       kappa ln(1/eps)
    full_algorithm: kappa^3 g^2 / eps^2 * ln(kappa g / eps) ln(1/delta)
    All floored at 1.
    """
    if min(kappa, g_norm, epsilon) <= 0.0 or not 0.0 < delta_fail < 1.0:
        raise SpecError("query_cost needs positive inputs and delta in (0,1)")
    e = math.e
    if kind == "modular_flow":
        val = kappa * abs(s) * math.log(max(abs(s) / epsilon, e)) * math.log(max(kappa, e))
    elif kind == "inv_sqrt":
        val = kappa * math.log(1.0 / epsilon)
    elif kind == "full_algorithm":
        val = (
            kappa**3
            * g_norm**2
            / epsilon**2
            * math.log(max(kappa * g_norm / epsilon, e))
            * math.log(1.0 / delta_fail)
        )
    else:
        raise SpecError(f"unknown cost kind {kind!r}")
    return max(val, 1.0)
