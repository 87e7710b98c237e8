"""Objective values and exact gradients for thermal-model state learning.

The objective is a relative entropy D(target || visible marginal of the
model), either the standard quantum relative entropy ("umegaki") or the
one-parameter quasi-entropy family ("tsallis", order q in (0,1) u (1,2]).

Every gradient has the same two-term shape: a model-average term
<G_j>_{sigma_vh} and a target term obtained by lifting the target state to
a joint quasi-state through a composition of
  (1) a logistic- or power-weighted modular averaging channel on sigma_v,
  (2) a sigma_v^{-q/2} sandwich,
  (3) an anticommutator with sigma_vh,
  (4) a tent-weighted averaging channel generated by G(theta).
Commuting special cases (classical hidden or visible register) collapse to
per-block formulas that avoid the joint register entirely.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError, SupportError
from .linalg import (
    as_density,
    as_hermitian,
    eigh,
    expectation,
    hermitize,
    spectral_norm,
    tensor,
)
from .matcalc import EXP_TENT, LOG_LOGISTIC, apply_channel, power_beta
from .models import (
    CQModel,
    QCModel,
    RestrictedSpec,
    ThermalModel,
    cq_decompose,
    qc_decompose,
    restricted_to_param,
    thermalize,
)

SUPPORT_FLOOR = 1e-12
PSD_CLAMP = -1e-12


@dataclass(frozen=True)
class Objective:
    """Which relative entropy to differentiate."""

    kind: str
    q: float | None = None

    def __post_init__(self):
        if self.kind not in ("umegaki", "tsallis"):
            raise SpecError(f"unknown objective kind {self.kind!r}")
        if self.kind == "tsallis":
            if self.q is None or not (0.0 < self.q <= 2.0) or self.q == 1.0:
                raise SpecError(f"tsallis order must lie in (0,1) u (1,2], got {self.q}")
        elif self.q is not None:
            raise SpecError("umegaki objective takes no order parameter")


UMEGAKI = Objective("umegaki")


def tsallis(q: float) -> Objective:
    return Objective("tsallis", float(q))


@dataclass(frozen=True)
class GradientReport:
    """Per-parameter gradient with its two-term breakdown.

    values = first_terms - second_terms elementwise; for the tsallis
    objective the second term already carries the Q_q prefactor.
    """

    values: np.ndarray
    first_terms: np.ndarray
    second_terms: np.ndarray

    def __post_init__(self):
        for name in ("values", "first_terms", "second_terms"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class POVM:
    """Positive operator-valued measure: PSD elements summing to identity."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(as_hermitian(e) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        total = sum(elems)
        d = elems[0].shape[0]
        if spectral_norm(total - np.eye(d)) > 1e-10:
            raise SpecError("POVM elements do not sum to the identity")
        for e in elems:
            if float(np.linalg.eigvalsh(e)[0]) < -1e-10:
                raise SpecError("POVM element is not positive semidefinite")


def _check_support(vals: np.ndarray, what: str) -> None:
    if float(np.min(vals)) < SUPPORT_FLOOR:
        raise SupportError(
            f"{what} has eigenvalue {float(np.min(vals)):.3e} below the "
            f"support floor {SUPPORT_FLOOR:.0e}"
        )


def psd_power(rho, q: float) -> np.ndarray:
    """rho^q with eigenvalues clamped to [0, inf) (clamp floor -1e-12)."""
    es = eigh(rho)
    if float(es.vals[0]) < PSD_CLAMP:
        raise SpecError(f"state eigenvalue {float(es.vals[0]):.3e} below PSD clamp")
    w = np.maximum(es.vals, 0.0)
    return hermitize((es.vecs * np.power(w, q)) @ es.vecs.conj().T)


def relative_entropy(rho, sigma, obj: Objective = UMEGAKI) -> float:
    """D(rho || sigma): umegaki Tr[rho(ln rho - ln sigma)], or the tsallis
    quasi-entropy (Tr[rho^q sigma^{1-q}] - 1)/(q - 1)."""
    rho = as_density(rho)
    sig_es = eigh(as_density(sigma))
    _check_support(sig_es.vals, "second argument")
    if obj.kind == "umegaki":
        p = np.maximum(np.linalg.eigvalsh(rho), 0.0)
        ent = float(np.sum(p[p > 0.0] * np.log(p[p > 0.0])))
        log_sigma = sig_es.apply(np.log)
        return ent - expectation(log_sigma, rho)
    q = obj.q
    qq = expectation(sig_es.power(1.0 - q), psd_power(rho, q))
    return (qq - 1.0) / (q - 1.0)


def q_overlap(rho, sigma_es, q: float) -> float:
    """Tr[rho^q sigma^{1-q}] for a pre-decomposed positive sigma."""
    return expectation(sigma_es.power(1.0 - q), psd_power(rho, q))


def lift_to_joint(model: ThermalModel, r_v, q: float = 1.0) -> np.ndarray:
    """Lift a visible operator to the joint quasi-state driving the gradient.

    For q = 1 the input is the target state and the output has unit trace;
    for q != 1 the caller passes rho^q and the output trace is Q_q.  The
    output is Hermitian but need not be positive.
    """
    r_v = as_hermitian(r_v)
    if r_v.shape[0] != model.dims.d_v:
        raise SpecError("input must live on the visible register")
    _check_support(model.sigma_v_eig.vals, "visible marginal")
    if q == 1.0:
        averaged = apply_channel(LOG_LOGISTIC, model.sigma_v_eig, r_v)
    elif q == 2.0:
        averaged = r_v  # the power-weight density degenerates to a point mass
    else:
        averaged = apply_channel(power_beta(1.0 - q), model.sigma_v_eig, r_v)
    side = model.sigma_v_eig.power(-q / 2.0)
    sandwiched = tensor(side @ averaged @ side, np.eye(model.dims.d_h))
    anti = 0.5 * (model.sigma_vh @ sandwiched + sandwiched @ model.sigma_vh)
    return apply_channel(EXP_TENT, model.g_eig, hermitize(anti))


def gradient(model: ThermalModel, rho, obj: Objective = UMEGAKI) -> GradientReport:
    """Exact objective gradient for a fully quantum model."""
    rho = as_density(rho)
    second_raw = np.array(
        [expectation(t, model.sigma_vh) for t in model.hamiltonian.terms]
    )
    if obj.kind == "umegaki":
        lifted = lift_to_joint(model, rho, q=1.0)
        first = np.array([expectation(t, lifted) for t in model.hamiltonian.terms])
        second = second_raw
    else:
        q = obj.q
        lifted = lift_to_joint(model, psd_power(rho, q), q=q)
        first = np.array([expectation(t, lifted) for t in model.hamiltonian.terms])
        second = q_overlap(rho, model.sigma_v_eig, q) * second_raw
    return GradientReport(first - second, first, second)


def gradient_qc(qc: QCModel, rho, obj: Objective = UMEGAKI) -> GradientReport:
    """Exact gradient for a quantum-visible / classical-hidden model.

    The target state is expressed in the same frame as the per-block
    Hamiltonians (the declared hidden basis does not touch the visible
    register, so no rotation of rho is needed).
    """
    rho = as_density(rho)
    sig_v_es = eigh(qc.visible_state())
    _check_support(sig_v_es.vals, "visible marginal")
    q = 1.0 if obj.kind == "umegaki" else obj.q
    if q == 1.0:
        averaged = apply_channel(LOG_LOGISTIC, sig_v_es, rho)
    elif q == 2.0:
        averaged = psd_power(rho, q)
    else:
        averaged = apply_channel(power_beta(1.0 - q), sig_v_es, psd_power(rho, q))
    side = sig_v_es.power(-q / 2.0)
    core = hermitize(side @ averaged @ side)

    n_x = qc.dims.d_h
    first = np.zeros(qc.n_params)
    second_raw = np.zeros(qc.n_params)
    for x in range(n_x):
        anti = hermitize(0.5 * (qc.sigma_x[x] @ core + core @ qc.sigma_x[x]))
        block_es = eigh(qc.block_ham(x))
        lifted_x = apply_channel(EXP_TENT, block_es, anti)
        for j in range(qc.n_params):
            first[j] += qc.p[x] * expectation(qc.terms_x[j][x], lifted_x)
            second_raw[j] += qc.p[x] * expectation(qc.terms_x[j][x], qc.sigma_x[x])
    if obj.kind == "umegaki":
        return GradientReport(first - second_raw, first, second_raw)
    second = q_overlap(rho, sig_v_es, q) * second_raw
    return GradientReport(first - second, first, second)


def gradient_cq(cq: CQModel, target_probs, obj: Objective = UMEGAKI) -> GradientReport:
    """Exact gradient for a classical-visible / quantum-hidden model.

    The target is a probability vector over the declared visible basis.
    """
    r = np.asarray(target_probs, dtype=float)
    if r.shape != (cq.dims.d_v,) or np.any(r < -1e-12) or abs(r.sum() - 1.0) > 1e-10:
        raise SpecError("target must be a probability vector over the visible labels")
    r = np.maximum(r, 0.0)
    if np.any((cq.p < SUPPORT_FLOOR) & (r > 0.0)):
        raise SupportError("target puts mass on a label with vanishing model weight")
    means = np.array(
        [
            [expectation(cq.terms_x[j][x], cq.sigma_x[x]) for x in range(cq.dims.d_v)]
            for j in range(cq.n_params)
        ]
    )
    if obj.kind == "umegaki":
        first = means @ r
        second = means @ cq.p
        return GradientReport(first - second, first, second)
    q = obj.q
    weights = np.power(r, q) * np.power(cq.p, 1.0 - q)
    qq = float(np.sum(weights))
    first = means @ weights
    second = qq * (means @ cq.p)
    return GradientReport(first - second, first, second)


def cq_objective(cq: CQModel, target_probs, obj: Objective = UMEGAKI) -> float:
    """Relative entropy between a label distribution and the model's p(theta)."""
    r = np.asarray(target_probs, dtype=float)
    if obj.kind == "umegaki":
        mask = r > 0.0
        return float(np.sum(r[mask] * np.log(r[mask] / cq.p[mask])))
    q = obj.q
    return (float(np.sum(np.power(r, q) * np.power(cq.p, 1.0 - q))) - 1.0) / (q - 1.0)


def pgm_povm(qc: QCModel) -> POVM:
    """Modular-averaged pretty-good measurement sorting the model blocks.

    Lambda_x = Upsilon(sigma_v^{-1/2} p_x sigma_x sigma_v^{-1/2}); complete
    by construction because the weighted blocks average to sigma_v.
    """
    sig_v_es = eigh(qc.visible_state())
    _check_support(sig_v_es.vals, "visible marginal")
    inv_sqrt = sig_v_es.power(-0.5)
    elems = []
    for x in range(qc.dims.d_h):
        core = hermitize(inv_sqrt @ (qc.p[x] * qc.sigma_x[x]) @ inv_sqrt)
        elems.append(apply_channel(LOG_LOGISTIC, sig_v_es, core))
    return POVM(tuple(elems))


def povm_probs(povm: POVM, rho) -> np.ndarray:
    """Outcome distribution q_x = Tr[Lambda_x rho]."""
    rho = as_density(rho)
    return np.array([expectation(e, rho) for e in povm.elements])


def restricted_gradients(
    kind: str,
    spec: RestrictedSpec,
    target,
    obj: Objective = UMEGAKI,
    basis=None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradient of a restricted model, repacked into (a, b, w) shapes.

    kind selects the model class: "fully_quantum" (target is a visible
    density matrix), "qc" (commuting hidden operators over ``basis``,
    target a density matrix) or "cq" (commuting visible operators over
    ``basis``, target a probability vector).
    """
    param = restricted_to_param(spec)
    if kind == "fully_quantum":
        rep = gradient(thermalize(param), target, obj)
    elif kind == "qc":
        rep = gradient_qc(qc_decompose(param, basis), target, obj)
    elif kind == "cq":
        rep = gradient_cq(cq_decompose(param, basis), target, obj)
    else:
        raise SpecError(f"unknown restricted kind {kind!r}")
    return spec.unpack(rep.values)


def classical_distribution(tables: np.ndarray, theta) -> np.ndarray:
    """Joint Boltzmann table p(v, h) for energy tables G_j(v, h)."""
    tables = np.asarray(tables, dtype=float)
    theta = np.asarray(theta, dtype=float)
    energy = np.tensordot(theta, tables, axes=1)
    energy -= energy.min()
    p = np.exp(-energy)
    return p / p.sum()


def classical_objective(tables, theta, target_q) -> float:
    """Relative entropy D(q(v) || p_theta(v)) by exact enumeration."""
    p_v = classical_distribution(tables, theta).sum(axis=1)
    q = np.asarray(target_q, dtype=float)
    mask = q > 0.0
    return float(np.sum(q[mask] * np.log(q[mask] / p_v[mask])))


def classical_gradient(tables, theta, target_q) -> np.ndarray:
    """Exact-enumeration gradient of D(q || p_theta) for energy tables.

    grad_j = sum_{v,h} q(v) p_theta(h|v) G_j(v,h) - sum_{v,h} p_theta(v,h) G_j(v,h).
    """
    tables = np.asarray(tables, dtype=float)
    q = np.asarray(target_q, dtype=float)
    p_vh = classical_distribution(tables, theta)
    p_v = p_vh.sum(axis=1)
    clamped = np.where(p_v > 0.0, p_v, 1.0)
    weights = p_vh * (q / clamped)[:, None]  # q(v) p(h|v)
    return np.tensordot(tables, weights - p_vh, axes=((1, 2), (0, 1)))
