"""Seeded property-check suites behind the ``verify`` CLI command.

Each check returns its worst residual against a fixed tolerance; suites are
deterministic (fixed seeds) so a regression is a hard failure, not noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import densities, estimator, gradients, matcalc, models
from .errors import SpecError
from .linalg import BipartiteDims, as_hermitian, eigh, expectation, spectral_norm, tensor
from .training import finite_difference_gradient

SUITES = ("matcalc", "densities", "gradients", "estimator")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "residual": float(self.residual),
            "tol": float(self.tol),
            "passed": self.passed,
        }


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _rand_herm(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return as_hermitian((a + a.conj().T) / 2 * scale)


def _rand_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return m / np.trace(m).real


def _rand_pd(rng, d, floor=0.2):
    es = eigh(_rand_herm(rng, d))
    return es.apply(lambda w: np.exp(w / 4) + floor)


def _model(rng, d_v, d_h, n_terms=3, scale=0.4):
    dims = BipartiteDims(d_v, d_h)
    terms = tuple(_rand_herm(rng, dims.total, scale) for _ in range(n_terms))
    theta = rng.uniform(-0.6, 0.6, size=n_terms)
    return models.thermalize(models.ParamHamiltonian(dims=dims, terms=terms, theta=theta))


def suite_densities(seed: int = 20_240_501) -> list[CheckResult]:
    out = []
    kinds = [densities.HIGH_PEAK_TENT, densities.LOGISTIC, densities.power_density(0.5),
             densities.power_density(-0.25)]
    for d in kinds:
        out.append(CheckResult("densities", f"unit mass [{_dname(d)}]",
                               abs(densities.numeric_mass(d) - 1.0), 1e-8))
    for d in kinds:
        worst = 0.0
        for T in (1.0, 2.0, 5.0, 10.0):
            tail = densities.numeric_tail_mass(d, T)
            bound = densities.tail_mass_bound(d, T)
            worst = max(worst, tail - bound)
        out.append(CheckResult("densities", f"tail below bound [{_dname(d)}]", worst, 0.0 + 1e-30))
    # Fourier transforms match the channel factors
    for d, kind in [
        (densities.HIGH_PEAK_TENT, matcalc.EXP_TENT),
        (densities.LOGISTIC, matcalc.LOG_LOGISTIC),
        (densities.power_density(0.5), matcalc.power_beta(0.5)),
    ]:
        worst = 0.0
        for u in (0.0, 0.3, 1.0, 2.0, 5.0):
            omega = u if d.kind == "high_peak_tent" else u / 2.0
            worst = max(worst, abs(densities.numeric_fourier(d, omega)
                                   - matcalc.channel_factor(kind, u)))
        out.append(CheckResult("densities", f"fourier matches factor [{_dname(d)}]", worst, 1e-8))
    worst = 0.0
    for r in (-0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 0.9):
        for u in (0.0, 0.5, 1.0, 2.0, 5.0):
            worst = max(worst, densities.verify_power_kernel_identity(r, u))
    out.append(CheckResult("densities", "power-kernel fourier identity grid", worst, 1e-8))
    # sampler stream reproducibility and KS fit
    for d in kinds[:3]:
        a = densities.SeededSampler(d, seed).sample(2000)
        b = densities.SeededSampler(d, seed).sample(2000)
        out.append(CheckResult("densities", f"seeded stream bit-exact [{_dname(d)}]",
                               float(np.max(np.abs(a - b))), 1e-300))
        x = np.sort(densities.SeededSampler(d, seed ^ 0xABCD).sample(100_000))
        emp = (np.arange(1, x.size + 1) - 0.5) / x.size
        ks = float(np.max(np.abs(densities.cdf(d, x) - emp)))
        out.append(CheckResult("densities", f"sampler KS fit [{_dname(d)}]", ks, 0.01))
    return out


def suite_matcalc(seed: int = 77_001) -> list[CheckResult]:
    rng = _rng(seed)
    out = []
    kinds = [matcalc.EXP_TENT, matcalc.LOG_LOGISTIC, matcalc.power_beta(0.5)]
    trace_worst = {k.name: 0.0 for k in kinds}
    herm_worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        y = _rand_herm(rng, d)
        for kind in kinds:
            anchor = eigh(_rand_herm(rng, d)) if kind.name == "exp_tent" else eigh(_rand_pd(rng, d))
            z = matcalc.apply_channel(kind, anchor, y)
            trace_worst[kind.name] = max(trace_worst[kind.name],
                                         abs(np.trace(z).real - np.trace(y).real))
            herm_worst = max(herm_worst, float(np.max(np.abs(z - z.conj().T))))
    for kind in kinds:
        out.append(CheckResult("matcalc", f"channel trace preservation [{kind.name}]",
                               trace_worst[kind.name], 1e-10))
    out.append(CheckResult("matcalc", "channel hermiticity", herm_worst, 1e-12))
    # spectral vs quadrature cross-check
    quad = matcalc.EvalMode("quadrature", T=10.0, nodes=4096)
    worst = 0.0
    for kind in kinds:
        for _ in range(3):
            y = _rand_herm(rng, 4)
            anchor = eigh(_rand_herm(rng, 4)) if kind.name == "exp_tent" else eigh(_rand_pd(rng, 4))
            worst = max(worst, spectral_norm(
                matcalc.apply_channel(kind, anchor, y)
                - matcalc.apply_channel(kind, anchor, y, quad)))
    out.append(CheckResult("matcalc", "spectral vs quadrature channel", worst, 1e-8))
    # dual-path and finite-difference checks for the three derivatives
    worst_dual = worst_fd_exp = 0.0
    for _ in range(5):
        b, h = _rand_herm(rng, 4), _rand_herm(rng, 4)
        duh = matcalc.frechet_exp(b, h, "duhamel")
        four = matcalc.frechet_exp(b, h, "fourier")
        worst_dual = max(worst_dual, spectral_norm(duh - four))
        eps = 1e-5
        fd = (eigh(b + eps * h).apply(np.exp) - eigh(b - eps * h).apply(np.exp)) / (2 * eps)
        worst_fd_exp = max(worst_fd_exp, spectral_norm(four - fd))
    out.append(CheckResult("matcalc", "exp derivative duhamel vs fourier", worst_dual, 1e-8))
    out.append(CheckResult("matcalc", "exp derivative finite difference", worst_fd_exp, 1e-6))
    worst_fd_log = worst_res = 0.0
    for _ in range(5):
        a, h = _rand_pd(rng, 3), _rand_herm(rng, 3)
        four = matcalc.frechet_log(a, h)
        eps = 1e-5
        fd = (eigh(a + eps * h).apply(np.log) - eigh(a - eps * h).apply(np.log)) / (2 * eps)
        worst_fd_log = max(worst_fd_log, spectral_norm(four - fd))
        worst_res = max(worst_res, spectral_norm(four - matcalc.frechet_log(a, h, "resolvent")))
    out.append(CheckResult("matcalc", "log derivative finite difference", worst_fd_log, 1e-6))
    out.append(CheckResult("matcalc", "log derivative fourier vs resolvent", worst_res, 1e-8))
    worst_fd_pow = 0.0
    for r in (-0.5, 0.3, 0.8):
        a, h = _rand_pd(rng, 3), _rand_herm(rng, 3)
        four = matcalc.frechet_power(a, h, r)
        eps = 1e-5
        fd = (eigh(a + eps * h).power(r) - eigh(a - eps * h).power(r)) / (2 * eps)
        worst_fd_pow = max(worst_fd_pow, spectral_norm(four - fd))
    out.append(CheckResult("matcalc", "power derivative finite difference", worst_fd_pow, 1e-6))
    a, h = _rand_pd(rng, 3), _rand_herm(rng, 3)
    out.append(CheckResult(
        "matcalc", "power derivative r->0 approaches log derivative",
        spectral_norm(matcalc.frechet_power(a, h, 1e-6) / 1e-6 - matcalc.frechet_log(a, h)), 1e-4))
    worst = 0.0
    for u in (0.1, 1.0, 3.0):
        for r in (-0.6, 0.4):
            k = matcalc.power_beta(r)
            worst = max(worst, abs(matcalc.channel_factor(k, u) - matcalc.channel_factor(k, -u)))
    out.append(CheckResult("matcalc", "power factor even in the gap", worst, 1e-14))
    worst_tr = worst_fd = 0.0
    for _ in range(5):
        g, dg = _rand_herm(rng, 4), _rand_herm(rng, 4)
        es = eigh(g)
        deriv = matcalc.thermal_derivative(es, dg)
        worst_tr = max(worst_tr, abs(np.trace(deriv).real))
        eps = 1e-5

        def sig(gm):
            e = eigh(gm)
            w = np.exp(-(e.vals - e.vals.min()))
            return (e.vecs * (w / w.sum())) @ e.vecs.conj().T

        fd = (sig(g + eps * dg) - sig(g - eps * dg)) / (2 * eps)
        worst_fd = max(worst_fd, spectral_norm(deriv - fd))
    out.append(CheckResult("matcalc", "thermal derivative traceless", worst_tr, 1e-10))
    out.append(CheckResult("matcalc", "thermal derivative finite difference", worst_fd, 1e-6))
    g = _rand_herm(rng, 3)
    out.append(CheckResult("matcalc", "thermal derivative gauge invariance",
                           spectral_norm(matcalc.thermal_derivative(eigh(g), 0.7 * np.eye(3))), 1e-12))
    return out


def suite_gradients(seed: int = 55_007) -> list[CheckResult]:
    rng = _rng(seed)
    out = []
    worst = {"umegaki": 0.0, "tsallis": 0.0}
    for i in range(6):
        model = _model(rng, 3, 2)
        rho = _rand_state(rng, 3)
        for obj in (gradients.UMEGAKI, gradients.tsallis(0.5), gradients.tsallis(1.5)):
            rep = gradients.gradient(model, rho, obj)
            fd = finite_difference_gradient(
                lambda th: gradients.relative_entropy(
                    rho, models.thermalize(model.hamiltonian.with_theta(th)).sigma_v, obj),
                model.hamiltonian.theta)
            err = float(np.max(np.abs(rep.values - fd) / np.maximum(np.abs(fd), 1e-3)))
            worst[obj.kind] = max(worst[obj.kind], err)
    out.append(CheckResult("gradients", "finite-difference agreement [umegaki]",
                           worst["umegaki"], 1e-6))
    out.append(CheckResult("gradients", "finite-difference agreement [tsallis]",
                           worst["tsallis"], 1e-6))
    model = _model(rng, 3, 2)
    rep = gradients.gradient(model, model.sigma_v)
    out.append(CheckResult("gradients", "zero gradient at the fixed point",
                           float(np.max(np.abs(rep.values))), 1e-9))
    lifted = gradients.lift_to_joint(model, _rand_state(rng, 3))
    out.append(CheckResult("gradients", "lifted quasi-state has unit trace",
                           abs(np.trace(lifted).real - 1.0), 1e-10))
    out.append(CheckResult("gradients", "lifted quasi-state hermitian",
                           float(np.max(np.abs(lifted - lifted.conj().T))), 1e-12))
    m1 = _model(rng, 4, 1)
    rho1 = _rand_state(rng, 4)
    rep1 = gradients.gradient(m1, rho1)
    direct = np.array([expectation(t, rho1) for t in m1.hamiltonian.terms])
    out.append(CheckResult("gradients", "no-hidden-units first term is <G_j>_rho",
                           float(np.max(np.abs(rep1.first_terms - direct))), 1e-8))
    # continuity in the tsallis order near q = 1
    model = _model(rng, 2, 2)
    rho = _rand_state(rng, 2)
    base = gradients.gradient(model, rho).values
    dev = max(
        float(np.max(np.abs(gradients.gradient(model, rho, gradients.tsallis(1 + s)).values - base)))
        for s in (1e-4, -1e-4))
    out.append(CheckResult("gradients", "tsallis order continuity at q=1", dev, 1e-3))
    # classical reduction: diagonal terms against exact enumeration
    tables = rng.normal(size=(3, 3, 2))
    theta = rng.uniform(-0.5, 0.5, 3)
    dims = BipartiteDims(3, 2)
    diag_terms = tuple(
        as_hermitian(np.diag(tables[j].ravel()).astype(complex)) for j in range(3))
    dmodel = models.thermalize(models.ParamHamiltonian(dims=dims, terms=diag_terms, theta=theta))
    q_target = rng.random(3)
    q_target /= q_target.sum()
    rep = gradients.gradient(dmodel, np.diag(q_target).astype(complex))
    cls = gradients.classical_gradient(tables, theta, q_target)
    out.append(CheckResult("gradients", "diagonal model reduces to classical gradient",
                           float(np.max(np.abs(rep.values - cls))), 1e-10))
    # block-model consistency and the sorting POVM
    basis = _rand_basis(rng, 2)
    qc = models.qc_decompose(_qc_ham(rng, 3, 2, 3, basis), basis)
    rho = _rand_state(rng, 3)
    full = models.thermalize(models.ParamHamiltonian(
        dims=qc.dims, terms=_qc_terms_full(qc), theta=qc.theta))
    out.append(CheckResult("gradients", "block-hidden gradient matches generic",
                           float(np.max(np.abs(gradients.gradient_qc(qc, rho).values
                                               - gradients.gradient(full, rho).values))), 1e-8))
    povm = gradients.pgm_povm(qc)
    comp = spectral_norm(sum(povm.elements) - np.eye(qc.dims.d_v))
    out.append(CheckResult("gradients", "sorting POVM completeness", comp, 1e-10))
    psd = -min(float(np.linalg.eigvalsh(e)[0]) for e in povm.elements)
    out.append(CheckResult("gradients", "sorting POVM positivity", psd, 1e-10))
    probs = gradients.povm_probs(povm, rho)
    out.append(CheckResult("gradients", "sorting POVM outcome normalization",
                           abs(float(probs.sum()) - 1.0), 1e-10))
    return out


def suite_estimator(seed: int = 99_003) -> list[CheckResult]:
    rng = _rng(seed)
    out = []
    # dilation extraction
    worst = 0.0
    for _ in range(5):
        c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        c /= spectral_norm(c) * 1.1
        be = estimator.dilate(c, 1.0)
        worst = max(worst, spectral_norm(be.extract() - c))
    out.append(CheckResult("estimator", "dilation extracts the contraction", worst, 1e-12))
    model = _model(rng, 2, 2)
    u1 = estimator.modular_unitary(model, 0.7).unitary
    u2 = estimator.modular_unitary(model, -1.9).unitary
    u12 = estimator.modular_unitary(model, 0.7 - 1.9).unitary
    out.append(CheckResult("estimator", "modular flow group law",
                           spectral_norm(u1 @ u2 - u12), 1e-10))
    inv = estimator.inv_sqrt_encoding(model)
    out.append(CheckResult("estimator", "inverse-root encoding extraction",
                           spectral_norm(inv.extract() - model.sigma_v_eig.power(-0.5)), 1e-10))
    out.append(CheckResult("estimator", "inverse-root normalization alpha^2 = kappa",
                           abs(inv.alpha**2 - model.kappa), 1e-10 * model.kappa))
    rho = _rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    s, t = 0.9, -0.4
    val = estimator.circuit_expectation(model, rho, g_j, s, t)
    direct = _direct_trace_formula(model, rho, g_j, s, t)
    out.append(CheckResult("estimator", "circuit matches the trace formula",
                           abs(val - direct), 1e-8))
    exact = gradients.gradient(model, rho).first_terms[0]
    qavg = estimator.quadrature_first_term(model, rho, g_j)
    out.append(CheckResult("estimator", "quadrature average matches lifted term",
                           abs(qavg - exact), 1e-6))
    mean, stderr, shots = estimator.estimate_first_term(
        model, rho, g_j, estimator.EstimatorConfig(epsilon=0.1, delta_fail=0.05, seed=seed))
    out.append(CheckResult("estimator", "shot mean within 5 stderr of exact",
                           abs(mean - exact), 5 * stderr))
    out.append(CheckResult("estimator", "hoeffding count example",
                           abs(estimator.hoeffding_shots(1, 1, 0.1, 0.05) - 738), 0.5))
    # composed block-encoding bound (20 perturbation trials)
    worst = -1.0
    for _ in range(20):
        gap = _be_bound_gap(rng)
        worst = max(worst, gap)
    out.append(CheckResult("estimator", "composed encoding error within bound",
                           worst, 0.0 + 1e-30))
    # budget split inequality on a grid
    worst = -1.0
    for kappa in (1.0, 2.0, 10.0, 100.0):
        for g_norm in (0.5, 1.0, 4.0):
            for eps in (0.01, 0.1, 0.5):
                e1, e2 = estimator.budget_split(eps, kappa, g_norm)
                worst = max(worst, estimator.error_budget(e1, e2, kappa, g_norm) - eps / 2)
    out.append(CheckResult("estimator", "budget split keeps bias below eps/2",
                           worst, 0.0 + 1e-30))
    cost2 = estimator.query_cost("full_algorithm", 2.0, epsilon=1e-3)
    cost4 = estimator.query_cost("full_algorithm", 4.0, epsilon=1e-3)
    out.append(CheckResult("estimator", "full-algorithm cost scales ~ kappa^3",
                           abs(cost4 / cost2 / 8.0 - 1.0), 0.2))
    d_inv = (estimator.query_cost("inv_sqrt", 3.0, epsilon=1e-3)
             - estimator.query_cost("inv_sqrt", 3.0, epsilon=1e-2))
    out.append(CheckResult("estimator", "inverse-root cost gains ln(10) per decade",
                           abs(d_inv - 3.0 * np.log(10.0)), 1e-9))
    return out


def run_suites(names: list[str]) -> list[CheckResult]:
    table = {
        "matcalc": suite_matcalc,
        "densities": suite_densities,
        "gradients": suite_gradients,
        "estimator": suite_estimator,
    }
    out: list[CheckResult] = []
    for name in names:
        if name not in table:
            raise SpecError(f"unknown suite {name!r}; pick from {SUITES} or 'all'")
        out.extend(table[name]())
    return out


def _dname(d: densities.Density) -> str:
    return d.kind if d.r is None else f"{d.kind}({d.r})"


def _rand_basis(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q_mat, r = np.linalg.qr(a)
    return q_mat * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _qc_ham(rng, d_v, d_h, n_terms, basis=None):
    basis = np.eye(d_h, dtype=complex) if basis is None else basis
    terms = []
    for _ in range(n_terms):
        t = np.zeros((d_v * d_h, d_v * d_h), dtype=complex)
        for x in range(d_h):
            t += tensor(_rand_herm(rng, d_v, 0.5), np.outer(basis[:, x], basis[:, x].conj()))
        terms.append(as_hermitian(t))
    theta = rng.uniform(-0.5, 0.5, n_terms)
    return models.ParamHamiltonian(dims=BipartiteDims(d_v, d_h), terms=tuple(terms), theta=theta)


def _qc_terms_full(qc: models.QCModel):
    w = qc.hidden_basis
    terms = []
    for j in range(qc.n_params):
        t = np.zeros((qc.dims.total, qc.dims.total), dtype=complex)
        for x in range(qc.dims.d_h):
            t += tensor(qc.terms_x[j][x], np.outer(w[:, x], w[:, x].conj()))
        terms.append(as_hermitian(t))
    return tuple(terms)


def _direct_trace_formula(model, rho, g_j, s, t):
    sv = model.sigma_v_eig
    u_s = (sv.vecs * np.exp(-0.5j * s * np.log(sv.vals))) @ sv.vecs.conj().T
    inv_sqrt = sv.power(-0.5)
    a = inv_sqrt @ u_s @ rho @ u_s.conj().T @ inv_sqrt
    ge = model.g_eig
    u_t = (ge.vecs * np.exp(1j * ge.vals * t)) @ ge.vecs.conj().T
    o_t = u_t @ g_j @ u_t.conj().T
    ai = tensor(a, np.eye(model.dims.d_h))
    return 0.5 * np.trace(o_t @ (model.sigma_vh @ ai + ai @ model.sigma_vh)).real


def perturb_encoding(be: estimator.BlockEncoding, rng, *, scale: float = 0.05):
    """Left-multiply by exp(i N) noise; returns (perturbed, exact target).

    The declared delta is the exactly measured extraction error, so the
    perturbed object remains an honest (alpha, delta)-encoding.
    """
    n = eigh(_rand_herm(rng, be.unitary.shape[0], rng.random() * scale))
    rot = (n.vecs * np.exp(1j * n.vals)) @ n.vecs.conj().T
    target = be.extract()
    pert = estimator.BlockEncoding(rot @ be.unitary, be.alpha, be.ancillas, 0.0)
    delta = spectral_norm(pert.extract() - target)
    return estimator.BlockEncoding(pert.unitary, be.alpha, be.ancillas, delta), target


def _be_bound_gap(rng) -> float:
    """Measured composition error minus the declared bound (must be <= 0)."""
    d = 3
    a_mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b_mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    alpha = spectral_norm(a_mat) * (1 + rng.random())
    beta = spectral_norm(b_mat) * (1 + rng.random())
    up, a_target = perturb_encoding(estimator.dilate(a_mat / alpha, alpha), rng)
    vp, b_target = perturb_encoding(estimator.dilate(b_mat / beta, beta), rng)
    # compose on registers (anc_u, anc_v, system); apply V first, then U
    w = _embed_first(up.unitary, d) @ _embed_second(vp.unitary, d)
    extracted = (up.alpha * vp.alpha) * w[:d, :d]
    meta = estimator.be_product(up.meta, vp.meta)
    measured = spectral_norm(a_target @ b_target - extracted)
    return measured - meta.delta


def _embed_first(u, d):
    """Lift a (2d x 2d) one-ancilla unitary to (anc_u, anc_v, sys) registers."""
    blocks = u.reshape(2, d, 2, d)
    out = np.zeros((4 * d, 4 * d), dtype=complex)
    big = out.reshape(2, 2, d, 2, 2, d)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                big[i, k, :, j, k, :] = blocks[i, :, j, :]
    return out


def _embed_second(u, d):
    blocks = u.reshape(2, d, 2, d)
    out = np.zeros((4 * d, 4 * d), dtype=complex)
    big = out.reshape(2, 2, d, 2, 2, d)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                big[k, i, :, k, j, :] = blocks[i, :, j, :]
    return out
