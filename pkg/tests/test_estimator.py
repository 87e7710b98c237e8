import math

import numpy as np
import pytest

from qbmgrad import (
    BEMeta,
    BipartiteDims,
    EstimatorConfig,
    HIGH_PEAK_TENT,
    LOGISTIC,
    ParamHamiltonian,
    ScaleError,
    SeededSampler,
    SpecError,
    be_product,
    budget_split,
    circuit_expectation,
    dilate,
    error_budget,
    estimate_first_term,
    estimate_model_term,
    gradient,
    hoeffding_shots,
    inv_sqrt_encoding,
    modular_unitary,
    quadrature_first_term,
    query_cost,
    shot_sample,
    spectral_norm,
    thermalize,
)
from qbmgrad.estimator import (
    _batch_context,
    _batch_outcomes,
    _circuit_pieces,
    eigen_groups,
    outcome_distribution,
)
from qbmgrad.verify import perturb_encoding
from conftest import PAULI_Z, rand_herm, rand_model, rand_state, rand_unitary


def test_dilate_unitary_input(rng):
    u = rand_unitary(rng, 3)
    be = dilate(u, 1.0)
    assert spectral_norm(be.unitary[:3, :3] - u) < 1e-12


def test_dilate_zero_matrix():
    be = dilate(np.zeros((2, 2)), 1.0)
    assert spectral_norm(be.extract()) == 0.0
    assert spectral_norm(be.unitary.conj().T @ be.unitary - np.eye(4)) < 1e-12


def test_dilate_extraction_oracle(rng):
    c = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    c /= spectral_norm(c) * 1.25
    be = dilate(c, 2.5)
    assert spectral_norm(be.extract() - 2.5 * c) < 1e-12
    assert spectral_norm(be.unitary.conj().T @ be.unitary - np.eye(8)) < 1e-10


def test_dilate_rejects_expansion(rng):
    with pytest.raises(SpecError):
        dilate(1.5 * np.eye(2), 1.0)


def test_modular_unitary_at_zero(rng):
    model = rand_model(rng, 2, 2)
    assert spectral_norm(modular_unitary(model, 0.0).unitary - np.eye(2)) < 1e-12


def test_modular_unitary_maximally_mixed_is_phase(rng):
    ham = ParamHamiltonian(dims=BipartiteDims(3, 1),
                           terms=(rand_herm(rng, 3),), theta=np.zeros(1))
    model = thermalize(ham)
    s = 1.3
    want = 3.0 ** (0.5j * s) * np.eye(3)
    assert spectral_norm(modular_unitary(model, s).unitary - want) < 1e-12


def test_modular_unitary_group_law(rng):
    model = rand_model(rng, 3, 2)
    u = modular_unitary(model, 0.8).unitary @ modular_unitary(model, -2.1).unitary
    assert spectral_norm(u - modular_unitary(model, -1.3).unitary) < 1e-10


def test_inv_sqrt_identity_case(rng):
    ham = ParamHamiltonian(dims=BipartiteDims(3, 1),
                           terms=(rand_herm(rng, 3),), theta=np.zeros(1))
    model = thermalize(ham)  # sigma_v = I/3, kappa = 3
    be = inv_sqrt_encoding(model)
    assert spectral_norm(be.unitary[:3, :3] - np.eye(3)) < 1e-10


def test_inv_sqrt_extraction_and_alpha(rng):
    model = rand_model(rng, 3, 2)
    be = inv_sqrt_encoding(model)
    assert spectral_norm(be.extract() - model.sigma_v_eig.power(-0.5)) < 1e-10
    assert abs(be.alpha**2 - model.kappa) < 1e-10 * model.kappa


def test_circuit_fixed_point_no_hidden(rng):
    ham = ParamHamiltonian(dims=BipartiteDims(2, 1),
                           terms=(PAULI_Z,), theta=np.array([0.6]))
    model = thermalize(ham)
    val = circuit_expectation(model, model.sigma_v, PAULI_Z, 0.0, 0.0)
    from qbmgrad import expectation

    assert abs(val - expectation(PAULI_Z, model.sigma_v)) < 1e-10


def test_circuit_matches_trace_formula(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    sv = model.sigma_v_eig
    for s, t in [(0.9, -0.4), (-2.2, 1.7)]:
        u_s = (sv.vecs * np.exp(-0.5j * s * np.log(sv.vals))) @ sv.vecs.conj().T
        inv = sv.power(-0.5)
        a = inv @ u_s @ rho @ u_s.conj().T @ inv
        ge = model.g_eig
        u_t = (ge.vecs * np.exp(1j * ge.vals * t)) @ ge.vecs.conj().T
        o_t = u_t @ g_j @ u_t.conj().T
        ai = np.kron(a, np.eye(2))
        want = 0.5 * np.trace(o_t @ (model.sigma_vh @ ai + ai @ model.sigma_vh)).real
        assert abs(circuit_expectation(model, rho, g_j, s, t) - want) < 1e-8


def test_circuit_state_is_physical(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    tau, _, _ = _circuit_pieces(model, rho, 0.7, -0.9, model.hamiltonian.terms[0], None, None)
    assert abs(np.trace(tau).real - 1.0) < 1e-9
    assert np.linalg.eigvalsh((tau + tau.conj().T) / 2)[0] > -1e-9


def test_circuit_register_guard(rng):
    with pytest.raises(ScaleError):
        model = rand_model(rng, 8, 4, n_terms=1, term_scale=0.1)
        circuit_expectation(model, rand_state(rng, 8),
                            model.hamiltonian.terms[0], 0.0, 0.0)


def test_quadrature_average_matches_lifted_term(rng):
    for _ in range(2):
        model = rand_model(rng, 2, 2)
        rho = rand_state(rng, 2)
        g_j = model.hamiltonian.terms[0]
        exact = gradient(model, rho).first_terms[0]
        assert abs(quadrature_first_term(model, rho, g_j) - exact) < 1e-6


def test_quadrature_equals_double_grid_average(rng):
    # bilinearity: the folded t-average equals the plain double loop
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[1]
    from qbmgrad.densities import expectation_nodes
    from qbmgrad.estimator import _logistic_panels

    t_pts, t_wts, t_w0 = expectation_nodes(HIGH_PEAK_TENT, T=4.0, nodes=64)
    s_pts, s_wts = _logistic_panels(4.0, 2, 8)
    brute = 0.0
    for s_i, ws in zip(s_pts, s_wts):
        brute += ws * t_w0 * circuit_expectation(model, rho, g_j, s_i, 0.0)
        for t_i, wt in zip(t_pts, t_wts):
            brute += ws * wt * circuit_expectation(model, rho, g_j, s_i, t_i)
    fast = quadrature_first_term(model, rho, g_j, s_max=4.0, t_max=4.0,
                                 s_panels=2, s_nodes=8, t_nodes=64)
    assert abs(fast - brute) < 1e-10


def test_eigen_groups_handles_degeneracy():
    g = np.diag([1.0, 1.0, -2.0]).astype(complex)
    values, projs = eigen_groups(g)
    assert np.allclose(values, [-2.0, 1.0])
    assert abs(np.trace(projs[1]).real - 2.0) < 1e-12


def test_outcome_distribution_normalized_and_bounded(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    z, g, y, p = outcome_distribution(model, rho, g_j, 0.4, -1.1)
    assert abs(p.sum() - 1.0) < 1e-10
    assert np.all(np.abs(y) <= spectral_norm(g_j) + 1e-12)


def test_batch_outcomes_match_honest_path(rng):
    model = rand_model(rng, 3, 2)
    rho = rand_state(rng, 3)
    g_j = model.hamiltonian.terms[0]
    ctx = _batch_context(model, rho, g_j)
    for s_i, t_i in [(0.0, 0.0), (1.3, -0.8), (-3.0, 2.2)]:
        yv, probs = _batch_outcomes(ctx, np.array([s_i]), np.array([t_i]))
        z, g, y, p = outcome_distribution(model, rho, g_j, s_i, t_i)

        def agg(ys, ps):
            out = {}
            for yy, pp in zip(ys, ps):
                out[round(float(yy), 9)] = out.get(round(float(yy), 9), 0.0) + pp
            return out

        a, b = agg(yv, probs[0]), agg(y, p)
        assert set(a) == set(b)
        assert all(abs(a[k] - b[k]) < 1e-10 for k in a)


def test_shot_sample_deterministic_and_bounded(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    recs = []
    for _ in range(2):
        s_s = SeededSampler(LOGISTIC, 11)
        s_t = SeededSampler(HIGH_PEAK_TENT, 12)
        r = np.random.default_rng(13)
        recs.append([shot_sample(model, rho, g_j, s_s, s_t, r) for _ in range(5)])
    assert recs[0] == recs[1]
    g_norm = spectral_norm(g_j)
    for rec in recs[0]:
        assert abs(rec.y) <= g_norm + 1e-12
        assert rec.y == (-1) ** rec.z * rec.g


def test_estimate_fixed_point_no_hidden(rng):
    ham = ParamHamiltonian(dims=BipartiteDims(2, 1), terms=(PAULI_Z,),
                           theta=np.array([0.5]))
    model = thermalize(ham)
    from qbmgrad import expectation

    want = expectation(PAULI_Z, model.sigma_v)
    mean, stderr, _ = estimate_first_term(
        model, model.sigma_v, PAULI_Z, EstimatorConfig(shots=60_000, seed=21))
    assert abs(mean - want) < 3 * stderr


def test_estimate_unbiased_against_exact(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    exact = gradient(model, rho).first_terms[0]
    cfg = EstimatorConfig(epsilon=0.05, delta_fail=0.05, shots=100_000, seed=3)
    mean, stderr, shots = estimate_first_term(model, rho, g_j, cfg)
    assert shots == 100_000
    assert abs(mean - exact) < 5 * stderr


def test_estimate_stderr_scales_inverse_sqrt(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    _, se1, _ = estimate_first_term(model, rho, g_j,
                                    EstimatorConfig(shots=4000, seed=1))
    _, se2, _ = estimate_first_term(model, rho, g_j,
                                    EstimatorConfig(shots=64_000, seed=1))
    assert se2 < se1 / 2.5  # expect ~1/4


def test_estimate_reproducible_across_threads(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    a = estimate_first_term(model, rho, g_j, EstimatorConfig(shots=20_000, seed=9))
    b = estimate_first_term(model, rho, g_j,
                            EstimatorConfig(shots=20_000, seed=9, threads=4))
    assert a[0] == b[0]


def test_estimate_model_term(rng):
    model = rand_model(rng, 2, 2)
    g_j = model.hamiltonian.terms[0]
    from qbmgrad import expectation

    exact = expectation(g_j, model.sigma_vh)
    mean, stderr = estimate_model_term(model, g_j, 200_000, seed=5)
    assert abs(mean - exact) < 5 * stderr


def test_hoeffding_example_and_scaling():
    assert hoeffding_shots(1.0, 1.0, 0.1, 0.05) == 738
    m1 = hoeffding_shots(1.0, 1.0, 0.05, 0.05)
    m2 = hoeffding_shots(1.0, 1.0, 0.1, 0.05)
    assert abs(m1 - 4 * m2) <= 4  # doubling eps quarters M up to ceiling
    m4 = hoeffding_shots(2.0, 1.0, 0.1, 0.05)
    assert abs(m4 - 4 * m2) <= 4  # M scales as kappa^2


def test_be_product_exact_composition():
    meta = be_product(BEMeta(2.0, 1, 0.0), BEMeta(3.0, 1, 0.0))
    assert meta == BEMeta(6.0, 2, 0.0)


def test_be_product_specific_bound():
    kappa = 9.0
    e1, e2 = 0.01, 0.02
    meta = be_product(BEMeta(1.0, 0, e1), BEMeta(math.sqrt(kappa), 1, e2))
    assert abs(meta.delta - (e2 + e1 * (math.sqrt(kappa) + e2))) < 1e-15


def test_be_product_bound_never_violated(rng):
    from qbmgrad.verify import _be_bound_gap

    for _ in range(100):
        assert _be_bound_gap(rng) <= 0.0


def test_error_budget_and_split():
    assert error_budget(0.0, 0.0, 5.0, 2.0) == 0.0
    for kappa in (1.0, 4.0, 50.0):
        for g_norm in (0.5, 2.0):
            for eps in (0.02, 0.2):
                e1, e2 = budget_split(eps, kappa, g_norm)
                assert error_budget(e1, e2, kappa, g_norm) <= eps / 2


def test_budget_split_bounds_measured_bias(rng):
    model = rand_model(rng, 2, 2)
    rho = rand_state(rng, 2)
    g_j = model.hamiltonian.terms[0]
    g_norm = spectral_norm(g_j)
    eps = 0.2
    e1, e2 = budget_split(eps, model.kappa, g_norm)
    exact = gradient(model, rho).first_terms[0]
    noise1 = _unitary_noise(rng, model.dims.d_v, e1)
    inv = inv_sqrt_encoding(model)
    inv_p, _ = perturb_encoding(inv, rng, scale=0.5 * e2 / inv.alpha)
    assert inv_p.delta <= e2
    biased = quadrature_first_term(model, rho, g_j, modular_noise=noise1, inv_sqrt=inv_p)
    assert abs(biased - exact) <= eps / 2


def _unitary_noise(rng, d, target_norm):
    """Unitary with |U - I| exactly target_norm (rotation angle control)."""
    h = rand_herm(rng, d)
    h = h / spectral_norm(h)
    angle = 2.0 * math.asin(min(target_norm, 2.0) / 2.0)
    w, v = np.linalg.eigh(h * angle)
    return (v * np.exp(1j * w)) @ v.conj().T


def test_query_cost_scalings():
    c2 = query_cost("full_algorithm", 2.0, epsilon=1e-3)
    c4 = query_cost("full_algorithm", 4.0, epsilon=1e-3)
    assert 8.0 <= c4 / c2 <= 8.0 * 1.2
    d = (query_cost("inv_sqrt", 3.0, epsilon=1e-3)
         - query_cost("inv_sqrt", 3.0, epsilon=1e-2))
    assert abs(d - 3.0 * math.log(10.0)) < 1e-9
    assert query_cost("modular_flow", 5.0, s=0.0) == 1.0
    assert query_cost("modular_flow", 5.0, s=2.0) > 1.0
    with pytest.raises(SpecError):
        query_cost("bogus", 1.0)


def test_estimator_config_validation():
    with pytest.raises(SpecError):
        EstimatorConfig(epsilon=-0.1)
    with pytest.raises(SpecError):
        EstimatorConfig(delta_fail=1.5)
