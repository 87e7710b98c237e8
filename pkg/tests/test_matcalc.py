import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbmgrad import (
    EXP_TENT,
    EvalMode,
    LOG_LOGISTIC,
    SpecError,
    apply_channel,
    channel_factor,
    eigh,
    frechet_exp,
    frechet_log,
    frechet_power,
    power_beta,
    spectral_norm,
    thermal_derivative,
)
from qbmgrad.densities import HIGH_PEAK_TENT, expectation_nodes
from conftest import rand_herm, rand_pd

QUAD = EvalMode("quadrature", T=10.0, nodes=4096)


def test_factor_is_one_at_zero_gap():
    for kind in (EXP_TENT, LOG_LOGISTIC, power_beta(0.3), power_beta(-0.8)):
        assert channel_factor(kind, 0.0) == 1.0


def test_power_factor_approaches_logistic_factor():
    u = 2.0
    f_power = channel_factor(power_beta(1e-6), u)
    f_log = channel_factor(LOG_LOGISTIC, u)
    assert abs(f_power - f_log) < 1e-5


def test_exp_factor_matches_quadrature_oracle():
    # int gamma(t) e^{-2it} dt computed by density quadrature
    t, w, w0 = expectation_nodes(HIGH_PEAK_TENT, T=12.0, nodes=4096)
    oracle = float(np.sum(w * np.cos(2.0 * t))) + w0
    assert abs(channel_factor(EXP_TENT, 2.0) - np.tanh(1.0)) < 1e-12
    assert abs(channel_factor(EXP_TENT, 2.0) - oracle) < 1e-8


@settings(max_examples=25, deadline=None)
@given(u=st.floats(0.0, 30.0), r=st.floats(-0.9, 0.9))
def test_factors_even_and_bounded(u, r):
    kinds = [EXP_TENT, LOG_LOGISTIC]
    if abs(r) > 1e-3:
        kinds.append(power_beta(r))
    for kind in kinds:
        f = channel_factor(kind, u)
        assert f == channel_factor(kind, -u)
        assert 0.0 < f <= 1.0 + 1e-12


def test_channel_fixes_commuting_input(rng):
    d = np.diag([0.3, 1.1, 2.4])
    y = np.diag([1.0, -2.0, 0.5]).astype(complex)
    for kind in (EXP_TENT, LOG_LOGISTIC, power_beta(0.5)):
        out = apply_channel(kind, eigh(d), y)
        assert spectral_norm(out - y) < 1e-12


def test_channel_unitality(rng):
    a = rand_pd(rng, 4)
    out = apply_channel(LOG_LOGISTIC, eigh(a), np.eye(4))
    assert spectral_norm(out - np.eye(4)) < 1e-12


def test_channel_trace_preservation(rng):
    for _ in range(20):
        y = rand_herm(rng, 4)
        assert abs(np.trace(apply_channel(EXP_TENT, eigh(rand_herm(rng, 4)), y)).real
                   - np.trace(y).real) < 1e-10
        assert abs(np.trace(apply_channel(LOG_LOGISTIC, eigh(rand_pd(rng, 4)), y)).real
                   - np.trace(y).real) < 1e-10


@pytest.mark.parametrize("kind_name", ["exp_tent", "log_logistic", "power_beta"])
def test_spectral_vs_quadrature(rng, kind_name):
    kind = {"exp_tent": EXP_TENT, "log_logistic": LOG_LOGISTIC,
            "power_beta": power_beta(0.5)}[kind_name]
    y = rand_herm(rng, 4)
    anchor = eigh(rand_herm(rng, 4)) if kind_name == "exp_tent" else eigh(rand_pd(rng, 4))
    a = apply_channel(kind, anchor, y)
    b = apply_channel(kind, anchor, y, QUAD)
    assert spectral_norm(a - b) < 1e-8


def test_channel_rejects_nonpositive_anchor(rng):
    anchor = eigh(np.diag([1.0, -0.5]))
    with pytest.raises(SpecError):
        apply_channel(LOG_LOGISTIC, anchor, np.eye(2))


def test_frechet_exp_commuting_reduction():
    b = np.diag([0.2, -0.7]).astype(complex)
    h = np.diag([1.0, 2.0]).astype(complex)
    want = h @ np.diag(np.exp(np.diagonal(b).real))
    for mode in ("duhamel", "fourier"):
        assert spectral_norm(frechet_exp(b, h, mode) - want) < 1e-12


def test_frechet_exp_at_zero_base(rng):
    h = rand_herm(rng, 3)
    assert spectral_norm(frechet_exp(np.zeros((3, 3)), h) - h) < 1e-12


def test_frechet_exp_finite_difference(rng):
    b, h = rand_herm(rng, 3), rand_herm(rng, 3)
    eps = 1e-5
    fd = (eigh(b + eps * h).apply(np.exp) - eigh(b - eps * h).apply(np.exp)) / (2 * eps)
    for mode in ("duhamel", "fourier"):
        assert spectral_norm(frechet_exp(b, h, mode) - fd) < 1e-6


def test_frechet_exp_modes_agree(rng):
    for _ in range(5):
        b, h = rand_herm(rng, 4), rand_herm(rng, 4)
        assert spectral_norm(frechet_exp(b, h, "duhamel") - frechet_exp(b, h, "fourier")) < 1e-8


def test_frechet_log_commuting_reduction():
    a = np.diag([0.5, 2.0]).astype(complex)
    h = np.diag([1.0, -1.0]).astype(complex)
    assert spectral_norm(frechet_log(a, h) - h @ np.linalg.inv(a)) < 1e-12
    assert spectral_norm(frechet_log(np.eye(3), np.ones((3, 3))) - np.ones((3, 3))) < 1e-12


def test_frechet_log_finite_difference(rng):
    a, h = rand_pd(rng, 3), rand_herm(rng, 3)
    eps = 1e-5
    fd = (eigh(a + eps * h).apply(np.log) - eigh(a - eps * h).apply(np.log)) / (2 * eps)
    assert spectral_norm(frechet_log(a, h) - fd) < 1e-6


def test_frechet_log_resolvent_mode(rng):
    a, h = rand_pd(rng, 3), rand_herm(rng, 3)
    assert spectral_norm(frechet_log(a, h) - frechet_log(a, h, "resolvent")) < 1e-8


def test_frechet_log_requires_positive(rng):
    with pytest.raises(SpecError):
        frechet_log(np.diag([1.0, -1.0]), np.eye(2))


def test_frechet_power_commuting_reduction():
    a = np.diag([0.5, 2.0]).astype(complex)
    h = np.diag([1.0, 3.0]).astype(complex)
    r = 0.4
    want = r * np.diag(np.diagonal(a).real ** (r - 1)) @ h
    assert spectral_norm(frechet_power(a, h, r) - want) < 1e-12


def test_frechet_power_small_r_is_log(rng):
    a, h = rand_pd(rng, 3), rand_herm(rng, 3)
    assert spectral_norm(frechet_power(a, h, 1e-6) / 1e-6 - frechet_log(a, h)) < 1e-4


def test_frechet_power_finite_difference(rng):
    for r in (-0.5, 0.3, 0.9):
        a, h = rand_pd(rng, 3), rand_herm(rng, 3)
        eps = 1e-5
        fd = (eigh(a + eps * h).power(r) - eigh(a - eps * h).power(r)) / (2 * eps)
        assert spectral_norm(frechet_power(a, h, r) - fd) < 1e-6


def test_frechet_power_rejects_bad_r(rng):
    with pytest.raises(SpecError):
        frechet_power(rand_pd(rng, 2), np.eye(2), 1.5)


def _gibbs(g):
    es = eigh(g)
    w = np.exp(-(es.vals - es.vals.min()))
    return (es.vecs * (w / w.sum())) @ es.vecs.conj().T


def test_thermal_derivative_gauge_invariance(rng):
    g = rand_herm(rng, 3)
    out = thermal_derivative(eigh(g), 0.37 * np.eye(3))
    assert spectral_norm(out) < 1e-12


def test_thermal_derivative_diagonal_closed_form():
    g = np.diag([0.4, -0.2, 1.0]).astype(complex)
    dg = np.diag([1.0, 2.0, -0.5]).astype(complex)
    sigma = _gibbs(g)
    mean = np.trace(dg @ sigma).real
    want = -sigma @ (dg - mean * np.eye(3))
    assert spectral_norm(thermal_derivative(eigh(g), dg) - want) < 1e-12


def test_thermal_derivative_finite_difference(rng):
    g, dg = rand_herm(rng, 4), rand_herm(rng, 4)
    eps = 1e-5
    fd = (_gibbs(g + eps * dg) - _gibbs(g - eps * dg)) / (2 * eps)
    out = thermal_derivative(eigh(g), dg)
    assert spectral_norm(out - fd) < 1e-6
    assert abs(np.trace(out).real) < 1e-10


def test_eval_mode_validation():
    with pytest.raises(SpecError):
        EvalMode("quadrature", T=-1.0)
    with pytest.raises(SpecError):
        EvalMode("quadrature", nodes=32)
    with pytest.raises(SpecError):
        power_beta(0.0)
