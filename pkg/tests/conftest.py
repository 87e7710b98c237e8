import numpy as np
import pytest

from qbmgrad import BipartiteDims, ParamHamiltonian, as_hermitian, tensor, thermalize


def rand_herm(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return as_hermitian((a + a.conj().T) / 2 * scale)


def rand_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return m / np.trace(m).real


def rand_pd(rng, d, spread=0.5):
    """Random positive definite matrix with eigenvalues in ~[e^-spread, e^spread]."""
    h = rand_herm(rng, d, spread)
    w, v = np.linalg.eigh(h)
    return as_hermitian((v * np.exp(w)) @ v.conj().T)


def rand_unitary(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def rand_model(rng, d_v, d_h, n_terms=3, term_scale=0.4, theta_scale=0.5):
    dims = BipartiteDims(d_v, d_h)
    terms = tuple(rand_herm(rng, dims.total, term_scale) for _ in range(n_terms))
    theta = rng.uniform(-theta_scale, theta_scale, size=n_terms)
    return thermalize(ParamHamiltonian(dims=dims, terms=terms, theta=theta))


def block_hidden_terms(rng, d_v, d_h, n_terms, basis, scale=0.5):
    """Terms of the form sum_x A_{j,x} (x) |x><x|_h over the given basis."""
    terms = []
    for _ in range(n_terms):
        t = np.zeros((d_v * d_h, d_v * d_h), dtype=complex)
        for x in range(d_h):
            proj = np.outer(basis[:, x], basis[:, x].conj())
            t += tensor(rand_herm(rng, d_v, scale), proj)
        terms.append(as_hermitian(t))
    return tuple(terms)


def block_visible_terms(rng, d_v, d_h, n_terms, basis, scale=0.5):
    terms = []
    for _ in range(n_terms):
        t = np.zeros((d_v * d_h, d_v * d_h), dtype=complex)
        for x in range(d_v):
            proj = np.outer(basis[:, x], basis[:, x].conj())
            t += tensor(proj, rand_herm(rng, d_h, scale))
        terms.append(as_hermitian(t))
    return tuple(terms)


PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20_240_817)
