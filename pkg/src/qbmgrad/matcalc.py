"""Frechet derivatives of exp/log/power and their random-evolution channels.

Each derivative has two interchangeable forms: an integral representation
(Duhamel / resolvent) and a channel form, where the channel averages a
unitary evolution over one of the densities in :mod:`qbmgrad.densities`.
In the anchor eigenbasis a channel multiplies entry (k, l) by the Fourier
transform of its density evaluated at the spectral gap, so the production
path is spectral and exact; time-domain quadrature exists as a cross-check.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import densities
from .errors import SpecError
from .linalg import Eigensystem, as_hermitian, eigh, hermitize

DEGENERATE_GAP_RTOL = 1e-10


@dataclass(frozen=True)
class ChannelKind:
    """Which density weights the random evolution, and what the gap means.

    * ``exp_tent``:      anchor is a Hermitian generator B; gap = lambda_k - lambda_l.
    * ``log_logistic``:  anchor is positive definite A; gap = ln lambda_k - ln lambda_l.
    * ``power_beta``:    like log_logistic, with exponent r in (-1,0) u (0,1).
    """

    name: str
    r: float | None = None

    def __post_init__(self):
        if self.name not in ("exp_tent", "log_logistic", "power_beta"):
            raise SpecError(f"unknown channel kind {self.name!r}")
        if self.name == "power_beta":
            if self.r is None or not (-1.0 < self.r < 1.0) or self.r == 0.0:
                raise SpecError(f"power_beta needs r in (-1,0) u (0,1), got {self.r}")
        elif self.r is not None:
            raise SpecError(f"{self.name} takes no r parameter")

    @property
    def density(self) -> densities.Density:
        if self.name == "exp_tent":
            return densities.HIGH_PEAK_TENT
        if self.name == "log_logistic":
            return densities.LOGISTIC
        return densities.power_density(self.r)


EXP_TENT = ChannelKind("exp_tent")
LOG_LOGISTIC = ChannelKind("log_logistic")


def power_beta(r: float) -> ChannelKind:
    return ChannelKind("power_beta", float(r))


@dataclass(frozen=True)
class EvalMode:
    """Spectral (exact, default) or truncated time-quadrature evaluation."""

    name: str = "spectral"
    T: float = 10.0
    nodes: int = 4096

    def __post_init__(self):
        if self.name not in ("spectral", "quadrature"):
            raise SpecError(f"unknown eval mode {self.name!r}")
        if self.T <= 0.0:
            raise SpecError("truncation T must be positive")
        if self.nodes < 64:
            raise SpecError("need at least 64 quadrature nodes")


SPECTRAL = EvalMode("spectral")


def channel_factor(kind: ChannelKind, u) -> np.ndarray | float:
    """Fourier transform of the channel's density at spectral gap u.

    exp_tent   -> tanh(u/2) / (u/2)
    log_logistic -> (u/2) / sinh(u/2)
    power_beta(r) -> sinh(r u / 2) / (r sinh(u / 2))

    All are even in u and equal 1 in the u -> 0 limit.
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < DEGENERATE_GAP_RTOL * max(1.0, float(np.max(np.abs(u), initial=0.0)))
    safe = np.where(small, 1.0, u)
    if kind.name == "exp_tent":
        out = np.where(small, 1.0, np.tanh(safe / 2.0) / (safe / 2.0))
    elif kind.name == "log_logistic":
        out = np.where(small, 1.0, (safe / 2.0) / np.sinh(safe / 2.0))
    else:
        out = np.where(small, 1.0, np.sinh(kind.r * safe / 2.0) / (kind.r * np.sinh(safe / 2.0)))
    return out if out.ndim else float(out)


def _gaps(kind: ChannelKind, anchor: Eigensystem) -> np.ndarray:
    if kind.name == "exp_tent":
        lam = anchor.vals
        return lam[:, None] - lam[None, :]
    if np.any(anchor.vals <= 0.0):
        raise SpecError(f"{kind.name} channel needs a positive definite anchor")
    loglam = np.log(anchor.vals)
    return loglam[:, None] - loglam[None, :]


def apply_channel(
    kind: ChannelKind, anchor: Eigensystem, y, mode: EvalMode = SPECTRAL
) -> np.ndarray:
    """Average of U(t) y U(t)^dag over the channel's density.

    U(t) = e^{-iBt} for exp_tent (anchor B) and A^{-it/2} for the logistic
    and power kinds (anchor A > 0).  Trace-preserving and Hermiticity-
    preserving; leaves y fixed when it commutes with the anchor.
    """
    y = as_hermitian(y)
    if y.shape[0] != anchor.dim:
        raise SpecError(f"dim mismatch: channel anchor {anchor.dim}, input {y.shape[0]}")
    if mode.name == "spectral":
        yt = anchor.vecs.conj().T @ y @ anchor.vecs
        yt *= channel_factor(kind, _gaps(kind, anchor))
        return hermitize(anchor.vecs @ yt @ anchor.vecs.conj().T)

    if kind.name == "exp_tent":
        freq = anchor.vals
    else:
        if np.any(anchor.vals <= 0.0):
            raise SpecError(f"{kind.name} channel needs a positive definite anchor")
        freq = np.log(anchor.vals) / 2.0
    t_nodes, w, w0 = densities.expectation_nodes(kind.density, T=mode.T, nodes=mode.nodes)
    yt = anchor.vecs.conj().T @ y @ anchor.vecs
    acc = w0 * yt
    for t_i, w_i in zip(t_nodes, w):
        phase = np.exp(-1j * freq * t_i)
        acc = acc + w_i * (phase[:, None] * yt * phase[None, :].conj())
    return hermitize(anchor.vecs @ acc @ anchor.vecs.conj().T)


def frechet_exp(b, h, mode: str = "fourier") -> np.ndarray:
    """Derivative of the matrix exponential at b in direction h.

    ``duhamel``: int_0^1 e^{tB} H e^{(1-t)B} dt by 64-node Gauss-Legendre.
    ``fourier``: (1/2){Phi_B(H), e^B} with Phi_B the tent-weighted channel.
    """
    es = eigh(b)
    h = as_hermitian(h)
    if mode == "duhamel":
        x, w = _gl64()
        t = 0.5 * (x + 1.0)
        acc = np.zeros_like(h)
        for t_i, w_i in zip(t, 0.5 * w):
            acc = acc + w_i * (es.apply(lambda v: np.exp(t_i * v)) @ h
                               @ es.apply(lambda v: np.exp((1.0 - t_i) * v)))
        return hermitize(acc)
    if mode == "fourier":
        eb = es.apply(np.exp)
        ph = apply_channel(EXP_TENT, es, h)
        return hermitize(0.5 * (ph @ eb + eb @ ph))
    raise SpecError(f"unknown frechet_exp mode {mode!r}")


def frechet_log(a, h, mode: str = "fourier") -> np.ndarray:
    """Derivative of the matrix logarithm at a > 0 in direction h.

    ``fourier``:   A^{-1/2} Upsilon_A(H) A^{-1/2} (logistic channel).
    ``resolvent``: int_0^inf (A+sI)^{-1} H (A+sI)^{-1} ds by quadrature.
    """
    es = eigh(a)
    if np.any(es.vals <= 0.0):
        raise SpecError("frechet_log needs a positive definite base point")
    h = as_hermitian(h)
    if mode == "fourier":
        inv_sqrt = es.power(-0.5)
        return hermitize(inv_sqrt @ apply_channel(LOG_LOGISTIC, es, h) @ inv_sqrt)
    if mode == "resolvent":
        return _resolvent_integral(es, h, power=0.0)
    raise SpecError(f"unknown frechet_log mode {mode!r}")


def frechet_power(a, h, r: float) -> np.ndarray:
    """Derivative of A^r at a > 0 in direction h, r in (-1,0) u (0,1).

    r A^{(r-1)/2} Upsilon^r_A(H) A^{(r-1)/2} with the power-weighted channel.
    """
    kind = power_beta(r)
    es = eigh(a)
    if np.any(es.vals <= 0.0):
        raise SpecError("frechet_power needs a positive definite base point")
    h = as_hermitian(h)
    side = es.power((r - 1.0) / 2.0)
    return hermitize(r * side @ apply_channel(kind, es, h) @ side)


def thermal_derivative(g_spec: Eigensystem, dg) -> np.ndarray:
    """Derivative of sigma = e^{-G}/Z along a perturbation dG of G.

    Equals -(1/2){Phi_G(dG), sigma} + sigma <dG>_sigma; traceless, and zero
    whenever dG is a multiple of the identity.
    """
    dg = as_hermitian(dg)
    shifted = g_spec.vals - np.min(g_spec.vals)
    weights = np.exp(-shifted)
    weights /= np.sum(weights)
    sigma = hermitize((g_spec.vecs * weights) @ g_spec.vecs.conj().T)
    phi = apply_channel(EXP_TENT, g_spec, dg)
    mean = float(np.trace(dg @ sigma).real)
    return hermitize(-0.5 * (phi @ sigma + sigma @ phi) + sigma * mean)


def _resolvent_integral(es: Eigensystem, h: np.ndarray, power: float) -> np.ndarray:
    """int_0^inf s^power (A+sI)^{-1} H (A+sI)^{-1} ds via s = c z/(1-z)."""
    c = float(np.sqrt(es.vals[0] * es.vals[-1]))
    x, w = _gl(400)
    z = 0.5 * (x + 1.0)
    acc = np.zeros_like(h, dtype=complex)
    ht = es.vecs.conj().T @ h @ es.vecs
    for z_i, w_i in zip(z, 0.5 * w):
        s = c * z_i / (1.0 - z_i)
        jac = c / (1.0 - z_i) ** 2
        res = 1.0 / (es.vals + s)
        acc = acc + (w_i * jac * s**power) * (res[:, None] * ht * res[None, :])
    return hermitize(es.vecs @ acc @ es.vecs.conj().T)


@functools.lru_cache(maxsize=1)
def _gl64() -> tuple[np.ndarray, np.ndarray]:
    return leggauss(64)


@functools.lru_cache(maxsize=8)
def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(n)
