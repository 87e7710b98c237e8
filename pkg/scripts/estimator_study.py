#!/usr/bin/env python3
"""Shot-count scaling study of the gradient-term estimator.

For a fixed random visible+hidden model, sweep the error target and compare
the auto-selected Hoeffding counts, the measured error, and the predicted
kappa^2/eps^2 growth; then show the cost model's kappa^3 law."""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qbmgrad import (  # noqa: E402
    BipartiteDims,
    EstimatorConfig,
    ParamHamiltonian,
    as_hermitian,
    estimate_first_term,
    gradient,
    query_cost,
    spectral_norm,
    thermalize,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--delta", type=float, default=0.05)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)

    def herm(d, scale):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return as_hermitian((a + a.conj().T) / 2 * scale)

    dims = BipartiteDims(2, 2)
    terms = tuple(herm(4, 0.4) for _ in range(2))
    model = thermalize(ParamHamiltonian(dims=dims, terms=terms,
                                        theta=rng.uniform(-0.4, 0.4, 2)))
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    g_j = terms[0]
    exact = gradient(model, rho).first_terms[0]
    print(f"kappa = {model.kappa:.3f}, |G_j| = {spectral_norm(g_j):.3f}, "
          f"exact target term = {exact:+.6f}")
    print(f"{'eps':>8} {'shots':>10} {'|err|':>10} {'stderr':>10} {'secs':>7}")
    for eps in (0.2, 0.1, 0.05, 0.025):
        cfg = EstimatorConfig(epsilon=eps, delta_fail=args.delta, seed=args.seed)
        t0 = time.perf_counter()
        mean, stderr, shots = estimate_first_term(model, rho, g_j, cfg)
        print(f"{eps:8.3f} {shots:10d} {abs(mean - exact):10.5f} "
              f"{stderr:10.5f} {time.perf_counter() - t0:7.2f}")

    print("\ncost model (unit constants):")
    for kappa in (2.0, 4.0, 8.0):
        c = query_cost("full_algorithm", kappa, epsilon=1e-2, delta_fail=args.delta)
        print(f"  kappa = {kappa:4.1f}: total queries ~ {c:.3e}")


if __name__ == "__main__":
    main()
