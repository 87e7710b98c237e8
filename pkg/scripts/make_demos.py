#!/usr/bin/env python3
"""Regenerate the committed demo run-specs in demos/.

Each file exercises one worked configuration: the closed-form single-qubit
gradient, a fixed point, the tsallis objective, restricted / block-hidden /
block-visible / classical models, the training benchmark, and a shot
estimate."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from qbmgrad.runspec import matrix_to_json  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "demos"

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def write(name: str, payload: dict) -> None:
    OUT.mkdir(exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote demos/{name}")


def proj(i: int) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    p[i, i] = 1.0
    return p


def main() -> None:
    # single visible qubit, G = theta Z at theta = 0, target |0><0|: gradient 1
    write("grad_qubit.json", {
        "model": {"kind": "generic", "dims": {"visible": 2, "hidden": 1},
                  "terms": [matrix_to_json(Z)], "theta": [0.0]},
        "target": {"state": matrix_to_json(np.diag([1.0, 0.0]).astype(complex))},
        "objective": {"kind": "umegaki"},
        "seed": 7,
        "train": {"learning_rate": 0.1, "iterations": 300, "log_every": 10},
    })

    # theta = 0 makes the visible marginal maximally mixed: zero gradient
    write("grad_fixed_point.json", {
        "model": {"kind": "generic", "dims": {"visible": 2, "hidden": 2},
                  "terms": [matrix_to_json(np.kron(Z, I2)),
                            matrix_to_json(np.kron(X, X)),
                            matrix_to_json(np.kron(I2, Z))],
                  "theta": [0.0, 0.0, 0.0]},
        "target": {"state": matrix_to_json(0.5 * I2)},
        "objective": {"kind": "umegaki"},
        "seed": 7,
        "train": {"learning_rate": 0.1, "iterations": 50, "log_every": 5},
    })

    # tsallis objective on a small visible+hidden model
    rho = np.array([[0.62, 0.18 - 0.09j], [0.18 + 0.09j, 0.38]], dtype=complex)
    write("grad_tsallis.json", {
        "model": {"kind": "generic", "dims": {"visible": 2, "hidden": 2},
                  "terms": [matrix_to_json(np.kron(Z, I2)),
                            matrix_to_json(np.kron(X, Z)),
                            matrix_to_json(np.kron(Z, X))],
                  "theta": [0.35, -0.2, 0.15]},
        "target": {"state": matrix_to_json(rho)},
        "objective": {"kind": "tsallis", "q": 1.5},
        "seed": 11,
        "train": {"learning_rate": 0.1, "iterations": 200, "log_every": 10},
    })

    # restricted model: a = b = 0, w = 1, V = H = Z gives G = Z (x) Z
    write("grad_restricted.json", {
        "model": {"kind": "restricted",
                  "a": [0.1], "b": [-0.2], "w": [[0.5]],
                  "V": [matrix_to_json(Z)], "H": [matrix_to_json(Z)]},
        "target": {"state": matrix_to_json(np.diag([0.7, 0.3]).astype(complex))},
        "objective": {"kind": "umegaki"},
        "seed": 3,
        "train": {"learning_rate": 0.1, "iterations": 300, "log_every": 10},
    })

    # classical hidden register: every term block-diagonal over |x><x|_h
    write("grad_qc.json", {
        "model": {"kind": "qc", "dims": {"visible": 2, "hidden": 2},
                  "terms": [
                      matrix_to_json(np.kron(Z, proj(0)) + np.kron(0.4 * X, proj(1))),
                      matrix_to_json(np.kron(X, proj(0)) - np.kron(Z, proj(1))),
                  ],
                  "theta": [0.45, -0.3]},
        "target": {"state": matrix_to_json(rho)},
        "objective": {"kind": "umegaki"},
        "seed": 5,
        "train": {"learning_rate": 0.1, "iterations": 200, "log_every": 10},
    })

    # classical visible register against a two-label target distribution
    write("grad_cq.json", {
        "model": {"kind": "cq", "dims": {"visible": 2, "hidden": 2},
                  "terms": [
                      matrix_to_json(np.kron(proj(0), Z) + np.kron(proj(1), 0.6 * X)),
                      matrix_to_json(np.kron(proj(0), X) + np.kron(proj(1), -Z)),
                  ],
                  "theta": [0.3, -0.25]},
        "target": {"probs": [0.35, 0.65]},
        "objective": {"kind": "umegaki"},
        "seed": 13,
        "train": {"learning_rate": 0.05, "iterations": 500, "log_every": 20},
    })

    # classical restricted Boltzmann machine, 2 visible / 1 hidden bits
    rng = np.random.default_rng(21)
    tables = rng.normal(size=(4, 4, 2)).round(6)
    q_target = np.array([0.4, 0.25, 0.2, 0.15])
    write("grad_classical.json", {
        "model": {"kind": "classical", "tables": tables.tolist(),
                  "theta": [0.0, 0.0, 0.0, 0.0]},
        "target": {"probs": q_target.tolist()},
        "objective": {"kind": "umegaki"},
        "seed": 17,
        "train": {"learning_rate": 0.2, "iterations": 400, "log_every": 20},
    })

    # training benchmark: minimizer theta* = 0.5 ln(0.2/0.8)
    write("train_qubit.json", {
        "model": {"kind": "generic", "dims": {"visible": 2, "hidden": 1},
                  "terms": [matrix_to_json(Z)], "theta": [0.0]},
        "target": {"state": matrix_to_json(np.diag([0.8, 0.2]).astype(complex))},
        "objective": {"kind": "umegaki"},
        "seed": 7,
        "train": {"learning_rate": 0.1, "iterations": 2000, "log_every": 50},
    })

    # shot-estimation demo on a visible+hidden pair
    write("estimate.json", {
        "model": {"kind": "generic", "dims": {"visible": 2, "hidden": 2},
                  "terms": [matrix_to_json(np.kron(Z, I2)),
                            matrix_to_json(np.kron(X, Z))],
                  "theta": [0.4, -0.3]},
        "target": {"state": matrix_to_json(rho)},
        "objective": {"kind": "umegaki"},
        "seed": 42,
        "estimate": {"term_index": 0, "epsilon": 0.05, "delta": 0.05, "shots": 0},
        "train": {"learning_rate": 0.1, "iterations": 100, "log_every": 10},
    })


if __name__ == "__main__":
    main()
