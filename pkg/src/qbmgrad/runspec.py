"""JSON run specifications: model, target, objective, per-command options.

Complex matrices are serialized as row-major nested arrays of [re, im]
pairs; probability vectors as plain arrays.  Restricted models pack theta
in the order (a, b, row-major w).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SpecError
from .gradients import Objective, UMEGAKI, tsallis
from .linalg import MAX_DIM, BipartiteDims
from .models import ParamHamiltonian, RestrictedSpec, restricted_to_param


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(obj, what: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"{what}: expected nested [re, im] arrays") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise SpecError(f"{what}: expected a square matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass
class ModelSpec:
    kind: str
    dims: BipartiteDims | None = None
    terms: list[np.ndarray] = field(default_factory=list)
    theta: np.ndarray | None = None
    hidden_basis: np.ndarray | None = None
    visible_basis: np.ndarray | None = None
    restricted: RestrictedSpec | None = None
    tables: np.ndarray | None = None

    def param_hamiltonian(self) -> ParamHamiltonian:
        if self.kind == "restricted":
            return restricted_to_param(self.restricted)
        if self.kind in ("generic", "qc", "cq"):
            return ParamHamiltonian(dims=self.dims, terms=tuple(self.terms), theta=self.theta)
        raise SpecError(f"model kind {self.kind!r} has no Hamiltonian form")


@dataclass
class RunSpec:
    model: ModelSpec
    target_state: np.ndarray | None
    target_probs: np.ndarray | None
    objective: Objective
    seed: int
    train: dict
    estimate: dict

    @property
    def target(self):
        return self.target_state if self.target_state is not None else self.target_probs


def _require(d: dict, key: str, what: str):
    if key not in d:
        raise SpecError(f"{what}: missing required field {key!r}")
    return d[key]


def _parse_model(raw: dict) -> ModelSpec:
    kind = _require(raw, "kind", "model")
    if kind not in ("generic", "restricted", "qc", "cq", "classical"):
        raise SpecError(f"unknown model kind {kind!r}")
    spec = ModelSpec(kind=kind)
    if kind == "classical":
        tables = np.asarray(_require(raw, "tables", "classical model"), dtype=float)
        if tables.ndim != 3:
            raise SpecError("classical tables must be J x d_v x d_h")
        spec.tables = tables
        spec.theta = np.asarray(_require(raw, "theta", "classical model"), dtype=float)
        spec.dims = BipartiteDims(tables.shape[1], tables.shape[2])
        return spec
    if kind == "restricted":
        v_ops = [matrix_from_json(m, "V operator") for m in _require(raw, "V", "restricted model")]
        h_ops = [matrix_from_json(m, "H operator") for m in _require(raw, "H", "restricted model")]
        spec.restricted = RestrictedSpec(
            a=np.asarray(_require(raw, "a", "restricted model"), dtype=float),
            b=np.asarray(_require(raw, "b", "restricted model"), dtype=float),
            w=np.asarray(_require(raw, "w", "restricted model"), dtype=float),
            V=tuple(v_ops),
            H=tuple(h_ops),
        )
        spec.dims = spec.restricted.dims
        spec.theta = spec.restricted.pack_theta()
        return spec
    dims_raw = _require(raw, "dims", "model")
    spec.dims = BipartiteDims(int(dims_raw["visible"]), int(dims_raw["hidden"]))
    if spec.dims.total > MAX_DIM:
        raise SpecError(f"total dimension {spec.dims.total} exceeds {MAX_DIM}")
    spec.terms = [matrix_from_json(m, "term") for m in _require(raw, "terms", "model")]
    spec.theta = np.asarray(_require(raw, "theta", "model"), dtype=float)
    if kind == "qc" and "hidden_basis" in raw:
        spec.hidden_basis = matrix_from_json(raw["hidden_basis"], "hidden basis")
    if kind == "cq" and "visible_basis" in raw:
        spec.visible_basis = matrix_from_json(raw["visible_basis"], "visible basis")
    return spec


def _parse_objective(raw) -> Objective:
    if raw is None:
        return UMEGAKI
    kind = _require(raw, "kind", "objective")
    if kind == "umegaki":
        return UMEGAKI
    if kind == "tsallis":
        return tsallis(float(_require(raw, "q", "objective")))
    raise SpecError(f"unknown objective kind {kind!r}")


def load_runspec(path: str | Path) -> RunSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from exc
    return parse_runspec(raw)


def parse_runspec(raw: dict) -> RunSpec:
    if not isinstance(raw, dict):
        raise SpecError("run spec must be a JSON object")
    model = _parse_model(_require(raw, "model", "run spec"))
    target_raw = _require(raw, "target", "run spec")
    target_state = target_probs = None
    if "state" in target_raw:
        target_state = matrix_from_json(target_raw["state"], "target state")
    elif "probs" in target_raw:
        target_probs = np.asarray(target_raw["probs"], dtype=float)
        if target_probs.ndim != 1 or np.any(target_probs < 0) or abs(target_probs.sum() - 1.0) > 1e-9:
            raise SpecError("target probs must be a normalized nonnegative vector")
    else:
        raise SpecError("target must provide 'state' or 'probs'")
    if model.kind in ("generic", "restricted", "qc") and target_state is None:
        raise SpecError(f"model kind {model.kind!r} needs a density-matrix target")
    if model.kind in ("cq", "classical") and target_probs is None:
        raise SpecError(f"model kind {model.kind!r} needs a probability-vector target")
    return RunSpec(
        model=model,
        target_state=target_state,
        target_probs=target_probs,
        objective=_parse_objective(raw.get("objective")),
        seed=int(raw.get("seed", 0)),
        train=dict(raw.get("train", {})),
        estimate=dict(raw.get("estimate", {})),
    )


def fmt17(x: float) -> str:
    """Serialize a float with 17 significant digits (bit-faithful round trip)."""
    return format(float(x), ".17g")
