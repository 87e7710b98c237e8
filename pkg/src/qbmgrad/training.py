"""Plain gradient-descent training loops with exact or shot-based gradients.

No momentum or adaptive optimizers: the only adaptivity is halving the step
when the objective would increase (at most 20 halvings, then the step is
skipped), which makes logged objectives non-increasing by construction.
The exact objective is recomputed at every logged step even in shot mode,
cleanly separating estimator noise from optimization behavior.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, SpecError
from .estimator import EstimatorConfig, estimate_first_term, estimate_model_term
from .gradients import (
    Objective,
    UMEGAKI,
    classical_distribution,
    classical_gradient,
    classical_objective,
    cq_objective,
    gradient,
    gradient_cq,
    gradient_qc,
    relative_entropy,
)
from .models import CQModel, ParamHamiltonian, QCModel, thermalize

MAX_HALVINGS = 20
DIVERGENCE_CAP = 1e6


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 500
    gradient_mode: str = "exact"  # "exact" | "shot"
    estimator: EstimatorConfig | None = None
    objective: Objective = UMEGAKI
    seed: int = 0
    log_every: int = 1

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise SpecError("learning rate must be positive")
        if self.iterations < 1 or self.log_every < 1:
            raise SpecError("iterations and log_every must be >= 1")
        if self.gradient_mode not in ("exact", "shot"):
            raise SpecError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.gradient_mode == "shot" and self.estimator is None:
            object.__setattr__(self, "estimator", EstimatorConfig(seed=self.seed))


@dataclass(frozen=True)
class TrajectoryRow:
    iteration: int
    objective: float
    grad_norm: float
    theta: np.ndarray
    wall_ms: float


@dataclass
class Trajectory:
    rows: list[TrajectoryRow] = field(default_factory=list)

    @property
    def final_theta(self) -> np.ndarray:
        return self.rows[-1].theta

    @property
    def final_objective(self) -> float:
        return self.rows[-1].objective

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.rows])


class Problem:
    """Objective/gradient pair over a parameter vector."""

    theta0: np.ndarray

    def objective(self, theta) -> float:
        raise NotImplementedError

    def gradient_vector(self, theta, iteration: int) -> np.ndarray:
        raise NotImplementedError


class QuantumProblem(Problem):
    """Fully quantum model: match the visible marginal to a target state."""

    def __init__(self, hamiltonian: ParamHamiltonian, rho, obj: Objective = UMEGAKI,
                 mode: str = "exact", estimator: EstimatorConfig | None = None):
        self.hamiltonian = hamiltonian
        self.rho = rho
        self.obj = obj
        self.mode = mode
        self.estimator = estimator
        self.theta0 = np.asarray(hamiltonian.theta, dtype=float)

    def _model(self, theta):
        return thermalize(self.hamiltonian.with_theta(theta))

    def objective(self, theta) -> float:
        return relative_entropy(self.rho, self._model(theta).sigma_v, self.obj)

    def gradient_vector(self, theta, iteration: int) -> np.ndarray:
        model = self._model(theta)
        if self.mode == "exact":
            return gradient(model, self.rho, self.obj).values
        if self.obj.kind != "umegaki":
            raise SpecError("shot-mode gradients cover the umegaki objective only")
        cfg = self.estimator or EstimatorConfig()
        out = np.zeros(self.hamiltonian.n_params)
        for j, term in enumerate(self.hamiltonian.terms):
            seed_j = cfg.seed ^ (0x9E3779B9 * (iteration * 131 + j) & 0x7FFFFFFF)
            cfg_j = EstimatorConfig(
                epsilon=cfg.epsilon, delta_fail=cfg.delta_fail, shots=cfg.shots,
                seed=seed_j, chunk=cfg.chunk, threads=cfg.threads,
            )
            first, _, shots = estimate_first_term(model, self.rho, term, cfg_j)
            second, _ = estimate_model_term(model, term, shots, seed_j ^ 0x5bd1e995)
            out[j] = first - second
        return out


class QCProblem(Problem):
    """Quantum-visible / classical-hidden model against a target state."""

    def __init__(self, qc: QCModel, rho, obj: Objective = UMEGAKI):
        self.qc = qc
        self.rho = rho
        self.obj = obj
        self.theta0 = np.asarray(qc.theta, dtype=float)

    def objective(self, theta) -> float:
        return relative_entropy(self.rho, self.qc.with_theta(theta).visible_state(), self.obj)

    def gradient_vector(self, theta, iteration: int) -> np.ndarray:
        return gradient_qc(self.qc.with_theta(theta), self.rho, self.obj).values


class CQProblem(Problem):
    """Classical-visible / quantum-hidden model against a label distribution."""

    def __init__(self, cq: CQModel, target_probs, obj: Objective = UMEGAKI):
        self.cq = cq
        self.target = np.asarray(target_probs, dtype=float)
        self.obj = obj
        self.theta0 = np.asarray(cq.theta, dtype=float)

    def objective(self, theta) -> float:
        return cq_objective(self.cq.with_theta(theta), self.target, self.obj)

    def gradient_vector(self, theta, iteration: int) -> np.ndarray:
        return gradient_cq(self.cq.with_theta(theta), self.target, self.obj).values


class ClassicalProblem(Problem):
    """Classical energy tables against a visible target distribution."""

    def __init__(self, tables, target_q, theta0, mode: str = "exact",
                 samples: int = 10_000, seed: int = 0):
        self.tables = np.asarray(tables, dtype=float)
        self.target = np.asarray(target_q, dtype=float)
        self.theta0 = np.asarray(theta0, dtype=float)
        self.mode = mode
        self.samples = samples
        self.seed = seed

    def objective(self, theta) -> float:
        return classical_objective(self.tables, theta, self.target)

    def gradient_vector(self, theta, iteration: int) -> np.ndarray:
        if self.mode == "exact":
            return classical_gradient(self.tables, theta, self.target)
        return self._sampled_gradient(theta, iteration)

    def _sampled_gradient(self, theta, iteration: int) -> np.ndarray:
        """Monte Carlo gradient: sample (v,h) from q(v) p(h|v) and p(v,h)."""
        rng = np.random.default_rng(self.seed ^ (iteration * 2654435761 & 0x7FFFFFFF))
        p_vh = classical_distribution(self.tables, theta)
        n_v, n_h = p_vh.shape
        p_v = p_vh.sum(axis=1)
        cond = p_vh / p_v[:, None]
        v_data = rng.choice(n_v, size=self.samples, p=self.target)
        # conditional draw by inverse CDF per sampled v
        u = rng.random(self.samples)
        h_data = (u[:, None] > np.cumsum(cond[v_data], axis=1)).sum(axis=1)
        flat_model = rng.choice(n_v * n_h, size=self.samples, p=p_vh.ravel())
        v_model, h_model = np.divmod(flat_model, n_h)
        pos = self.tables[:, v_data, h_data].mean(axis=1)
        neg = self.tables[:, v_model, h_model].mean(axis=1)
        return pos - neg


def finite_difference_gradient(f, theta, step: float = 1e-5) -> np.ndarray:
    """Central finite-difference oracle for any scalar objective."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for j in range(theta.size):
        plus = theta.copy()
        minus = theta.copy()
        plus[j] += step
        minus[j] -= step
        out[j] = (f(plus) - f(minus)) / (2.0 * step)
    return out


def train(problem: Problem, cfg: TrainConfig) -> Trajectory:
    """Gradient descent theta <- theta - eta * grad with step halving.

    The exact objective is evaluated every iteration to steer the halving
    and logged every ``log_every`` iterations.  Diverging objectives
    (> 1e6 or non-finite) abort with a diagnostic.
    """
    theta = problem.theta0.copy()
    traj = Trajectory()
    start = time.perf_counter()
    obj = problem.objective(theta)
    _check_finite(obj, 0)
    grad_vec = problem.gradient_vector(theta, 0)
    traj.rows.append(TrajectoryRow(0, obj, float(np.linalg.norm(grad_vec)), theta.copy(),
                                   (time.perf_counter() - start) * 1e3))
    for it in range(1, cfg.iterations + 1):
        eta = cfg.learning_rate
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            cand = theta - eta * grad_vec
            try:
                cand_obj = problem.objective(cand)
            except GuardError:
                # trial step left the trustworthy region; shrink and retry
                eta *= 0.5
                continue
            if not np.isfinite(cand_obj):
                eta *= 0.5
                continue
            if cand_obj <= obj:  # strict descent keeps the log non-increasing
                theta, obj = cand, cand_obj
                accepted = True
                break
            eta *= 0.5
        _check_finite(obj, it)
        converged = not accepted and cfg.gradient_mode == "exact"
        grad_vec = problem.gradient_vector(theta, it)
        if it % cfg.log_every == 0 or it == cfg.iterations or converged:
            traj.rows.append(
                TrajectoryRow(it, obj, float(np.linalg.norm(grad_vec)), theta.copy(),
                              (time.perf_counter() - start) * 1e3)
            )
        if converged:
            # exact gradients are deterministic, so a fully rejected step
            # would repeat forever: the objective is at its float floor
            break
    return traj


def train_classical(tables, target_q, theta0, cfg: TrainConfig, *,
                    samples: int = 10_000) -> Trajectory:
    """Classical Boltzmann-machine baseline (exact enumeration or Monte Carlo)."""
    problem = ClassicalProblem(tables, target_q, theta0,
                               mode="exact" if cfg.gradient_mode == "exact" else "mc",
                               samples=samples, seed=cfg.seed)
    return train(problem, cfg)


def _check_finite(obj: float, iteration: int) -> None:
    if not np.isfinite(obj) or obj > DIVERGENCE_CAP:
        raise GuardError(f"objective diverged at iteration {iteration}: {obj!r}")
