"""Command-line driver: verify suites, compute gradients, train, estimate.

Exit codes: 0 success, 1 check failure, 2 input/schema error, 3 numerical
guard.  All outputs are deterministic given (spec, seed); reports land in
``--out`` as report.json (plus trajectory.csv for training runs).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import GuardError, SpecError
from .estimator import EstimatorConfig, estimate_first_term, hoeffding_shots
from .gradients import (
    GradientReport,
    Objective,
    UMEGAKI,
    classical_gradient,
    classical_objective,
    cq_objective,
    gradient,
    gradient_cq,
    gradient_qc,
    q_overlap,
    relative_entropy,
    tsallis,
)
from .linalg import eigh, spectral_norm
from .models import cq_decompose, qc_decompose, thermalize
from .runspec import RunSpec, fmt17, load_runspec
from .training import (
    CQProblem,
    ClassicalProblem,
    QCProblem,
    QuantumProblem,
    TrainConfig,
    finite_difference_gradient,
    train,
)
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_GUARD = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit 2, keep it explicit
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qbmgrad", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="JSON run-spec file")
    common.add_argument("--objective", choices=["umegaki", "tsallis"])
    common.add_argument("--q", type=float, help="tsallis order in (0,1) u (1,2]")
    common.add_argument("--seed", type=int, help="override the spec seed")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")

    pv = sub.add_parser("verify", parents=[common], help="run property-check suites")
    pv.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES)} or 'all'")

    sub.add_parser("grad", parents=[common], help="exact gradient with oracle residuals")

    pt = sub.add_parser("train", parents=[common], help="gradient-descent training")
    pt.add_argument("--mode", choices=["exact", "shot"], help="gradient mode")
    pt.add_argument("--learning-rate", type=float)
    pt.add_argument("--iterations", type=int)
    pt.add_argument("--log-every", type=int)
    pt.add_argument("--epsilon", type=float, help="shot-mode error target")
    pt.add_argument("--delta", type=float, help="shot-mode failure probability")
    pt.add_argument("--shots", type=int, help="fixed shots per estimate (0 = auto)")

    pe = sub.add_parser("estimate", parents=[common], help="shot-estimate one gradient term")
    pe.add_argument("--term", type=int, help="parameter index (default from spec)")
    pe.add_argument("--epsilon", type=float)
    pe.add_argument("--delta", type=float)
    pe.add_argument("--shots", type=int, help="0 = auto from the Hoeffding bound")
    return p


def _resolve_seed(args, spec: RunSpec | None) -> int:
    env = os.environ.get("QBMGRAD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise SpecError(f"QBMGRAD_SEED must be an integer, got {env!r}") from exc
    if args.seed is not None:
        return args.seed
    return spec.seed if spec is not None else 0


def _resolve_objective(args, spec: RunSpec | None) -> Objective:
    if args.objective == "umegaki":
        return UMEGAKI
    if args.objective == "tsallis":
        if args.q is None:
            raise SpecError("--objective tsallis requires --q")
        return tsallis(args.q)
    if args.q is not None:
        return tsallis(args.q)
    return spec.objective if spec is not None else UMEGAKI


def _need_spec(args) -> RunSpec:
    if args.spec is None:
        raise SpecError(f"command {args.command!r} requires --spec FILE")
    return load_runspec(args.spec)


def _write_report(out_dir: Path, payload: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names)  # unknown suite raises SpecError -> exit 2
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.suite}/{r.name}: "
              f"residual={r.residual:.3e} tol={r.tol:.1e}")
    n_fail = sum(not r.passed for r in results)
    payload = {
        "command": "verify",
        "suites": names,
        "n_checks": len(results),
        "n_failed": int(n_fail),
        "max_residual_over_tol": float(
            max((r.residual / r.tol if r.tol > 0 else 0.0) for r in results)
        ),
        "checks": [r.as_dict() for r in results],
    }
    path = _write_report(args.out, payload)
    print(f"{len(results)} checks, {n_fail} failed -> {path}")
    return EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILED


def _gradient_bundle(spec: RunSpec, obj: Objective):
    """(report, objective_value, fd_objective_callable, theta) for any model kind."""
    kind = spec.model.kind
    if kind in ("generic", "restricted"):
        ham = spec.model.param_hamiltonian()
        model = thermalize(ham)
        rep = gradient(model, spec.target_state, obj)
        value = relative_entropy(spec.target_state, model.sigma_v, obj)

        def fd_obj(th):
            return relative_entropy(
                spec.target_state, thermalize(ham.with_theta(th)).sigma_v, obj)

        extra = {}
        if obj.kind == "tsallis":
            extra["q_overlap"] = q_overlap(spec.target_state, model.sigma_v_eig, obj.q)
        return rep, value, fd_obj, ham.theta, extra
    if kind == "qc":
        qc = qc_decompose(spec.model.param_hamiltonian(), spec.model.hidden_basis)
        rep = gradient_qc(qc, spec.target_state, obj)
        value = relative_entropy(spec.target_state, qc.visible_state(), obj)

        def fd_obj(th):
            return relative_entropy(
                spec.target_state, qc.with_theta(th).visible_state(), obj)

        extra = {}
        if obj.kind == "tsallis":
            extra["q_overlap"] = q_overlap(spec.target_state, eigh(qc.visible_state()), obj.q)
        return rep, value, fd_obj, qc.theta, extra
    if kind == "cq":
        cq = cq_decompose(spec.model.param_hamiltonian(), spec.model.visible_basis)
        rep = gradient_cq(cq, spec.target_probs, obj)
        value = cq_objective(cq, spec.target_probs, obj)

        def fd_obj(th):
            return cq_objective(cq.with_theta(th), spec.target_probs, obj)

        return rep, value, fd_obj, cq.theta, {}
    if kind == "classical":
        if obj.kind != "umegaki":
            raise SpecError("classical tables support the umegaki objective only")
        tables, theta = spec.model.tables, spec.model.theta
        grad_vec = classical_gradient(tables, theta, spec.target_probs)
        rep = GradientReport(grad_vec, grad_vec, np.zeros_like(grad_vec))
        value = classical_objective(tables, theta, spec.target_probs)

        def fd_obj(th):
            return classical_objective(tables, th, spec.target_probs)

        return rep, value, fd_obj, theta, {}
    raise SpecError(f"unknown model kind {kind!r}")


def cmd_grad(args) -> int:
    spec = _need_spec(args)
    obj = _resolve_objective(args, spec)
    rep, value, fd_obj, theta, extra = _gradient_bundle(spec, obj)
    fd = finite_difference_gradient(fd_obj, theta)
    resid = np.abs(rep.values - fd)
    print(f"objective value: {value:.12g}")
    for j, (v, f1, s1, r) in enumerate(zip(rep.values, rep.first_terms, rep.second_terms, resid)):
        print(f"  d/dtheta[{j}] = {v:+.12g}   (target term {f1:+.6g}, model term {s1:+.6g}, "
              f"fd residual {r:.2e})")
    payload = {
        "command": "grad",
        "objective": {"kind": obj.kind, **({"q": obj.q} if obj.q else {})},
        "objective_value": value,
        "values": rep.values.tolist(),
        "first_terms": rep.first_terms.tolist(),
        "second_terms": rep.second_terms.tolist(),
        "fd_residuals": resid.tolist(),
        **extra,
    }
    path = _write_report(args.out, payload)
    print(f"report -> {path}")
    return EXIT_OK


def _train_problem(spec: RunSpec, obj: Objective, mode: str, est: EstimatorConfig | None):
    kind = spec.model.kind
    if kind in ("generic", "restricted"):
        return QuantumProblem(spec.model.param_hamiltonian(), spec.target_state, obj,
                              mode=mode, estimator=est)
    if kind == "qc":
        if mode == "shot":
            raise SpecError("shot-mode training covers generic/restricted models only")
        return QCProblem(qc_decompose(spec.model.param_hamiltonian(), spec.model.hidden_basis),
                         spec.target_state, obj)
    if kind == "cq":
        if mode == "shot":
            raise SpecError("shot-mode training covers generic/restricted models only")
        return CQProblem(cq_decompose(spec.model.param_hamiltonian(), spec.model.visible_basis),
                         spec.target_probs, obj)
    if kind == "classical":
        if obj.kind != "umegaki":
            raise SpecError("classical tables support the umegaki objective only")
        return ClassicalProblem(spec.model.tables, spec.target_probs, spec.model.theta,
                                mode="exact" if mode == "exact" else "mc")
    raise SpecError(f"unknown model kind {kind!r}")


def cmd_train(args) -> int:
    spec = _need_spec(args)
    obj = _resolve_objective(args, spec)
    seed = _resolve_seed(args, spec)
    opts = spec.train
    mode = args.mode or opts.get("mode", "exact")
    est = None
    if mode == "shot":
        est = EstimatorConfig(
            epsilon=args.epsilon or float(opts.get("epsilon", 0.05)),
            delta_fail=args.delta or float(opts.get("delta", 0.05)),
            shots=args.shots if args.shots is not None else int(opts.get("shots", 0)),
            seed=seed,
            threads=args.threads,
        )
    cfg = TrainConfig(
        learning_rate=args.learning_rate or float(opts.get("learning_rate", 0.1)),
        iterations=args.iterations or int(opts.get("iterations", 500)),
        gradient_mode=mode,
        estimator=est,
        objective=obj,
        seed=seed,
        log_every=args.log_every or int(opts.get("log_every", 1)),
    )
    problem = _train_problem(spec, obj, mode, est)
    traj = train(problem, cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "trajectory.csv"
    n_theta = traj.rows[0].theta.size
    with csv_path.open("w") as fh:
        header = ["iter", "objective", "grad_norm"] + [f"theta_{i}" for i in range(n_theta)]
        fh.write(",".join(header + ["wall_ms"]) + "\n")
        for row in traj.rows:
            cells = [str(row.iteration), fmt17(row.objective), fmt17(row.grad_norm)]
            cells += [fmt17(v) for v in row.theta]
            cells.append(fmt17(row.wall_ms))
            fh.write(",".join(cells) + "\n")
    payload = {
        "command": "train",
        "mode": mode,
        "iterations": cfg.iterations,
        "final_objective": traj.final_objective,
        "final_theta": traj.final_theta.tolist(),
        "monotone": bool(np.all(np.diff(traj.objectives()) <= 0.0)),
        "trajectory_csv": str(csv_path),
    }
    path = _write_report(args.out, payload)
    print(f"final objective {traj.final_objective:.6g} after {cfg.iterations} iterations")
    print(f"trajectory -> {csv_path}\nreport -> {path}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    spec = _need_spec(args)
    if spec.model.kind not in ("generic", "restricted"):
        raise SpecError("estimate covers generic/restricted models")
    seed = _resolve_seed(args, spec)
    opts = spec.estimate
    term = args.term if args.term is not None else int(opts.get("term_index", 0))
    model = thermalize(spec.model.param_hamiltonian())
    terms = model.hamiltonian.terms
    if not 0 <= term < len(terms):
        raise SpecError(f"term index {term} outside [0, {len(terms)})")
    cfg = EstimatorConfig(
        epsilon=args.epsilon or float(opts.get("epsilon", 0.05)),
        delta_fail=args.delta or float(opts.get("delta", 0.05)),
        shots=args.shots if args.shots is not None else int(opts.get("shots", 0)),
        seed=seed,
        threads=args.threads,
    )
    g_norm = spectral_norm(terms[term])
    start = time.perf_counter()
    mean, stderr, shots = estimate_first_term(model, spec.target_state, terms[term], cfg)
    elapsed = time.perf_counter() - start
    exact = gradient(model, spec.target_state).first_terms[term]
    payload = {
        "command": "estimate",
        "term_index": term,
        "epsilon": cfg.epsilon,
        "delta_fail": cfg.delta_fail,
        "shots": shots,
        "auto_shots": hoeffding_shots(model.kappa, g_norm, cfg.epsilon, cfg.delta_fail),
        "mean": mean,
        "stderr": stderr,
        "exact": exact,
        "abs_error": abs(mean - exact),
        "kappa": model.kappa,
        "g_norm": g_norm,
        "wall_s": elapsed,
    }
    path = _write_report(args.out, payload)
    print(f"term {term}: mean {mean:+.6f} +- {stderr:.6f} ({shots} shots), "
          f"exact {exact:+.6f}, |error| {abs(mean - exact):.6f}")
    print(f"kappa = {model.kappa:.4f}, |G_j| = {g_norm:.4f}")
    print(f"report -> {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "verify": cmd_verify,
        "grad": cmd_grad,
        "train": cmd_train,
        "estimate": cmd_estimate,
    }
    try:
        return handlers[args.command](args)
    except SpecError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
