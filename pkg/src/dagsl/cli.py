"""Command-line interface: ``dagsl <command> [options]``.

Commands
--------
validate    check a DAG file and print its causal ordering
fit-ate     fit the DAG learner and report every path effect
infer       simulate an intervention, or contrast two interventions
bootstrap   bootstrap path effects, an intervention or a contrast
simulate    run the simulation comparison or the lambda sweep
benchmark   score treatment-effect estimates on IHDP-style replicate files

Exit status is 0 on success, 1 for invalid input or configuration and 2 for
unexpected internal errors.  JSON outputs are pretty-printed with sorted keys.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from threadpoolctl import threadpool_limits

from .bootstrap import MODES, BootstrapConfig, run_bootstrap
from .dag import load_dag
from .daglearner import PROPAGATION_MODES, DagLearner, InterventionSpec
from .errors import ConfigError, DagslError
from .learners import parse_learners
from .metrics import BenchmarkConfig, evaluate_ihdp
from .parallel import resolve_threads
from .simulate import DEFAULT_LAMBDA_GRID, DGP_KINDS, lambda_sweep, run_comparison
from .tabular import Dataset, read_csv, write_csv


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _learner(args, dag) -> DagLearner:
    learners = None if args.learners is None else parse_learners(args.learners)
    return DagLearner(dag, k=args.k, learners=learners, baseline=args.baseline,
                      propagation=getattr(args, "propagation", "expected"), seed=args.seed)


# ------------------------------------------------------------------ commands

def cmd_validate(args) -> int:
    dag = load_dag(args.dag)
    rank = dag.ordering.rank
    print(f"nodes: {len(dag.nodes)}")
    print(f"edges: {len(dag.edges)}")
    print("ordering: " + ", ".join(f"{n}:{rank[n]}" for n in dag.ordering.order))
    print("endogenous: [" + ", ".join(dag.endogenous) + "]")
    return 0


def _ate_table(ate_json: dict) -> str:
    width = max([len(k) for k in ate_json] + [4])
    lines = [f"{'path':<{width}}  estimate"]
    for key in sorted(ate_json):
        lines.append(f"{key:<{width}}  {ate_json[key]: .6f}")
    return "\n".join(lines) + "\n"


def cmd_fit_ate(args) -> int:
    dag = load_dag(args.dag)
    data = read_csv(args.data)
    learner = _learner(args, dag)
    learner.fit(data)
    report = learner.report_json(learner.get_0_1_ate(data))
    report["warnings"] = learner.report.warnings
    if args.out:
        Path(args.out).write_text(_dump(report))
    sys.stdout.write(_ate_table(report["ate"]))
    return 0


def cmd_infer(args) -> int:
    dag = load_dag(args.dag)
    spec_a = InterventionSpec.parse(args.do)
    spec_a.check(dag)
    spec_b = None
    if args.do2 is not None:
        spec_b = InterventionSpec.parse(args.do2)
        spec_b.check(dag)
        if not args.outcome:
            raise ConfigError("--do2 needs --outcome")
        if args.outcome.partition(":")[0] not in dag.var_types:
            raise ConfigError(f"unknown outcome {args.outcome!r}")
    data = read_csv(args.data)
    learner = _learner(args, dag)
    learner.fit(data)
    if spec_b is None:
        out = learner.infer(data, spec_a)
        for w in out.meta.get("warnings", []):
            print(f"warning: {w}", file=sys.stderr)
        if args.out:
            write_csv(out, args.out)
        else:
            write_csv(out, sys.stdout)
        return 0
    ate, cate = learner.contrast(data, spec_a, spec_b, args.outcome)
    if args.out:
        write_csv(Dataset({"cate": cate}), args.out)
    print(f"ATE {args.outcome}: {ate:.6f}")
    return 0


def cmd_bootstrap(args) -> int:
    dag = load_dag(args.dag)
    config = BootstrapConfig(
        num_bootstraps=args.num_bootstraps,
        subsample_size=args.subsample_size,
        k=args.k,
        mode=args.mode,
        spec_a=InterventionSpec.parse(args.do) if args.do else None,
        spec_b=InterventionSpec.parse(args.do2) if args.do2 else None,
        outcome=args.outcome,
        learners=None if args.learners is None else parse_learners(args.learners),
        baseline=args.baseline,
        propagation=args.propagation,
        seed=args.seed,
    )
    for spec in (config.spec_a, config.spec_b):
        if spec is not None:
            spec.check(dag)
    data = read_csv(args.data)
    result = run_bootstrap(config, data, dag, threads=args.threads)
    _write_text(args.out, _dump(result.to_json_dict()))
    if args.out:
        for target in sorted(result.estimates):
            lo, hi = result.ci95(target)
            print(f"{target}: mean {result.mean(target):.6f}  95% CI [{lo:.6f}, {hi:.6f}]")
        if result.failures:
            print(f"failed replicates: {result.failures}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    if args.reps < 1:
        raise ConfigError(f"--reps must be at least 1, got {args.reps}")
    if args.sweep_lambda:
        if args.dgp != "poly_mediation":
            raise ConfigError("--sweep-lambda applies to the poly_mediation DGP only")
        grid = _float_list(args.lambda_grid) if args.lambda_grid else list(DEFAULT_LAMBDA_GRID)
        n_grid = _int_list(args.n) if args.n else [10_000]
        if len(n_grid) != 1:
            raise ConfigError("--sweep-lambda takes a single --n")
        table = lambda_sweep(n_grid[0], grid, args.reps, seed=args.seed, k=args.k,
                             learners=args.learners, threads=args.threads)
        _write_text(args.out_json, _dump({"dgp": "poly_mediation", "n": n_grid[0],
                                          "sweep": table}))
        return 0
    n_grid = _int_list(args.n) if args.n else [50, 100, 250, 500, 1000, 5000]
    if not n_grid or min(n_grid) < 10:
        raise ConfigError("every sample size must be at least 10")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    result = run_comparison(args.dgp, n_grid, args.reps, methods, seed=args.seed, k=args.k,
                            learners=args.learners, threads=args.threads)
    if args.out_csv:
        result.write_csv(args.out_csv)
    _write_text(args.out_json, _dump(result.summary))
    return 0


def cmd_benchmark(args) -> int:
    config = BenchmarkConfig(k=args.k, learners=args.learners, baseline=args.baseline,
                             seed=args.seed, holdout=args.holdout)
    summary = evaluate_ihdp(args.data, config)
    _write_text(args.out, _dump(summary))
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dagsl", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, data=True):
        if data:
            p.add_argument("--data", required=True, help="CSV file with a header row")
            p.add_argument("--dag", required=True, help="DAG JSON file")
        p.add_argument("--k", type=int, default=6, help="cross-validation folds (default 6)")
        p.add_argument("--learners", default=None,
                       help="comma-separated candidates (default: all)")
        p.add_argument("--baseline", action="store_true",
                       help="linear/logistic regression only")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: $DAGSL_THREADS or all CPUs)")

    p = sub.add_parser("validate", help="check a DAG file")
    p.add_argument("dag")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fit-ate", help="fit and report path effects")
    common(p)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_fit_ate)

    p = sub.add_parser("infer", help="intervene, or contrast two interventions")
    common(p)
    p.add_argument("--do", required=True, help="VAR=VALUE[,VAR=VALUE...]")
    p.add_argument("--do2", help="second intervention for a contrast")
    p.add_argument("--outcome", help="outcome of the contrast (Y, or Y:c for a class)")
    p.add_argument("--propagation", choices=PROPAGATION_MODES, default="expected")
    p.add_argument("--out", help="output CSV (default: stdout for a single --do)")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("bootstrap", help="bootstrap the pipeline")
    common(p)
    p.add_argument("--num-bootstraps", type=int, default=10)
    p.add_argument("--subsample-size", type=int, default=None)
    p.add_argument("--mode", choices=MODES, default="ate")
    p.add_argument("--do")
    p.add_argument("--do2")
    p.add_argument("--outcome")
    p.add_argument("--propagation", choices=PROPAGATION_MODES, default="expected")
    p.add_argument("--out", help="JSON result path (default: stdout)")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("simulate", help="simulation comparison or lambda sweep")
    common(p, data=False)
    p.add_argument("--dgp", required=True, choices=DGP_KINDS)
    p.add_argument("--n", help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=70)
    p.add_argument("--methods", default="slem,baseline")
    p.add_argument("--sweep-lambda", action="store_true")
    p.add_argument("--lambda-grid", help="comma-separated lambda2 = lambda3 values")
    p.add_argument("--out-csv", help="row-level absolute errors")
    p.add_argument("--out-json", help="summary JSON (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="IHDP-style benchmark")
    common(p, data=False)
    p.add_argument("--data", nargs="+", required=True, help="replicate CSV files")
    p.add_argument("--holdout", type=float, default=0.1)
    p.add_argument("--out", help="JSON summary path (default: stdout)")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "k", 2) < 2:
            raise ConfigError(f"--k must be at least 2, got {args.k}")
        if getattr(args, "threads", None) is not None:
            args.threads = resolve_threads(args.threads)
        with threadpool_limits(limits=1):
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DagslError as exc:
        print(f"error: {type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
