"""Command-line experiment runner.

Subcommands:

* ``synth``         generate the rotating-subspaces scenario and run the
                    selected clustering arms on it
* ``run``           run the arms on an external sequence in manifest format
* ``dump-scenario`` write a generated synthetic sequence to disk

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure (ADMM non-convergence, escalated only under --strict).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from .cesm import DegenerateProblemError
from .core import ZeroColumnError
from .experiment import ExperimentConfig, run_experiment, METHODS
from .learners import LearnerConfig, NotConvergedWarning
from .seqio import (DimensionMismatchError, MalformedMatrixError,
                    ManifestMissingError, dump_sequence, load_sequence)
from .synthgen import MergeEvent, ScenarioConfig, generate_sequence

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_DATA_ERRORS = (ManifestMissingError, MalformedMatrixError,
                DimensionMismatchError, ZeroColumnError, DegenerateProblemError)


def _add_learner_flags(p: argparse.ArgumentParser):
    p.add_argument("--learner", choices=("omp", "aols", "bp"), default="omp")
    p.add_argument("--k", type=int, default=None,
                   help="sparsity level per column (default: subspace dimension "
                        "for synth, 5 otherwise)")
    p.add_argument("--L", type=int, default=1, help="atoms per AOLS iteration")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="basis pursuit data-fit weight (default: auto)")
    p.add_argument("--rho", type=float, default=None, help="ADMM penalty (default: lambda)")
    p.add_argument("--admm-max-iters", type=int, default=200)
    p.add_argument("--admm-tol", type=float, default=1e-5)
    p.add_argument("--admm-update", choices=("derived", "as_printed"), default="derived")
    p.add_argument("--residual-stop", type=float, default=1e-7)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--methods", default="cesm,static,affect",
                   help="comma-separated subset of cesm,static,affect")
    p.add_argument("--affect-alpha", type=float, default=0.5)
    p.add_argument("--kmeans-restarts", type=int, default=20)
    p.add_argument("--kmeans-max-iters", type=int, default=300)
    p.add_argument("--include-initial", action="store_true",
                   help="include t=1 rows in summary aggregates")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_time_s as 0.0 for reproducible output")
    p.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    p.add_argument("--strict", action="store_true",
                   help="escalate solver non-convergence to an error")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--config", default=None,
                   help="JSON file supplying any of these fields; flags override")


def _add_scenario_flags(p: argparse.ArgumentParser):
    p.add_argument("--ambient-dim", type=int, default=10, help="ambient dimension")
    p.add_argument("--subspace-dim", type=int, default=6, help="subspace dimension")
    p.add_argument("--n-subspaces", type=int, default=10)
    p.add_argument("--points-per-subspace", type=int, default=50)
    p.add_argument("--horizon", type=int, default=20, help="number of time steps")
    p.add_argument("--rotation-deg", type=float, default=45.0)
    p.add_argument("--merge", default=None, metavar="FROM:INTO:T_START:T_END",
                   help="absorption event, e.g. 10:9:6:13")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evosc",
        description="Evolutionary subspace clustering experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic scenario and run it")
    _add_scenario_flags(p_synth)
    _add_learner_flags(p_synth)
    _add_run_flags(p_synth)

    p_run = sub.add_parser("run", help="run on an external manifest sequence")
    p_run.add_argument("--manifest", required=True, help="manifest file or directory")
    p_run.add_argument("--n-clusters", type=int, default=None,
                       help="cluster count (required when no ground truth)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--trials", type=int, default=1)
    _add_learner_flags(p_run)
    _add_run_flags(p_run)

    p_dump = sub.add_parser("dump-scenario", help="write a synthetic sequence to disk")
    _add_scenario_flags(p_dump)
    p_dump.add_argument("--output-dir", required=True)
    return parser


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Fields from --config JSON fill in flags the user left at their default.

    Explicit flags win over the config file. The required flags
    (--output-dir, --manifest) are always taken from the command line.
    """
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file: {exc}")
    stub = [args.command] + _required_stub(args)
    defaults = parser.parse_args(stub)
    for key, value in overrides.items():
        if key in ("output_dir", "manifest", "config", "command"):
            continue
        if not hasattr(args, key):
            parser.error(f"unknown config field {key!r}")
        if getattr(args, key) == getattr(defaults, key, object()):
            setattr(args, key, value)


def _required_stub(args) -> list[str]:
    stub = []
    if getattr(args, "output_dir", None) is not None:
        stub += ["--output-dir", str(args.output_dir)]
    if getattr(args, "manifest", None) is not None:
        stub += ["--manifest", str(args.manifest)]
    return stub


def _scenario_from_args(args) -> ScenarioConfig:
    merge = None
    if args.merge:
        try:
            frm, into, t0, t1 = (int(v) for v in str(args.merge).split(":"))
        except ValueError:
            raise ValueError("--merge expects FROM:INTO:T_START:T_END")
        merge = MergeEvent(absorb_from=frm, absorb_into=into, t_start=t0, t_end=t1)
    return ScenarioConfig(
        D=args.ambient_dim, d=args.subspace_dim, n=args.n_subspaces,
        points_per_subspace=args.points_per_subspace, T=args.horizon,
        rotation_deg=args.rotation_deg, merge_event=merge,
        trials=args.trials, seed=args.seed)


def _learner_from_args(args, default_k: int) -> LearnerConfig:
    k = args.k if args.k is not None else default_k
    return LearnerConfig(
        method=args.learner, k=k, L=args.L, lam=args.lam, rho=args.rho,
        admm_max_iters=args.admm_max_iters, admm_tol=args.admm_tol,
        admm_update=args.admm_update, residual_stop=args.residual_stop)


def _experiment_from_args(args, command: str) -> ExperimentConfig:
    methods = tuple(m.strip() for m in str(args.methods).split(",") if m.strip())
    if command == "synth":
        scenario = _scenario_from_args(args)
        learner = _learner_from_args(args, default_k=scenario.d)
        return ExperimentConfig(
            scenario=scenario, methods=methods, learner=learner,
            kmeans_restarts=args.kmeans_restarts, kmeans_max_iters=args.kmeans_max_iters,
            affect_alpha=args.affect_alpha, output_dir=args.output_dir,
            seed=args.seed, include_initial=args.include_initial,
            timing=not args.no_timing, jobs=args.jobs)
    learner = _learner_from_args(args, default_k=5)
    return ExperimentConfig(
        sequence_path=args.manifest, methods=methods, learner=learner,
        n_clusters=args.n_clusters, kmeans_restarts=args.kmeans_restarts,
        kmeans_max_iters=args.kmeans_max_iters, affect_alpha=args.affect_alpha,
        output_dir=args.output_dir, seed=args.seed, trials=args.trials,
        include_initial=args.include_initial, timing=not args.no_timing,
        jobs=args.jobs)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "dump-scenario":
        try:
            scenario = _scenario_from_args(args)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        rng = np.random.default_rng(scenario.seed)
        seq = generate_sequence(scenario, rng)
        manifest = dump_sequence(seq, args.output_dir)
        print(manifest)
        return EXIT_OK

    _apply_config_file(args, parser)
    try:
        cfg = _experiment_from_args(args, args.command)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    strict = getattr(args, "strict", False)
    try:
        with warnings.catch_warnings():
            if strict:
                warnings.simplefilter("error", NotConvergedWarning)
            rows = run_experiment(cfg)
    except NotConvergedWarning as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"{len(rows)} result rows written to {cfg.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
