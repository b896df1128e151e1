"""Command-line interface.

Subcommands: ``dnorm``, ``simulate``, ``estimate``, ``lan``, ``experiment``.
All output is deterministic under ``--seed``; CSV files are comma-separated
with a header row and one record per path or replication.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, backend
from .dnorm import GridFunction, d_norm, inf_functional, tail_dependence_mass
from .errors import ConfigError, GpplabError
from .estimators import estimate_beta, estimate_psi, estimate_theta, psi_from_count, theta_from_count
from .generator import build_generator, validate_generator
from .harness import ExperimentConfig, load_config, run_experiment, write_rows_csv
from .kernels import beta_from_theta, kernel_by_name
from .lan import exceedance_sample
from .processes import sample_gpp, sample_neighborhood, ydist_by_name


def _emit_json(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _resolve_beta(args, kernel):
    if (args.beta is None) == (getattr(args, "theta0", None) is None):
        raise ConfigError("specify exactly one of --beta and --theta0")
    if args.beta is not None:
        return args.beta
    return beta_from_theta(kernel, args.theta0)


def _threshold_function(args) -> GridFunction:
    if args.values_csv:
        values = np.loadtxt(args.values_csv, delimiter=",", ndmin=1)
        return GridFunction(values)
    if args.preset == "constant":
        return GridFunction.constant(-1.0, args.grid_size)
    if args.preset == "exp-decay":
        return GridFunction.exp_decay(args.grid_size)
    raise ConfigError(f"unknown threshold preset {args.preset!r}")


def _cmd_dnorm(args) -> int:
    kernel = kernel_by_name(args.kernel)
    f = _threshold_function(args)
    _emit_json(
        {
            "kernel": args.kernel,
            "beta": args.beta,
            "grid_size": f.grid_size,
            "d_norm": d_norm(f, args.beta, kernel),
            "inf_functional": inf_functional(f, args.beta, kernel),
            "tail_dependence_mass": tail_dependence_mass(args.beta, kernel),
        }
    )
    return 0


def _make_ydist(args):
    if args.ydist == "expansion":
        return ydist_by_name("expansion", bias_amplitude=args.ydist_a, expansion_order=args.ydist_delta)
    return ydist_by_name(args.ydist)


def _cmd_simulate(args) -> int:
    kernel = kernel_by_name(args.kernel)
    beta = _resolve_beta(args, kernel)
    gen = build_generator(kernel, beta, args.mixing_rate)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    if args.validate_generator:
        report = validate_generator(gen, args.n_mc, rng, grid_size=args.grid_size)
        _emit_json(report.to_dict())
        return 0
    if args.model == "gpp":
        batch = sample_gpp(gen, args.n, rng, lower_cap=args.lower_cap, grid_size=args.grid_size)
    else:
        batch = sample_neighborhood(
            gen, _make_ydist(args), args.n, rng, lower_cap=args.lower_cap, grid_size=args.grid_size
        )
    out = args.out or "-"
    handle = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.writer(handle, lineterminator="\n")
        # the header row carries the grid metadata through the column names
        t = GridFunction(batch.values[0]).t
        writer.writerow(["path"] + [f"t={float(ti)!r}" for ti in t])
        for i, path in enumerate(batch.values):
            writer.writerow([str(i)] + [repr(float(v)) for v in path])
    finally:
        if handle is not sys.stdout:
            handle.close()
    return 0


def _cmd_estimate(args) -> int:
    kernel = kernel_by_name(args.kernel)
    beta = _resolve_beta(args, kernel)
    reports = []
    csv_rows = []
    if args.batch_csv:
        batch_values = np.loadtxt(args.batch_csv, delimiter=",", skiprows=1, ndmin=2)[:, 1:]
        from .processes import ProcessBatch

        batch = ProcessBatch(values=batch_values, lower_cap=args.lower_cap, provenance="csv")
        psi = estimate_psi(batch, args.c)
        reports = [psi, estimate_beta(psi.estimate, kernel, n=batch.n, c=args.c)]
        sample = exceedance_sample(batch, args.c)
        reports.append(estimate_theta(sample.count, batch.n, args.c))
    else:
        gen = build_generator(kernel, beta, args.mixing_rate)
        ydist = _make_ydist(args) if args.model == "neighborhood" else None
        from .processes import exceedance_scan

        for rep in range(args.replications):
            rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(0, rep, 0)))
            count, _ = exceedance_scan(
                gen,
                args.c,
                args.n,
                rng,
                ydist=ydist,
                lower_cap=args.lower_cap,
                grid_size=args.grid_size,
                keep_positions=False,
            )
            psi_value = psi_from_count(count, args.n, args.c)
            row = {
                "replication": rep,
                "count": count,
                "psi": psi_value,
                "theta": theta_from_count(count, args.n, args.c),
            }
            if 0.0 < psi_value < 1.0:
                row["beta"] = estimate_beta(psi_value, kernel, n=args.n, c=args.c).estimate
            csv_rows.append(row)
        last = csv_rows[-1]
        reports = [
            {"estimator": "psi", "estimate": last["psi"], "n": args.n, "c": args.c},
            {"estimator": "theta", "estimate": last["theta"], "n": args.n, "c": args.c},
        ]
        if "beta" in last:
            reports.append({"estimator": "beta", "estimate": last["beta"], "n": args.n, "c": args.c})
    if args.emit_csv and csv_rows:
        write_rows_csv(args.emit_csv, csv_rows)
    _emit_json(
        {
            "kernel": args.kernel,
            "beta": beta,
            "reports": [r if isinstance(r, dict) else _report_dict(r) for r in reports],
        }
    )
    return 0


def _report_dict(report) -> dict:
    return {
        "estimator": report.estimator,
        "estimate": report.estimate,
        "n": report.n,
        "c": report.c,
        "asymptotic_variance": report.asymptotic_variance,
        "flags": list(report.flags),
    }


def _cmd_lan(args) -> int:
    config = ExperimentConfig(
        kind="lan",
        name=args.name,
        kernel=args.kernel,
        theta0=args.theta0,
        model="gpp",
        kappa=args.kappa,
        rate_a=args.rate_a,
        n_list=tuple(args.n_list),
        replications=args.replications,
        seed=args.seed,
        grid_size=args.grid_size,
        lower_cap=args.lower_cap,
        mixing_rate=args.mixing_rate,
        xi_list=tuple(args.xi_list),
        workers=args.workers,
    ).validate()
    return _write_experiment(run_experiment(config), args)


def _cmd_experiment(args) -> int:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.workers is not None:
        overrides["workers"] = str(args.workers)
    config = load_config(args.config, overrides)
    return _write_experiment(run_experiment(config), args)


def _write_experiment(result, args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = result.config["name"]
    rows_path = out_dir / f"{name}_rows.csv"
    summary_path = out_dir / f"{name}_summary.json"
    result.write_csv(rows_path)
    result.write_json(summary_path)
    if args.format == "json":
        _emit_json(result.to_json_dict())
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["n", "estimator", "mean", "variance", "target_mean", "target_variance", "passed"])
        for s in result.summaries:
            writer.writerow(
                [s.n, s.estimator, repr(s.empirical_mean), repr(s.empirical_variance),
                 repr(s.target_mean), repr(s.target_variance), s.passed]
            )
    sys.stderr.write(f"rows: {rows_path}\nsummary: {summary_path}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpplab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gpplab {__version__} ({backend.BACKEND} core)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dnorm", help="evaluate the D-norm and inf-functional of a threshold function")
    p.add_argument("--kernel", default="laplace")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--preset", default="constant", choices=["constant", "exp-decay"])
    p.add_argument("--values-csv", help="CSV file with one grid value per entry (overrides --preset)")
    p.add_argument("--grid-size", type=int, default=1024)
    p.set_defaults(func=_cmd_dnorm)

    p = sub.add_parser("simulate", help="simulate process paths (CSV) or validate a generator (JSON)")
    _sim_args(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--out", help="output CSV path; default stdout")
    p.add_argument("--validate-generator", action="store_true")
    p.add_argument("--n-mc", type=int, default=100_000, help="draws for --validate-generator")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate psi/beta/theta from a batch CSV or inline simulation")
    _sim_args(p)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--batch-csv", help="read a 'simulate' CSV instead of simulating inline")
    p.add_argument("--emit-csv", help="append one row per replication to this CSV")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("lan", help="replication sweep of the exceedance point process")
    p.add_argument("--kernel", default="laplace")
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--xi-list", type=float, nargs="+", required=True)
    p.add_argument("--n-list", type=int, nargs="+", required=True)
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--rate-a", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-size", type=int, default=1024)
    p.add_argument("--lower-cap", type=float, default=-10.0)
    p.add_argument("--mixing-rate", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--name", default="lan")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.set_defaults(func=_cmd_lan)

    p = sub.add_parser("experiment", help="run a config-file experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.set_defaults(func=_cmd_experiment)
    return parser


def _sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default="laplace")
    p.add_argument("--beta", type=float)
    p.add_argument("--theta0", type=float)
    p.add_argument("--model", default="gpp", choices=["gpp", "neighborhood"])
    p.add_argument("--ydist", default="uniform", choices=["uniform", "exponential", "expansion"])
    p.add_argument("--ydist-a", type=float, default=-0.5)
    p.add_argument("--ydist-delta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-size", type=int, default=1024)
    p.add_argument("--lower-cap", type=float, default=-10.0)
    p.add_argument("--mixing-rate", type=float, default=0.5)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GpplabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
