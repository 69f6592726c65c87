"""Command-line front door.

Subcommands: rates, simulate, lengths, approx-suite, stable-sample, theorem1.
All randomness derives from --seed; outputs land under --out and are never
overwritten without --force.  Exit codes: 0 success, 1 runtime failure,
2 validation error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .rates import (
    AlphaModel,
    RateTable,
    centering_constant,
    jump_distribution,
    total_rate,
)
from .simulator import simulate_path, dump_path_csv, rescaled_walk
from .lengths import (
    CutoffConfig,
    compositions,
    composition_weight,
    ell_bar,
    ell_tilde,
    fluctuation_functional,
    fluctuation_prediction,
    split_lengths,
)
from .stable import StableSpec, limit_vector
from .stats import ExperimentConfig, run_theorem1_experiment
from . import __version__


def _alpha_arg(value: str) -> float:
    try:
        a = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number, got {value!r}")
    if not (1.0 < a < 2.0):
        raise argparse.ArgumentTypeError(f"alpha must lie strictly in (1, 2), got {a}")
    return a


def _positive_int(value: str) -> int:
    iv = int(value)
    if iv <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return iv


def _prepare_out(directory: str, force: bool, names) -> None:
    os.makedirs(directory, exist_ok=True)
    if not force:
        for name in names:
            target = os.path.join(directory, name)
            if os.path.exists(target):
                raise SystemExit(
                    f"refusing to overwrite {target}; pass --force to allow"
                )


def _provenance(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_summary(directory: str, name: str, payload: dict) -> str:
    path = os.path.join(directory, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _cmd_rates(args) -> int:
    model = AlphaModel(args.alpha)
    m = args.m
    dist = jump_distribution(m, model)
    table = RateTable.build(model, m)
    print(f"alpha = {model.alpha}, gamma = {model.gamma}")
    for k in range(2, m + 1):
        lam = np.exp(table.log_lambda_mk[m][k - 2])
        print(f"lambda_{{{m},{k}}} = {format(lam, '.12g')}")
    print(f"lambda_{m} = {format(total_rate(m, model), '.12g')}")
    for d in range(1, min(m, args.show_jumps + 1)):
        print(f"P(jump = {d} | m = {m}) = {format(dist[d - 1], '.12g')}")
    for r in range(1, args.orders + 1):
        print(f"c_{r} = {format(centering_constant(r, model), '.12g')}")
    if args.out:
        _prepare_out(args.out, args.force, [f"rates_m{m}.csv", "rates_summary.json"])
        table.dump_rate_row(m, os.path.join(args.out, f"rates_m{m}.csv"))
        _write_summary(args.out, "rates_summary.json", {"provenance": _provenance(args)})
    return 0


def _cmd_simulate(args) -> int:
    model = AlphaModel(args.alpha)
    path = simulate_path(
        args.n, model, s=args.s, seed=args.seed, record_spectrum=args.record_full or None
    )
    walk = rescaled_walk(path)
    print(f"tau_n = {path.tau_n}")
    print(f"n/gamma = {args.n / model.gamma:.6g}")
    print(f"walk at 1/gamma = {walk.at_cut():.6g}")
    for r in range(1, args.s + 1):
        print(
            f"ell_{r}: exponential = {path.lengths_exponential[r-1]:.6g}, "
            f"rao_blackwell = {path.lengths_rao_blackwell[r-1]:.6g}"
        )
    if args.out:
        names = ["path.csv", "simulate_summary.json"]
        _prepare_out(args.out, args.force, names)
        if path.spectrum_rows is None:
            print("path was streamed (n above recording default); no CSV written")
        else:
            dump_path_csv(path, os.path.join(args.out, "path.csv"))
        _write_summary(
            args.out,
            "simulate_summary.json",
            {
                "provenance": _provenance(args),
                "tau_n": path.tau_n,
                "lengths_exponential": path.lengths_exponential.tolist(),
                "lengths_rao_blackwell": path.lengths_rao_blackwell.tolist(),
            },
        )
    return 0


def _cmd_lengths(args) -> int:
    model = AlphaModel(args.alpha)
    path = simulate_path(args.n, model, s=args.r, seed=args.seed, record_spectrum=True)
    cutoff = CutoffConfig.for_model(model, args.n, args.delta)
    report = {
        "tau_n": path.tau_n,
        "ell_exponential": float(path.lengths_exponential[args.r - 1]),
        "ell_rao_blackwell": float(path.lengths_rao_blackwell[args.r - 1]),
        "ell_tilde": ell_tilde(path, args.r),
        "ell_bar": ell_bar(path, args.r),
        "fluctuation_prediction": fluctuation_prediction(path, args.r, cutoff),
    }
    per_comp = {}
    for parts in compositions(args.r - 1):
        low, high = split_lengths(path, args.r, parts, cutoff)
        per_comp[str(list(parts))] = {
            "weight": composition_weight(model, args.r, parts),
            "L1": low,
            "L2": high,
            "F": fluctuation_functional(path, parts, cutoff),
        }
    report["compositions"] = per_comp
    for key, value in report.items():
        if key != "compositions":
            print(f"{key} = {value}")
    if args.out:
        _prepare_out(args.out, args.force, ["lengths_summary.json"])
        _write_summary(
            args.out,
            "lengths_summary.json",
            {"provenance": _provenance(args), **report},
        )
    return 0


def _cmd_approx_suite(args) -> int:
    from .lengths import MAX_ORDER

    if args.r_max > MAX_ORDER:
        raise SystemExit(f"--r-max beyond supported budget {MAX_ORDER}")
    model = AlphaModel(args.alpha)
    names = ["approx_rows.csv", "approx_summary.json"]
    _prepare_out(args.out, args.force, names)
    rows_path = os.path.join(args.out, "approx_rows.csv")
    fluct = model.fluct_exponent
    medians = {}
    with open(rows_path, "w", newline="") as fh:
        fh.write("n,replicate,r,ell,ell_rb,ell_tilde,ell_bar,L1,L2,F\r\n")
        for n in args.n_grid:
            cutoff = CutoffConfig.for_model(model, n, args.delta)
            gaps = {r: ([], []) for r in range(1, args.r_max + 1)}
            for rep in range(args.reps):
                path = simulate_path(
                    n, model, s=args.r_max, seed=args.seed, replicate=rep,
                    record_spectrum=True,
                )
                for r in range(1, args.r_max + 1):
                    e_exp = float(path.lengths_exponential[r - 1])
                    e_rb = float(path.lengths_rao_blackwell[r - 1])
                    e_til = ell_tilde(path, r)
                    e_bar = ell_bar(path, r)
                    low = high = fsum = 0.0
                    for parts in compositions(r - 1):
                        w = composition_weight(model, r, parts)
                        l1, l2 = split_lengths(path, r, parts, cutoff)
                        low += w * l1
                        high += w * l2
                        fsum += w * fluctuation_functional(path, parts, cutoff)
                    fh.write(
                        f"{n},{rep},{r},{format(e_exp, '.17g')},{format(e_rb, '.17g')},"
                        f"{format(e_til, '.17g')},{format(e_bar, '.17g')},"
                        f"{format(low, '.17g')},{format(high, '.17g')},"
                        f"{format(fsum, '.17g')}\r\n"
                    )
                    gaps[r][0].append(abs(e_exp - e_til) / n**fluct)
                    gaps[r][1].append(abs(e_til - e_bar) / n**fluct)
            for r, (g1, g2) in gaps.items():
                medians[f"n{n}_r{r}_ell_minus_tilde"] = float(np.median(g1))
                medians[f"n{n}_r{r}_tilde_minus_bar"] = float(np.median(g2))
    _write_summary(
        args.out,
        "approx_summary.json",
        {"provenance": _provenance(args), "medians": medians},
    )
    print(f"wrote {rows_path}")
    return 0


def _cmd_stable_sample(args) -> int:
    model = AlphaModel(args.alpha)
    spec = StableSpec(model)
    names = ["stable_samples.csv", "stable_summary.json"]
    _prepare_out(args.out, args.force, names)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    out_path = os.path.join(args.out, "stable_samples.csv")
    with open(out_path, "w", newline="") as fh:
        fh.write("replicate," + ",".join(f"coord_{r}" for r in range(1, args.s + 1)) + "\r\n")
        for rep in range(args.count):
            vec = limit_vector(spec, args.s, args.grid_n, rng)
            fh.write(
                f"{rep}," + ",".join(format(v, ".17g") for v in vec) + "\r\n"
            )
    _write_summary(
        args.out,
        "stable_summary.json",
        {
            "provenance": _provenance(args),
            "tail_constant": spec.tail_constant,
            "sampler_scale": spec.scale,
        },
    )
    print(f"wrote {out_path}")
    return 0


def _cmd_theorem1(args) -> int:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
    else:
        config = ExperimentConfig(
            alpha=args.alpha,
            n_grid=tuple(args.n_grid) if args.n_grid else (args.n,),
            replicates=args.reps,
            s=args.s,
            seed_root=args.seed,
            delta=args.delta,
            threads=args.threads,
        )
    names = ["theorem1_summary.csv", "theorem1_summary.json"]
    _prepare_out(args.out, args.force, names)
    config.output_path = None
    table = run_theorem1_experiment(config)
    table.provenance["cli"] = _provenance(args)
    table.to_csv(os.path.join(args.out, "theorem1_summary.csv"))
    table.to_json(os.path.join(args.out, "theorem1_summary.json"))
    print(f"wrote {os.path.join(args.out, 'theorem1_summary.csv')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betacoal",
        description="Beta-coalescent branch-length simulation and verification toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="inspect merger rates and jump laws at one state")
    p.add_argument("--alpha", type=_alpha_arg, required=True, help="stability parameter in (1,2)")
    p.add_argument("--m", type=_positive_int, required=True, help="block count (>= 2)")
    p.add_argument("--show-jumps", type=int, default=5, help="jump sizes to print (default 5)")
    p.add_argument("--orders", type=int, default=3, help="centering constants to print")
    p.add_argument("--out", help="output directory for the CSV rate row")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("simulate", help="simulate one trajectory")
    p.add_argument("--alpha", type=_alpha_arg, required=True)
    p.add_argument("--n", type=_positive_int, required=True, help="number of leaves")
    p.add_argument("--s", type=_positive_int, default=1, help="largest tracked block size")
    p.add_argument("--seed", type=int, default=0, help="root seed (all randomness derives from it)")
    p.add_argument("--record-full", action="store_true",
                   help="record spectrum rows regardless of n")
    p.add_argument("--out", help="output directory for path.csv")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("lengths", help="length approximants along one recorded path")
    p.add_argument("--alpha", type=_alpha_arg, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--r", type=_positive_int, default=2, help="branch order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.8, help="cutoff exponent in (1/alpha, 1)")
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_lengths)

    p = sub.add_parser("approx-suite", help="trend rows for the approximation chain")
    p.add_argument("--alpha", type=_alpha_arg, required=True)
    p.add_argument("--n-grid", type=_positive_int, nargs="+", required=True)
    p.add_argument("--reps", type=_positive_int, default=50)
    p.add_argument("--r-max", type=_positive_int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.8)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_approx_suite)

    p = sub.add_parser("stable-sample", help="joint stable-integral samples")
    p.add_argument("--alpha", type=_alpha_arg, required=True)
    p.add_argument("--count", type=_positive_int, default=1000)
    p.add_argument("--s", type=_positive_int, default=3)
    p.add_argument("--grid-n", type=_positive_int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_stable_sample)

    p = sub.add_parser("theorem1", help="centered/rescaled length-vector experiment")
    p.add_argument("--alpha", type=_alpha_arg, default=1.5)
    p.add_argument("--n", type=_positive_int, default=100_000)
    p.add_argument("--n-grid", type=_positive_int, nargs="+",
                   help="optional grid overriding --n")
    p.add_argument("--reps", type=_positive_int, default=2000)
    p.add_argument("--s", type=_positive_int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.8)
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--config", help="key=value config file overriding the flags")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_theorem1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
