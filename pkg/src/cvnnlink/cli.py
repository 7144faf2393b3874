"""Command-line front end.

Subcommands:

* ``run``             one experiment (first seed of the config, or --seed),
                      emits result.json + frames.csv + figures.
* ``sweep``           BER vs Eb/N0 over seeds and architectures, emits
                      ber_table.csv + per-run JSON + figure.
* ``gradcheck``       finite-difference validation of every architecture's
                      analytic gradients; nonzero exit on failure.
* ``complexity``      per-architecture real-multiplication counts, sorted
                      by training cost.
* ``validate-config`` parse a config (with overrides) and echo it.

Exit codes: 0 success, 1 validation/config error, 2 runtime or numeric
error.  Re-running with the same config and seed produces byte-identical
CSV/JSON payloads; every emitted file embeds the resolved config and the
package version.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, apply_overrides, describe_schema
from .cvnn import (ARCHITECTURES, NetworkConfig, complexity,
                   default_hidden_width, gradient_check)
from .harness import ber_curve, run_experiment

_FRAMES_SCHEMA = "cvnnlink-frames-v1"
_RUN_SCHEMA = "cvnnlink-run-v1"
_SWEEP_SCHEMA = "cvnnlink-sweep-v1"


def _load_config(args):
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {args.config!r}: {err}") from None
    base = os.path.dirname(os.path.abspath(args.config))
    return apply_overrides(text, args.set or [], source=args.config, base_dir=base)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _provenance_lines(config_dict: dict) -> list:
    return [
        f"# config: {json.dumps(config_dict, sort_keys=True)}",
        f"# package_version: {__version__}",
    ]


def _cmd_run(args) -> int:
    config = _load_config(args)
    seed = args.seed if args.seed is not None else config.seeds[0]
    result = run_experiment(config, seed)
    os.makedirs(args.out, exist_ok=True)

    frames_path = os.path.join(args.out, "frames.csv")
    with open(frames_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {_FRAMES_SCHEMA}\n")
        for line in _provenance_lines(result.config):
            fh.write(line + "\n")
        fh.write(f"# seed: {seed}\n")
        writer = csv.writer(fh)
        writer.writerow(["frame", "kind", "mse_db", "ber"])
        for rec in result.records:
            writer.writerow([rec.index, rec.kind, _fmt(rec.mse_db), _fmt(rec.ber)])

    payload = {"schema": _RUN_SCHEMA, "package_version": __version__}
    payload.update(result.to_dict())
    _write_json(payload, os.path.join(args.out, "result.json"))

    if not args.no_plots:
        from . import plots
        plots.plot_run_mse(result, os.path.join(args.out, "mse_convergence.png"))
        plots.plot_run_ber(result, os.path.join(args.out, "ber_trace.png"))

    print(f"run: seed {seed}, {len(result.records)} frames, "
          f"steady-state MSE {_fmt(result.steady_state_mse_db) or 'n/a'} dB, "
          f"BER {_fmt(result.ber_overall) or 'n/a'}, "
          f"converged at {_fmt(result.convergence_frame) or 'never'}")
    print(f"wrote {frames_path}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    ebn0_list = [float(v) for v in args.ebn0.split(",") if v.strip() != ""]
    if not ebn0_list:
        raise ConfigError(f"--ebn0 produced no points: {args.ebn0!r}")
    architectures = [a.strip() for a in args.architectures.split(",")] if args.architectures \
        else [config.architecture]
    for arch in architectures:
        if arch not in ARCHITECTURES:
            raise ConfigError(f"unknown architecture {arch!r} in --architectures")
    seeds = config.seeds
    os.makedirs(args.out, exist_ok=True)

    partial_path = os.path.join(args.out, "ber_table.partial.csv")
    with open(partial_path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerow(["ebn0_db", "architecture", "mean_ber", "std_ber"])

    def flush_point(row):
        with open(partial_path, "a", encoding="utf-8", newline="") as fh:
            csv.writer(fh).writerow([_fmt(row["ebn0_db"]), row["architecture"],
                                     _fmt(row["mean_ber"]), _fmt(row["std_ber"])])

    with open(args.config, "r", encoding="utf-8") as fh:
        config_text = fh.read()
    base = os.path.dirname(os.path.abspath(args.config))

    all_rows = []
    for arch in architectures:
        arch_config = config if arch == config.architecture else apply_overrides(
            config_text, (args.set or []) + [f"architecture={arch}"],
            source=args.config, base_dir=base)
        table, runs = ber_curve(arch_config, ebn0_list, seeds,
                                workers=args.workers, on_point=flush_point)
        all_rows.extend(table)
        for run in runs:
            name = f"run_{run['architecture']}_ebn0_{run['ebn0_db']:g}_seed_{run['seed']}.json"
            payload = {"schema": _RUN_SCHEMA, "package_version": __version__,
                       "config": arch_config.to_dict()}
            payload.update(run)
            _write_json(payload, os.path.join(args.out, name))

    all_rows.sort(key=lambda r: (r["ebn0_db"], r["architecture"]))
    table_path = os.path.join(args.out, "ber_table.csv")
    with open(table_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {_SWEEP_SCHEMA}\n")
        for line in _provenance_lines(config.to_dict()):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["ebn0_db", "architecture", "mean_ber", "std_ber"])
        for row in all_rows:
            writer.writerow([_fmt(row["ebn0_db"]), row["architecture"],
                             _fmt(row["mean_ber"]), _fmt(row["std_ber"])])

    if not args.no_plots:
        from . import plots
        plots.plot_ber_table(all_rows, os.path.join(args.out, "ber_vs_ebn0.png"))
    print(f"sweep: {len(all_rows)} points over {architectures}, wrote {table_path}")
    return 0


def _cmd_gradcheck(args) -> int:
    reports = []
    failed = False
    for arch in ARCHITECTURES:
        report = gradient_check(arch, n_in=args.n_in, n_hidden=args.hidden,
                                n_out=args.n_out, draws=args.draws, h=args.step, seed=args.seed)
        ok = report["max_rel_err"] < args.tol
        failed |= not ok
        reports.append(report)
        print(f"[{'PASS' if ok else 'FAIL'}] {arch}: max relative gradient error "
              f"{report['max_rel_err']:.3e} (worst: {report['param']}[{report['index']}], "
              f"tolerance {args.tol:g})")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        payload = {
            "schema": "cvnnlink-gradcheck-v1",
            "package_version": __version__,
            "tolerance": args.tol,
            "dims": {"n_in": args.n_in, "n_hidden": args.hidden, "n_out": args.n_out},
            "draws": args.draws,
            "step": args.step,
            "reports": reports,
        }
        _write_json(payload, os.path.join(args.out, "gradcheck.json"))
    return 2 if failed else 0


def _cmd_complexity(args) -> int:
    if args.config:
        config = _load_config(args)
        n_in, n_out = config.n_in, config.n_out
        hidden = {arch: (config.n_hidden if arch == config.architecture
                         else default_hidden_width(arch)) for arch in ARCHITECTURES}
    else:
        n_in, n_out = args.n_in, args.n_out
        hidden = {arch: default_hidden_width(arch) for arch in ARCHITECTURES}
    counts = {arch: complexity(NetworkConfig(arch, n_in, hidden[arch], n_out))
              for arch in ARCHITECTURES}
    order = sorted(ARCHITECTURES, key=lambda a: counts[a].train_real_mults)

    header = f"{'architecture':<14}{'hidden':>8}{'train_mults':>14}{'infer_mults':>14}"
    print(header)
    for arch in order:
        c = counts[arch]
        print(f"{arch:<14}{hidden[arch]:>8}{c.train_real_mults:>14,}{c.infer_real_mults:>14,}")

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "complexity.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("# schema: cvnnlink-complexity-v1\n")
            fh.write(f"# package_version: {__version__}\n")
            fh.write(f"# dims: n_in={n_in} n_out={n_out}\n")
            writer = csv.writer(fh)
            writer.writerow(["architecture", "hidden", "train_real_mults", "infer_real_mults"])
            for arch in order:
                c = counts[arch]
                writer.writerow([arch, hidden[arch], c.train_real_mults, c.infer_real_mults])
        if not args.no_plots:
            from . import plots
            plots.plot_complexity(counts, os.path.join(args.out, "complexity.png"))
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    config = _load_config(args)
    print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvnnlink",
        description=__doc__.split("\n\n")[0],
        epilog="Config keys:\n" + describe_schema(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"cvnnlink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")

    p_run = sub.add_parser("run", help="run one experiment and write results")
    add_config_args(p_run)
    p_run.add_argument("--out", default="out/run", help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the run seed")
    p_run.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="BER vs Eb/N0 sweep")
    add_config_args(p_sweep)
    p_sweep.add_argument("--out", default="out/sweep", help="output directory")
    p_sweep.add_argument("--ebn0", default="0,2,4,6,8,10,12,14,16,18,20",
                         help="comma-separated Eb/N0 grid in dB")
    p_sweep.add_argument("--architectures", default=None,
                         help="comma-separated list (default: the config's architecture)")
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="parallel runs (default: number of Eb/N0 points, capped by CPUs)")
    p_sweep.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_grad = sub.add_parser("gradcheck", help="finite-difference gradient validation")
    p_grad.add_argument("--n-in", type=int, default=8)
    p_grad.add_argument("--hidden", type=int, default=5)
    p_grad.add_argument("--n-out", type=int, default=2)
    p_grad.add_argument("--draws", type=int, default=20)
    p_grad.add_argument("--step", type=float, default=1e-6, help="finite-difference step h")
    p_grad.add_argument("--tol", type=float, default=1e-5, help="max relative error allowed")
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--out", default=None, help="optional directory for gradcheck.json")
    p_grad.set_defaults(func=_cmd_gradcheck)

    p_cx = sub.add_parser("complexity", help="real-multiplication counts per architecture")
    p_cx.add_argument("--config", default=None, help="take dims from a config file")
    p_cx.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_cx.add_argument("--n-in", type=int, default=1024)
    p_cx.add_argument("--n-out", type=int, default=32)
    p_cx.add_argument("--out", default=None, help="optional directory for complexity.csv")
    p_cx.add_argument("--no-plots", action="store_true")
    p_cx.set_defaults(func=_cmd_complexity)

    p_val = sub.add_parser("validate-config", help="parse a config and echo it")
    add_config_args(p_val)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ArithmeticError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
