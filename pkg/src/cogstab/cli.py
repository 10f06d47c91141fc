"""Command-line interface.

Subcommands: analyze (closed-form report for one configuration),
simulate (replicated Monte Carlo run), sweep (canned or custom
experiment specs, tables plus companion figures), optimize (secondary
sum-throughput maximization across arrival rates), validate (the
analytic-vs-simulation battery).

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
configuration, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, analysis
from .config import SymmetricConfig, config_to_dict, load_config
from .errors import CogstabError, ConfigError, InfeasiblePrimaryError
from .simulator import SimConfig, run_replications, run_slots
from .sweeps import (
    CANNED_SPECS,
    Family,
    OPTIMIZE_COLUMNS,
    SWEEP_COLUMNS,
    format_table,
    load_spec,
    run_optimize,
    run_sweep,
    sim_mode_for,
    table_meta,
)

JOBS_ENV = "COGSTAB_JOBS"


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _parse_grid_arg(text: str) -> list[float]:
    """Either comma-separated values or start:stop:count."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("grid must be 'a,b,c' or 'start:stop:count'")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError("grid count must be >= 1")
        if count == 1:
            return [start]
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_list_arg(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cogstab",
                     description="Cognitive-network stable-throughput toolkit")
    parser.add_argument("--version", action="version", version=f"cogstab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="closed-form report for one configuration")
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("simulate", help="Monte Carlo run with replications")
    p.add_argument("--config", required=True)
    p.add_argument("--slots", type=int, default=None, help="slots per replication")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--trace", help="write a per-slot trace table here (single replication)")
    p.add_argument("--trace-every", type=int, default=1)

    p = sub.add_parser("sweep", help="run an experiment spec (canned name or path)")
    p.add_argument("spec", help=f"spec path or one of: {', '.join(CANNED_SPECS)}")
    p.add_argument("--out", help="output table path (default from the spec)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--no-plot", action="store_true",
                   help="skip the companion PNG figure")

    p = sub.add_parser("optimize", help="maximize secondary sum throughput over (q, p0)")
    p.add_argument("--config", required=True)
    p.add_argument("--lambda-p", required=True, dest="lambda_grid",
                   help="normalized arrival-rate grid: 'a,b,c' or 'start:stop:count'")
    p.add_argument("--n-list", help="comma list of secondary populations to optimize for")
    p.add_argument("--pe-list", help="comma list of miss probabilities to optimize for")
    p.add_argument("--grid-q", type=int, default=200)
    p.add_argument("--grid-p0", type=int, default=200)
    p.add_argument("--p0-cap", type=float, default=None,
                   help="hardware power cap (overrides the config)")
    p.add_argument("--out", help="output table path (default optimize.csv)")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("validate", help="run the cross-check battery")
    p.add_argument("--battery", choices=("standard", "extended"), default="standard")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--slots", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="write the JSON check report here")
    p.add_argument("--quiet", action="store_true", help="suppress per-check lines")
    return parser


def cmd_analyze(args) -> int:
    bundle = load_config(args.config)
    report = analysis.analytical_report(bundle.config, bundle.lambda_p or 0.0,
                                        relay=bundle.relay)
    _emit(_json_dump(report.to_dict()), args.out)
    return 0


def cmd_simulate(args) -> int:
    bundle = load_config(args.config)
    sim_opts = bundle.sim
    slots = args.slots if args.slots is not None else int(sim_opts.get("n_slots", 200_000))
    seed = args.seed if args.seed is not None else int(sim_opts.get("seed", 0))
    replications = (args.replications if args.replications is not None
                    else int(sim_opts.get("replications", 1)))
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    mode = sim_opts.get("mode", sim_mode_for(bundle))
    net = (bundle.config.expand() if isinstance(bundle.config, SymmetricConfig)
           else bundle.config)
    warmup = sim_opts.get("warmup_slots")
    if bundle.lambda_p is None:
        raise ConfigError("simulate requires 'lambda_p' in the configuration")
    sc = SimConfig(network=net, lambda_p=bundle.lambda_p, n_slots=slots, seed=seed,
                   mode=mode, warmup_slots=warmup)
    if args.trace:
        if replications != 1:
            raise ConfigError("--trace requires a single replication")
        res = run_slots(sc.replace(trace_every=max(1, args.trace_every)))
        lines = ["slot\tprimary_queue\trelay_queue_lens\tprimary_tx\tprimary_success"
                 "\trelay_tx\trelay_success\town_tx_mask\town_success_mask"]
        for row in res.trace:
            lens = ";".join(str(v) for v in row.relay_queue_lens)
            lines.append("\t".join(str(v) for v in (
                row.slot, row.primary_queue, lens, int(row.primary_tx),
                int(row.primary_success), int(row.relay_tx), int(row.relay_success),
                row.own_tx_mask, row.own_success_mask)))
        Path(args.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        res = run_replications(sc, replications, jobs=jobs)
    payload = {
        "config": config_to_dict(bundle.config),
        "mode": mode,
        "slots": slots,
        "seed": seed,
        "replications": replications,
        "version": __version__,
        "result": res.to_dict(),
    }
    _emit(_json_dump(payload), args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = load_spec(args.spec)
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    out_path = args.out or spec.output_path or f"{spec.name}.csv"
    meta = table_meta(spec.name, spec.sha256(), args.seed)
    if spec.kind == "optimize":
        rows = run_optimize(spec, spec.grid)
        text = format_table(OPTIMIZE_COLUMNS, rows, meta)
        Path(out_path).write_text(text, encoding="utf-8")
        if not args.no_plot:
            from .plots import render_optimize_plot

            render_optimize_plot(rows, str(Path(out_path).with_suffix(".png")),
                                 title=spec.name)
    else:
        rows = run_sweep(spec, seed=args.seed, jobs=jobs)
        text = format_table(SWEEP_COLUMNS, rows, meta)
        Path(out_path).write_text(text, encoding="utf-8")
        if not args.no_plot:
            from .plots import render_sweep_plot

            render_sweep_plot(rows, str(Path(out_path).with_suffix(".png")),
                              title=spec.name, log_x=spec.log_axis)
    errors = sum(1 for r in rows if getattr(r, "verdict", "").startswith("error")
                 or getattr(r, "feasible", True) is False)
    print(f"wrote {out_path} ({len(rows)} rows, {errors} flagged)", file=sys.stderr)
    return 0


def cmd_optimize(args) -> int:
    bundle = load_config(args.config)
    sym = bundle.symmetric
    fracs = _parse_grid_arg(args.lambda_grid)
    n_list = [int(v) for v in _parse_list_arg(args.n_list)] if args.n_list else [sym.n_secondary]
    pe_list = _parse_list_arg(args.pe_list) if args.pe_list else [sym.pe]
    families = tuple(
        Family(label=f"N={n} pe={pe:g}", overrides={"n_secondary": n, "pe": pe})
        for n in n_list for pe in pe_list)
    cap = args.p0_cap if args.p0_cap is not None else bundle.p0_cap
    if cap is None:
        raise ConfigError("optimize requires a power cap: set p0_cap in the config "
                          "or pass --p0-cap")
    rows = run_optimize(bundle, fracs, families=families,
                        opt_grid=(args.grid_q, args.grid_p0), p0_cap=cap)
    out_path = args.out or "optimize.csv"
    meta = {"experiment": "optimize", "config": args.config, "version": __version__,
            "seed": 0}
    text = format_table(OPTIMIZE_COLUMNS, rows, meta)
    Path(out_path).write_text(text, encoding="utf-8")
    if not args.no_plot:
        from .plots import render_optimize_plot

        render_optimize_plot(rows, str(Path(out_path).with_suffix(".png")),
                             title="optimized secondary sum throughput")
    infeasible = sum(1 for r in rows if not r.feasible)
    print(f"wrote {out_path} ({len(rows)} rows, {infeasible} infeasible)", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    from .validate import DEFAULT_SEED, DEFAULT_SLOTS, run_battery

    seed = args.seed if args.seed is not None else DEFAULT_SEED
    slots = args.slots if args.slots is not None else DEFAULT_SLOTS
    jobs = args.jobs if args.jobs is not None else _default_jobs()

    def progress(msg: str) -> None:
        if not args.quiet:
            print(f"... {msg}", file=sys.stderr)

    checks = run_battery(args.battery, seed=seed, slots=slots, jobs=jobs,
                         progress=progress)
    failed = [c for c in checks if not c.passed]
    if not args.quiet:
        for c in checks:
            print(c.line())
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed "
          f"({args.battery} battery, seed={seed}, slots={slots})")
    if args.out:
        payload = {
            "battery": args.battery,
            "seed": seed,
            "slots": slots,
            "version": __version__,
            "passed": not failed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in checks],
        }
        Path(args.out).write_text(_json_dump(payload), encoding="utf-8")
    return 0 if not failed else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "analyze": cmd_analyze,
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "optimize": cmd_optimize,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except InfeasiblePrimaryError as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except CogstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
