"""Command-line front end.

Every subcommand is a thin wrapper over the library: files in, files or
CSV out, with exit codes scripts can branch on.

Exit codes: 0 success; 2 input did not parse or validate; 3 the
optimization is infeasible; 4 the planning loop finished without
converging (artifacts for the completed iterations are still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile

from .dynamics import aggregate_params, simulate_step_response
from .io import (ParseError, ValidationError, build_report, emit_plot_csv,
                 load_instance, load_plan, read_profiles_csv, save_plan,
                 save_report)
from .model import to_per_unit
from .optim import export_mps
from .pipeline import (MasterInfeasible, RunConfig, evaluate_plan,
                       run_three_stage, sensitivity_sweep)
from .planner import ExchangeBounds, NotOptimal, build_master
from .planner.master import write_variable_map
from .scenarios import cluster_days, kmeans

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_NO_CONVERGENCE = 4


def _atomic_json(path: str, doc) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(doc, handle, indent=2)
            handle.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_from(args: argparse.Namespace, case: int | None = None
                 ) -> RunConfig:
    return RunConfig(case=case if case is not None else args.case,
                     alpha=args.alpha, epsilon_kw=args.eps,
                     max_iterations=args.iters, gap_tol=args.gap,
                     polygon_sides=args.sides, block_hours=args.block_hours,
                     seed=args.seed)


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha", type=float, default=0.6,
                     help="fraction of each excess absorbed per iteration")
    sub.add_argument("--eps", type=float, default=1.0, metavar="KW",
                     help="per-slot deviation tolerance ending the loop")
    sub.add_argument("--iters", type=int, default=15,
                     help="iteration budget for the tightening loop")
    sub.add_argument("--gap", type=float, default=1e-6,
                     help="relative optimality gap for the solver")
    sub.add_argument("--sides", type=int, default=12,
                     help="polygon sides approximating thermal limits")
    sub.add_argument("--block-hours", type=int, default=1,
                     help="hours per aggregated time block (divides 24)")
    sub.add_argument("--seed", type=int, default=2016,
                     help="seed echoed into reports and used by sweeps")


def cmd_cluster(args: argparse.Namespace) -> int:
    profiles = read_profiles_csv(args.profiles)
    days = cluster_days(profiles, args.k, args.seed)
    matrix, _ = profiles.to_matrix()
    _, _, residual = kmeans(matrix, args.k, args.seed)
    doc = {"days": [{
        "weight": float(d.weight),
        "member_count": d.member_count,
        "load_kw": {str(n): [float(v) for v in s]
                    for n, s in sorted(d.load_kw.items())},
        "solar_kw": {g: [float(v) for v in s]
                     for g, s in sorted(d.solar_kw.items())},
    } for d in days]}
    _atomic_json(args.out, doc)
    weights = ", ".join(f"{d.weight:g}" for d in days)
    print(f"clustered {profiles.n_days} days into {args.k} "
          f"(weights {weights}, sse {residual:.4g})")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    config = _config_from(args)
    result = run_three_stage(instance, config)
    os.makedirs(args.out, exist_ok=True)
    paths = emit_plot_csv(result.records, args.out)
    plan_path = os.path.join(args.out, "plan.json")
    save_plan(result.plan, plan_path)
    artifacts = {"plan": plan_path, **paths}
    report_path = os.path.join(args.out, "report.json")
    save_report(build_report(result, instance.name, artifacts), report_path)

    for rec in result.records:
        built = " ".join(list(rec.plan.generators)
                         + [f"{a}-{b}" for a, b in rec.plan.lines]) or "-"
        print(f"psi {rec.psi}: build [{built}] total {rec.total_cost:,.2f} "
              f"dev {rec.import_deviation_kw:.1f}/"
              f"{rec.export_deviation_kw:.1f} kW")
    print(f"status: {result.status} after {result.iterations} iteration(s) "
          f"in {result.runtime_s:.1f} s")
    print(f"wrote {plan_path}, {paths['costs']}, {paths['metrics']}, "
          f"{report_path}")
    if result.status in ("max_iterations", "master_infeasible"):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    plan = load_plan(args.plan)
    _, slots = evaluate_plan(instance, plan, block_hours=args.block_hours,
                             gap_tol=args.gap)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["day", "hour", "rocof", "nadir", "ss",
                     "dp_b", "dp_s", "binding"])
    for s in slots:
        writer.writerow([s.day, s.hour, f"{s.rocof:.6f}", f"{s.nadir:.6f}",
                         f"{s.steady_state:.6f}", f"{s.dp_import_kw:.3f}",
                         f"{s.dp_export_kw:.3f}", s.binding])
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    if not instance.per_unit:
        instance = to_per_unit(instance)
    commit = None if args.commit is None else [
        token for token in args.commit.split(",") if token]
    params = aggregate_params(instance.generators, commitment=commit)
    response = simulate_step_response(instance.generators, commit, args.dp,
                                      horizon=args.horizon)
    f0 = instance.grid.frequency
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "delta_f_hz"])
        for t, dev in zip(response.time, response.deviation):
            writer.writerow([f"{t:.4f}", f"{dev * f0:.8f}"])
    print(f"simulated {args.dp} p.u. step over {response.time[-1]:.1f} s "
          f"(M {params.inertia:.3f}, D {params.damping:.3f}, "
          f"Rg {params.droop_gain:.3f}); wrote {args.out}")
    return EXIT_OK


def cmd_export_mps(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    if not instance.per_unit:
        instance = to_per_unit(instance)
    n_blocks = 24 // args.block_hours
    bounds = ExchangeBounds.from_instance(instance, n_blocks)
    program, _ = build_master(instance, bounds,
                              include_islanding=args.case >= 2,
                              polygon_sides=args.sides,
                              block_hours=args.block_hours)
    export_mps(program, args.out)
    print(f"wrote {args.out} ({program.num_vars} columns, "
          f"{program.num_rows} rows)")
    if args.var_map:
        write_variable_map(program, args.var_map)
        print(f"wrote {args.var_map}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    config = _config_from(args)
    axis = args.axis.replace("-", "_")
    if axis == "rep_days":
        if args.profiles is None:
            raise ValueError("rep-days sweep needs --profiles")
        profiles = read_profiles_csv(args.profiles)
        values = [int(v) for v in args.values.split(",")]
    else:
        profiles = None
        tokens = (args.values.split(",") if args.values
                  else ["on", "off"])
        values = [token.lower() in ("1", "true", "on", "yes")
                  for token in tokens]
    rows = sensitivity_sweep(instance, config, axis, values,
                             profiles=profiles)
    fields = list(rows[0].keys())
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields,
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(f"{args.axis}={row['value']}: total {row['total_cost']:,.2f} "
              f"({row['iterations']} iteration(s), {row['runtime_s']:.1f} s)")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgplan",
        description="Microgrid investment planning under islanding security")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster",
                       help="reduce a year of profiles to representative days")
    p.add_argument("--profiles", required=True,
                   help="CSV from the profile writer (day,hour,load_*,solar_*)")
    p.add_argument("--k", type=int, required=True,
                   help="number of representative days")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True,
                   help="JSON file holding the days section")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("plan", help="run the investment planning loop")
    p.add_argument("--instance", required=True)
    p.add_argument("--case", type=int, choices=(1, 2, 3), default=3,
                   help="1 grid-only, 2 +islanding, 3 +transient loop")
    p.add_argument("--out", required=True, help="output directory")
    _add_run_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("check",
                       help="screen a saved plan for islanding security")
    p.add_argument("--instance", required=True)
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.add_argument("--block-hours", type=int, default=1)
    p.add_argument("--gap", type=float, default=1e-6)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate",
                       help="integrate the frequency response to a power step")
    p.add_argument("--instance", required=True)
    p.add_argument("--commit", default=None,
                   help="comma list of built unit ids; default commits all")
    p.add_argument("--dp", type=float, required=True,
                   help="step size in p.u. on the system base")
    p.add_argument("--horizon", type=float, default=None,
                   help="seconds to simulate (default spans the settling)")
    p.add_argument("--out", required=True, help="CSV of t, delta_f_hz")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-mps",
                       help="write the master problem as an MPS file")
    p.add_argument("--instance", required=True)
    p.add_argument("--case", type=int, choices=(1, 2, 3), default=3)
    p.add_argument("--block-hours", type=int, default=1)
    p.add_argument("--sides", type=int, default=12)
    p.add_argument("--out", required=True)
    p.add_argument("--var-map", default=None,
                   help="also write a CSV of columns, bounds, objective")
    p.set_defaults(func=cmd_export_mps)

    p = sub.add_parser("sweep", help="re-plan across an axis of variants")
    p.add_argument("--instance", required=True)
    p.add_argument("--axis", choices=("rep-days", "flexible-loads"),
                   required=True)
    p.add_argument("--values", default=None,
                   help="comma list (day counts, or on/off states)")
    p.add_argument("--profiles", default=None,
                   help="profiles CSV, required for rep-days")
    p.add_argument("--case", type=int, choices=(1, 2, 3), default=3)
    p.add_argument("--out", required=True, help="cost table CSV")
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (MasterInfeasible, NotOptimal) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
