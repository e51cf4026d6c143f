"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 brute-force refusal,
3 numerical failure.
"""

import argparse
import csv
import json
import shlex
import sys
from pathlib import Path

import numpy as np

from .evaluation import bench_runtime, monte_carlo_eval, run_trial, scenario_digest, trial_seed
from .exceptions import EnumerationRefused, InvalidInputError, NumericError, SensorDropError
from .planner import PLANNERS, Plan, brute_force, plan_violations
from .scenario_io import dump_json, load_scenario, scenario_from_dict
from .templates import TEMPLATES, make_template

EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_NUMERIC = 0, 1, 2, 3

PLOT_README = """\
Plot-ready data (whitespace separated, '#' header lines)

routes.dat      uav order vertex x y z is_drop
                UAV routes over drop vertices (route maps of the qualitative example).
landings.dat    vertex x y mean_x mean_y semi_major semi_minor angle_deg dropped
                Landing means and 1-sigma ellipses per release vertex.
poi_errors.dat  planner poi x y truth mean_prediction mse
                Per-PoI estimation error (error maps).
mse.dat         planner mean_mse std_mse mean_sse mean_mse_raw n_drops
                Mean squared error per planner (bar chart across scenarios);
                mean_mse_raw undoes the ground-truth normalization.
runtime.csv     k sga_seconds ... oracle_status
                Running time versus sensors per UAV.
"""


def _num(*xs):
    # repr of a Python float round-trips exactly
    return " ".join(repr(float(x)) for x in xs)


def _invocation(argv):
    return "sensordrop " + " ".join(shlex.quote(a) for a in argv)


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_plot_readme(out):
    (out / "README.txt").write_text(PLOT_README)


def _ellipse(cov):
    evals, evecs = np.linalg.eigh(np.asarray(cov))
    evals = np.clip(evals, 0.0, None)
    angle = float(np.degrees(np.arctan2(evecs[1, 1], evecs[0, 1])))
    return float(np.sqrt(evals[1])), float(np.sqrt(evals[0])), angle


def write_plan_artifacts(plan, scenario, out):
    g = scenario.graph
    drops = set(plan.drop_vertices)
    with open(out / "routes.dat", "w") as fh:
        fh.write("# uav order vertex x y z is_drop\n")
        for p in plan.paths:
            for order, v in enumerate(p.vertices):
                x, y, z = g.vertices[v].position
                fh.write(f"{p.uav_index} {order} {v} {_num(x, y, z)} {int(v in p.drops)}\n")
    with open(out / "landings.dat", "w") as fh:
        fh.write("# vertex x y mean_x mean_y semi_major semi_minor angle_deg dropped\n")
        for node in g.vertices:
            a, b, ang = _ellipse(node.landing.covariance)
            x, y, _ = node.position
            mx, my = node.landing.mean
            fh.write(f"{node.id} {_num(x, y, mx, my, a, b, ang)} {int(node.id in drops)}\n")
    _write_plot_readme(out)


def _plan_doc(plan, scenario, seed):
    doc = plan.to_dict()
    doc.pop("wall_time")  # kept out so plan.json is byte-reproducible; see timing.json
    doc["seed"] = seed
    doc["scenario_digest"] = scenario_digest(scenario)
    return doc


def _emit_plan(plan, loaded, seed, out, argv):
    sc = loaded.scenario
    bad = plan_violations(plan, sc)
    if bad:
        raise NumericError(f"planner produced an infeasible plan: {bad}")
    dump_json(_plan_doc(plan, sc, seed), out / "plan.json")
    dump_json({"planner": plan.planner_name, "wall_time": plan.wall_time, "invocation": _invocation(argv)},
              out / "timing.json")
    write_plan_artifacts(plan, sc, out)
    print(f"{plan.planner_name}: objective {plan.objective_value:.6f} nats, drops {plan.drop_vertices}, "
          f"{plan.wall_time:.3f}s -> {out / 'plan.json'}")


def cmd_plan(args, argv):
    loaded = load_scenario(args.scenario)
    seed = args.seed if args.planner == "random" else None
    plan = PLANNERS[args.planner](loaded.scenario, seed)
    _emit_plan(plan, loaded, seed, _out_dir(args.out), argv)
    return EXIT_OK


def cmd_oracle(args, argv):
    loaded = load_scenario(args.scenario)
    plan = brute_force(loaded.scenario, max_assignments=args.max_assignments)
    _emit_plan(plan, loaded, None, _out_dir(args.out), argv)
    return EXIT_OK


def load_plan(path, scenario):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
        plan = Plan.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: not a plan file ({exc})") from None
    digest = doc.get("scenario_digest")
    if digest is not None and digest != scenario_digest(scenario):
        raise InvalidInputError(f"{path}: plan was made for scenario {digest}, not {scenario_digest(scenario)}")
    n = len(scenario.graph)
    if any(not 0 <= v < n for p in plan.paths for v in p.vertices):
        raise InvalidInputError(f"{path}: plan references vertices outside the scenario")
    bad = plan_violations(plan, scenario)
    if bad:
        raise InvalidInputError(f"{path}: plan is infeasible for this scenario: {bad}")
    timing = path.with_name("timing.json")
    if timing.exists():
        plan.wall_time = float(json.loads(timing.read_text()).get("wall_time", 0.0))
    return plan


def cmd_evaluate(args, argv):
    loaded = load_scenario(args.scenario)
    sc, gt = loaded.scenario, loaded.ground_truth
    if gt is None:
        raise InvalidInputError("scenario has no ground_truth section")
    trials = args.trials if args.trials is not None else loaded.eval_config["trials"]
    seed = args.seed if args.seed is not None else loaded.eval_config["master_seed"]
    plans = [load_plan(p, sc) for p in (args.plans or [])]
    for name in args.planner or []:
        plans.append(PLANNERS[name](sc, seed))
    if not plans:
        raise InvalidInputError("give at least one --plans file or --planner name")
    report = monte_carlo_eval(plans, sc, gt, trials, seed, threads=args.threads)
    report.meta = {"invocation": _invocation(argv), "scenario": str(args.scenario)}
    out = _out_dir(args.out)
    dump_json(report.to_dict(), out / "report.json")
    with open(out / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "planner", "sse", "mse", "n_drops", "seed"])
        for t, name, sse, mse, nd, s in report.rows:
            w.writerow([t, name, repr(float(sse)), repr(float(mse)), nd, s])
    with open(out / "mse.dat", "w") as fh:
        fh.write("# planner mean_mse std_mse mean_sse mean_mse_raw n_drops\n")
        for p in report.planners:
            fh.write(f"{p.planner} {_num(p.mean_mse, p.std_mse, p.mean_sse, p.mean_mse_raw)} {p.n_drops}\n")
    _write_poi_errors(plans, report, sc, gt, out)
    _write_plot_readme(out)
    print(f"{'planner':<12} {'mean MSE':>12} {'std':>12} {'objective':>10}")
    for p in report.planners:
        print(f"{p.planner:<12} {p.mean_mse:12.6f} {p.std_mse:12.6f} {p.mean_objective:10.4f}")
    names = [p.planner for p in report.planners]
    if "sga" in names and "baseline" in names:
        a, b = report.stats("sga").mean_mse, report.stats("baseline").mean_mse
        print(f"sga vs baseline: {100.0 * (b - a) / b:+.1f}% MSE improvement")
    return EXIT_OK


def _write_poi_errors(plans, report, sc, gt, out):
    seeds = [trial_seed(report.master_seed, t) for t in range(report.n_trials)]
    with open(out / "poi_errors.dat", "w") as fh:
        fh.write("# planner poi x y truth mean_prediction mse\n")
        for plan, stats in zip(plans, report.planners):
            preds = np.array([run_trial(plan, sc, gt, s).poi_predictions for s in seeds])
            truth = run_trial(plan, sc, gt, seeds[0]).poi_truth
            mse = np.mean((preds - truth) ** 2, axis=0)
            for i, (x, y) in enumerate(sc.pois):
                fh.write(f"{stats.planner} {i} {_num(x, y, truth[i], preds[:, i].mean(), mse[i])}\n")


def cmd_bench(args, argv):
    loaded = load_scenario(args.scenario)
    ks = [int(k) for k in args.k_list.split(",") if k.strip()]
    rows = bench_runtime(loaded.scenario, ks, max_assignments=args.max_assignments)
    out = _out_dir(args.out)
    with open(out / "runtime.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "sga_seconds", "sga_objective", "oracle_seconds", "oracle_objective", "oracle_status"])
        for r in rows:
            w.writerow([r.k, repr(r.sga_seconds), repr(r.sga_objective),
                        "" if r.oracle_seconds is None else repr(r.oracle_seconds),
                        "" if r.oracle_objective is None else repr(r.oracle_objective), r.oracle_status])
    for r in rows:
        print(f"k={r.k:<3} sga {r.sga_seconds:8.3f}s  oracle: {r.oracle_status}")
    return EXIT_OK


def cmd_gen_scenario(args, argv):
    doc = make_template(args.template, args.seed)
    scenario_from_dict(doc)  # validate before writing
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dump_json(doc, out)
    print(f"wrote {args.template} (seed {args.seed}) -> {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="sensordrop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan drop routes for a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--planner", choices=sorted(PLANNERS), default="sga")
    p.add_argument("--seed", type=int, default=0, help="seed for the random planner")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("oracle", help="exhaustive optimum for small scenarios")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-assignments", type=int, default=50_000)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("evaluate", help="Monte Carlo MSE of plans against the ground truth")
    p.add_argument("--scenario", required=True)
    p.add_argument("--plans", nargs="*", default=[], help="plan.json files")
    p.add_argument("--planner", action="append", choices=sorted(PLANNERS),
                   help="plan on the fly with this planner (repeatable)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="running time versus sensors per UAV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--k-list", default="2,4,8")
    p.add_argument("--out", required=True)
    p.add_argument("--max-assignments", type=int, default=50_000)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-scenario", help="write a shipped scenario template")
    p.add_argument("template", choices=TEMPLATES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_scenario)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except EnumerationRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        print(json.dumps(exc.size_report), file=sys.stderr)
        return EXIT_REFUSED
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SensorDropError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
