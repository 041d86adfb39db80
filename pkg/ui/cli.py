"""
Command-line front end.

    python main.py bounds --delta 0.5 --rho 0.1 --family BT
    python main.py grid --families BT BCT --format csv --out grid.csv
    python main.py finite --table --side upper
    python main.py empirical --n 100 --N-list 200 500 --rho-list 0.1 0.2
    python main.py phase --delta-steps 50 --families BT BCT --format svg --out phase.svg
    python main.py cover --N 12 --k 3 --m 6 --trials 1000
    python main.py ratios --rho-steps 19

Configuration comes from flags and an optional JSON file; the environment
is never read.
"""
import argparse
import logging
import sys
import time

import numpy as np
from joblib import Parallel, delayed

from core import asymptotic_bounds as ab
from core.covering_sim import CoveringPlan, covering_trials, random_cover
from core.empirical_ric import seed_from, sharpness_ratio
from core.errors import DomainError, RicError, require
from core.file_utils import sibling_path
from core.finite_tails import (
    LOWER,
    PREFACTOR_FORMS,
    REFERENCE_LOWER_ROWS,
    REFERENCE_UPPER_ROWS,
    UPPER,
    FiniteInstance,
    tail_table,
)
from core.rate_functions import ProblemShape
from core.settings import Settings
from ui import figures
from ui.output import (
    COVER_COLUMNS,
    COVER_TRIAL_COLUMNS,
    EMPIRICAL_COLUMNS,
    FINITE_COLUMNS,
    GRID_COLUMNS,
    PHASE_COLUMNS,
    RATIO_COLUMNS,
    emit,
    human_table,
    rows_to_csv,
)
from ui.records import RunRecord

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
FAMILIES = [f.value for f in ab.Family]


def configure_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT, force=True)


def linspace(lo, hi, steps):
    require(steps >= 2, f"steps must be at least 2: got {steps}")
    require(0.0 < lo < hi < 1.0, f"range must lie inside (0, 1) with lo < hi: got ({lo}, {hi})")
    return [float(x) for x in np.linspace(lo, hi, steps)]


class Run:
    """Per-invocation context: parsed arguments, settings, output stream and clock"""

    def __init__(self, args, settings, stream):
        self.args = args
        self.settings = settings
        self.stream = stream
        self.started = time.perf_counter()
        self.seed = settings.seed if args.seed is None else args.seed
        self.threads = settings.threads if args.threads is None else args.threads

    @property
    def output_format(self):
        if self.args.json:
            return "json"
        return self.args.format

    def record(self, params, rows, seeds=()):
        return RunRecord(
            command=self.args.command,
            params=params,
            seeds=list(seeds),
            results=rows,
            wall_time=time.perf_counter() - self.started,
        )

    def finish(self, params, rows, columns, default="csv", seeds=()):
        fmt = self.output_format or default
        if fmt == "json":
            content = self.record(params, rows, seeds).to_json()
        elif fmt == "table":
            content = human_table(rows, columns)
        elif fmt == "csv":
            content = rows_to_csv(rows, columns)
        else:
            raise DomainError(f"format {fmt!r} is not available for {self.args.command}")
        emit(content, self.args.out, self.stream)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_bounds(run):
    args = run.args
    shape = ProblemShape(args.delta, args.rho)
    bound = ab.bounds_for(shape, args.family, run.settings.boundary_margin, args.monotone_fix,
                          tol=run.settings.gamma_tol)
    upper, lower = ab.stationarity_residuals(bound)
    row = bound.as_row()
    row["stationarity_upper"] = upper
    row["stationarity_lower"] = lower
    params = {"delta": args.delta, "rho": args.rho, "family": args.family, "monotone_fix": args.monotone_fix}
    if run.output_format in ("json", "csv"):
        run.finish(params, [row], GRID_COLUMNS + ["stationarity_upper", "stationarity_lower"])
        return 0

    lines = [f"{bound.family.value} bounds at delta={shape.delta!r}, rho={shape.rho!r}"]
    for key in ("L", "U", "lambda_min", "lambda_max", "gamma_max", "gamma_min", "nu_opt",
                "stationarity_upper", "stationarity_lower"):
        value = row.get(key)
        if value is None:
            continue
        lines.append(f"  {key:<20} {value:.10g}")
    emit("\n".join(lines), args.out, run.stream)
    return 0


def _grid_row(delta, rho, family, margin, tol):
    try:
        return ab.bounds_for(ProblemShape(delta, rho), family, margin, tol=tol).as_row()
    except RicError as e:
        logger.warning("grid cell (delta=%r, rho=%r, %s) failed: %s", delta, rho, family, e)
        return {"delta": delta, "rho": rho, "family": family}


def cmd_grid(run):
    args = run.args
    deltas = linspace(*args.delta_range[:2], int(args.delta_range[2]))
    rhos = linspace(*args.rho_range[:2], int(args.rho_range[2]))
    cells = [(d, r, f) for f in args.families for r in rhos for d in deltas]
    rows = Parallel(n_jobs=run.threads)(
        delayed(_grid_row)(d, r, f, run.settings.boundary_margin, run.settings.gamma_tol) for d, r, f in cells
    )
    params = {"delta_range": args.delta_range, "rho_range": args.rho_range, "families": args.families}
    if run.output_format == "svg":
        require(args.out, "svg output needs --out")
        for family in args.families:
            figures.grid_heatmaps(rows, sibling_path(args.out, f".{family}.svg"), family)
        emit(rows_to_csv(rows, GRID_COLUMNS), sibling_path(args.out, ".csv"), run.stream)
        return 0
    run.finish(params, rows, GRID_COLUMNS)
    return 0


def cmd_finite(run):
    args = run.args
    form = args.prefactor or run.settings.prefactor_form
    if args.table:
        reference = REFERENCE_UPPER_ROWS if args.side == UPPER else REFERENCE_LOWER_ROWS
        instances = [FiniteInstance(*row) for row in reference]
    else:
        require(None not in (args.k, args.n, args.N, args.eps), "finite needs --k, --n, --N and --eps (or --table)")
        instances = [FiniteInstance(args.k, args.n, args.N, args.eps)]
    rows = tail_table(instances, args.side, form)
    params = {"side": args.side, "prefactor_form": form,
              "instances": [[i.k, i.n, i.N, i.epsilon] for i in instances]}
    run.finish(params, rows, FINITE_COLUMNS, default="table")
    return 0


def _empirical_row(n, N, rho, samples, restarts, sequence, settings):
    k = max(1, round(rho * n))
    row = {"n": n, "N": N, "k": k, "delta": n / N, "rho": k / n}
    try:
        result = sharpness_ratio(n, N, k, samples, restarts, sequence, boundary_margin=settings.boundary_margin,
                                 gamma_tol=settings.gamma_tol, candidate_pool=settings.candidate_pool,
                                 removal_pool=settings.removal_pool, tol=settings.improvement_tol)
    except RicError as e:
        logger.warning("empirical cell (n=%d, N=%d, k=%d) skipped: %s", n, N, k, e)
        row["status"] = f"error: {e}"
        return row
    cell = result.cell
    row.update({
        "count": cell.count,
        "U_est_max": cell.u_max,
        "U_est_mean": cell.u_mean,
        "L_est_max": cell.l_max,
        "L_est_mean": cell.l_mean,
        "U_BT": result.U_bound,
        "L_BT": result.L_bound,
        "ratio_U": result.ratio_U,
        "ratio_L": result.ratio_L,
        "status": "ok",
    })
    return row


def cmd_empirical(run):
    args = run.args
    restarts = args.restarts or run.settings.restarts
    lo, hi = run.settings.empirical_delta_range
    cells = []
    for N in args.N_list:
        if not lo <= args.n / N <= hi:
            logger.warning("delta=%r for N=%d lies outside the configured range [%r, %r]", args.n / N, N, lo, hi)
        for rho in args.rho_list:
            cells.append((N, rho))
    children = np.random.SeedSequence(run.seed).spawn(len(cells))
    rows = Parallel(n_jobs=run.threads)(
        delayed(_empirical_row)(args.n, N, rho, args.samples, restarts, child, run.settings)
        for (N, rho), child in zip(cells, children)
    )
    params = {"n": args.n, "N_list": args.N_list, "rho_list": args.rho_list, "samples": args.samples,
              "restarts": restarts}
    run.finish(params, rows, EMPIRICAL_COLUMNS, seeds=[run.seed] + [seed_from(c) for c in children])
    return 0


def cmd_phase(run):
    args = run.args
    deltas = linspace(args.delta_range[0], args.delta_range[1], args.delta_steps)
    curves = {
        family: ab.phase_curve(deltas, family, tol=run.settings.phase_tol, n_jobs=run.threads)
        for family in args.families
    }
    rows = [
        {"delta": p.delta, "family": p.family.value, "rho_star": p.rho_star, "inverse": p.inverse,
         "feasible": p.feasible}
        for family in args.families for p in curves[family]
    ]
    if run.output_format == "svg":
        require(args.out, "svg output needs --out")
        figures.phase_plot(curves, args.out)
        emit(rows_to_csv(rows, PHASE_COLUMNS), sibling_path(args.out, ".csv"), run.stream)
        return 0
    params = {"delta_range": args.delta_range, "delta_steps": args.delta_steps, "families": args.families}
    run.finish(params, rows, PHASE_COLUMNS)
    return 0


def cmd_cover(run):
    args = run.args
    plan = CoveringPlan.with_rule(args.N, args.k, args.m, seed=run.seed, rule=args.u_rule)
    if args.u is not None:
        plan = plan.with_draws(args.u)
    summary = covering_trials(plan, args.trials, run.seed, run.settings.covering_guard, n_jobs=run.threads)
    row = {
        "row": "summary", "N": plan.N, "k": plan.k, "m": plan.m, "u": plan.u, "r": plan.r,
        "trials": summary.trials, "failures": summary.failures, "frequency": summary.frequency,
        "standard_error": summary.standard_error, "envelope_bound": summary.envelope_bound,
        "union_bound": summary.union_bound,
    }
    rows = [row]
    columns = COVER_COLUMNS
    if args.details:
        # same streams as covering_trials, so failures counts the uncovered rows below
        children = np.random.SeedSequence(run.seed).spawn(args.trials)
        for i, child in enumerate(children):
            trial = CoveringPlan(plan.N, plan.k, plan.m, plan.u, seed_from(child))
            result = random_cover(trial, run.settings.covering_guard)
            rows.append({"row": "trial", "trial": i, "seed": trial.seed, "covered": result.covered,
                         "uncovered_count": result.uncovered_count})
        columns = COVER_COLUMNS + COVER_TRIAL_COLUMNS
    params = {"N": plan.N, "k": plan.k, "m": plan.m, "u": plan.u, "u_rule": args.u_rule, "trials": args.trials}
    run.finish(params, rows, columns, default="table", seeds=[run.seed])
    return 0


def cmd_ratios(run):
    args = run.args
    deltas = linspace(args.delta_range[0], args.delta_range[1], args.delta_steps)
    rhos = linspace(args.rho_range[0], args.rho_range[1], args.rho_steps)
    rows = [ab.improvement_ratios(rho, deltas, n_jobs=run.threads) for rho in rhos]
    params = {"delta_range": args.delta_range, "delta_steps": args.delta_steps,
              "rho_range": args.rho_range, "rho_steps": args.rho_steps}
    run.finish(params, rows, RATIO_COLUMNS)
    return 0


COMMANDS = {
    "bounds": cmd_bounds,
    "grid": cmd_grid,
    "finite": cmd_finite,
    "empirical": cmd_empirical,
    "phase": cmd_phase,
    "cover": cmd_cover,
    "ratios": cmd_ratios,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="write a JSON run record")
    common.add_argument("--out", metavar="PATH", help="write results to PATH instead of stdout")
    common.add_argument("--seed", type=int, help="root seed for every random stream")
    common.add_argument("--threads", type=int, help="worker count (-1 = all cores)")
    common.add_argument("--format", choices=["csv", "json", "svg", "table"], help="output format")
    common.add_argument("--config", metavar="PATH", help="JSON settings file")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    return common


def build_parser():
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="ricbounds",
        description="Bounds on restricted isometry constants of Gaussian matrices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common], help="bounds at one (delta, rho)")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--family", choices=FAMILIES, default="BT")
    p.add_argument("--monotone-fix", action="store_true", help="also minimize U over larger sparsity ratios")

    p = sub.add_parser("grid", parents=[common], help="bounds over a (delta, rho) grid")
    p.add_argument("--delta-range", type=float, nargs=3, metavar=("LO", "HI", "STEPS"), default=[0.05, 0.95, 19])
    p.add_argument("--rho-range", type=float, nargs=3, metavar=("LO", "HI", "STEPS"), default=[0.05, 0.95, 19])
    p.add_argument("--families", nargs="+", choices=FAMILIES, default=["BT"])

    p = sub.add_parser("finite", parents=[common], help="finite-size tail probability bounds")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--side", choices=[UPPER, LOWER], default=UPPER)
    p.add_argument("--prefactor", choices=PREFACTOR_FORMS)
    p.add_argument("--table", action="store_true", help="evaluate the reference table rows")

    p = sub.add_parser("empirical", parents=[common], help="local-search estimates and sharpness ratios")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--N-list", type=int, nargs="+", default=[200, 500, 1000])
    p.add_argument("--rho-list", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.3])
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("phase", parents=[common], help="l1 phase-transition lower bound")
    p.add_argument("--delta-steps", type=int, default=50)
    p.add_argument("--delta-range", type=float, nargs=2, metavar=("LO", "HI"), default=[0.02, 0.98])
    p.add_argument("--families", nargs="+", choices=FAMILIES, default=["BT"])

    p = sub.add_parser("cover", parents=[common], help="random group covering simulation")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--u", type=int, help="draw count; overrides --u-rule")
    p.add_argument("--u-rule", choices=["default", "entropy"], default="default")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--details", action="store_true", help="one row per trial")

    p = sub.add_parser("ratios", parents=[common], help="BCT/BT improvement ratios per rho")
    p.add_argument("--rho-range", type=float, nargs=2, metavar=("LO", "HI"), default=[0.05, 0.95])
    p.add_argument("--rho-steps", type=int, default=19)
    p.add_argument("--delta-range", type=float, nargs=2, metavar=("LO", "HI"), default=[0.05, 0.95])
    p.add_argument("--delta-steps", type=int, default=19)
    return parser


def main(argv=None, stream=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        settings = Settings.load(args.config)
        run = Run(args, settings, stream or sys.stdout)
        return COMMANDS[args.command](run)
    except RicError as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
