"""Command-line front end.

Every command reads a configuration (``--config`` TOML file and/or
``--paper-example`` preset, then flag overrides), writes ``<command>.csv``
into the output directory and, with ``--format svg``, a matching plot.

Exit codes: 0 success, 1 numerical failure, 2 infeasible problem,
64 usage error, 65 configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, config, constrained, definetti, dual, montecarlo, output, transaction
from .constrained import Status
from .definetti import BarrierPolicy
from .errors import ConfigError, DomainError, InfeasibleError, NumericalError, UnsupportedModelError

EXIT_OK, EXIT_NUMERICAL, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 64, 65

COMMANDS = (
    "scale", "solve-unconstrained", "lambda-map", "psi-curve", "bstar", "value-curves",
    "psi-contour", "band-curve", "solve-constrained", "duality-report", "simulate",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ruindiv", description="Ruin-constrained optimal dividends for one-sided Lévy reserves.")
    p.add_argument("--version", action="version", version=f"ruindiv {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--paper-example", type=int, choices=(1, 2, 3), metavar="N")
    p.add_argument("--model", choices=("definetti", "dual"))
    p.add_argument("--cost", type=float, metavar="BETA")
    p.add_argument("--x", type=_float_list, metavar="LIST")
    p.add_argument("--K", type=_float_list, metavar="LIST")
    p.add_argument("--lambda", dest="lam", type=_float_list, metavar="LIST")
    p.add_argument("--b", type=_float_list, metavar="LIST")
    p.add_argument("--paths", type=int, metavar="N")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--format", choices=("csv", "svg"))
    p.add_argument("--seed", type=int, metavar="N")
    return p


def resolve_config(args) -> dict:
    """Preset, then file, then flags."""
    cfg = {}
    if args.paper_example is not None:
        cfg = config.preset(args.paper_example)
    if args.config:
        cfg = config.merge(cfg, config.load(args.config))
    if not cfg:
        raise ConfigError([("--config", "give a configuration file or --paper-example")])
    over = {}
    if args.model == "dual":
        over["regime"] = {"type": "dual"}
        over["model"] = {"orientation": "dual"}
    elif args.model == "definetti" and args.cost is None:
        over["regime"] = {"type": "no-cost"}
    if args.cost is not None:
        over["regime"] = {"type": "cost", "beta": args.cost}
    problem = {}
    for key, value in (("x", args.x), ("K", args.K), ("lambda", args.lam), ("b", args.b)):
        if value is not None:
            problem[key] = value
    if problem:
        over["problem"] = problem
    if args.paths is not None:
        over["simulation"] = {"n_paths": args.paths}
    if args.out is not None:
        over["output"] = {"dir": args.out}
    if args.format is not None:
        over.setdefault("output", {})["format"] = args.format
    if args.seed is not None:
        over["seed"] = args.seed
    return config.validate(config.merge(cfg, over))


class Context:
    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.regime = config.build_regime(cfg)
        self.problem = cfg.get("problem", {})
        out = cfg.get("output", {})
        self.out_dir = out.get("dir", ".")
        self.svg = out.get("format", "csv") == "svg"
        self.seed = int(cfg.get("seed", 0))
        self.comment = f"ruindiv {__version__} config-sha256={config.config_hash(cfg)} command={command}"
        self._ev = None

    @property
    def ev(self):
        if self._ev is None:
            self._ev = config.build_evaluator(self.cfg)
        return self._ev

    @property
    def is_dual(self):
        return isinstance(self.regime, constrained.Dual)

    @property
    def is_band(self):
        return isinstance(self.regime, constrained.TransactionCost)

    def xs(self, default):
        return list(self.problem.get("x", default))

    def needs(self, key, what):
        if key not in self.problem:
            raise ConfigError([(f"problem.{key}", f"required by {self.command} ({what})")])
        return [float(v) for v in self.problem[key]]

    def path(self, suffix=""):
        return os.path.join(self.out_dir, f"{self.command}{suffix}.csv")

    def table(self, header, rows, suffix="", plot=None):
        path = output.write_csv(self.path(suffix), header, rows, self.comment)
        print(f"wrote {path}")
        if self.svg and plot is not None:
            svg = path[:-4] + ".svg"
            output.write_svg(svg, *plot)
            print(f"wrote {svg}")
        return path

    def b0(self):
        if self.is_dual:
            return dual.unconstrained_barrier_dual(self.ev)
        return definetti.unconstrained_barrier(self.ev)

    def unconstrained_policy(self):
        if self.is_band:
            return transaction.optimal_band(self.ev, 0.0, self.regime.beta)
        return BarrierPolicy(self.b0())

    def value(self, x, policy):
        if self.is_dual:
            return dual.value_barrier_dual(self.ev, x, policy)
        if self.is_band:
            return transaction.value_band(self.ev, x, policy)
        return definetti.value_barrier(self.ev, x, policy)

    def psi(self, x, policy):
        if self.is_dual:
            return dual.psi_dual(self.ev, x, policy)
        if self.is_band:
            return transaction.psi_band(self.ev, x, policy.lower, policy.upper)
        return definetti.psi_barrier(self.ev, x, policy)

    def k_bar(self, x):
        return dual.k_bar_dual(self.ev, x) if self.is_dual else definetti.k_bar(self.ev, x)


def _grid(lo, hi, n):
    return [float(v) for v in np.linspace(lo, hi, n)]


DEFAULT_X = _grid(0.0, 10.0, 41)
SOLVE_X = [1.0]


def _series(header, rows, start=1):
    xs = [r[0] for r in rows]
    return [(header[j], xs, [r[j] for r in rows]) for j in range(start, len(header))]


def cmd_scale(ctx):
    ev = ctx.ev
    header = ["x", "W", "W1", "W2", "Z", "Zbar"]
    rows = []
    for x in ctx.xs(DEFAULT_X):
        rows.append([x, ev.w(x, 0), ev.w(x, 1), ev.w(x, 2), ev.z(x), ev.z_bar(x)])
    ctx.table(header, rows, plot=(_series(header[:2], rows), "scale function", "x", "W"))
    return EXIT_OK


def cmd_solve_unconstrained(ctx):
    ev = ctx.ev
    policy = ctx.unconstrained_policy()
    if ctx.is_band:
        print(f"unconstrained band: b- = {policy.lower:.6f}, b+ = {policy.upper:.6f} (beta = {policy.cost:g})")
    elif ctx.is_dual:
        print(f"b0 = {policy.level:.6f}")
        print(f"lambda_bar = {dual.lambda_bar_dual(ev):.6f}")
    else:
        print(f"b0 = {policy.level:.6f}")
        print(f"lambda_bar = {definetti.lambda_bar(ev):.6f}")
    header = ["x", "V"]
    rows = [[x, ctx.value(x, policy)] for x in ctx.xs(DEFAULT_X)]
    ctx.table(header, rows, plot=(_series(header, rows), "unconstrained value", "x", "V(x)"))
    return EXIT_OK


def cmd_lambda_map(ctx):
    if ctx.is_band:
        raise ConfigError([("regime.type", "lambda-map is defined for barrier regimes; use band-curve")])
    b0 = ctx.b0()
    bs = ctx.problem.get("b", _grid(b0, b0 + 5.0, 51))
    f = dual.lambda_of_b_dual if ctx.is_dual else definetti.lambda_of_b
    rows = []
    for b in bs:
        if b < b0 - 1e-9 * (1 + b0):
            raise ConfigError([("problem.b", f"levels must be at least b0 = {b0:.12g}")])
        rows.append([b, f(ctx.ev, max(b, b0))])
    header = ["b", "Lambda"]
    ctx.table(header, rows, plot=(_series(header, rows), "multiplier map", "b", "Lambda(b)"))
    return EXIT_OK


def cmd_psi_curve(ctx):
    if ctx.is_band:
        raise ConfigError([("regime.type", "psi-curve is defined for barrier regimes; use psi-contour")])
    b0 = ctx.b0()
    bs = ctx.problem.get("b", [b0, b0 + 0.5, b0 + 1.0, b0 + 2.0])
    header = ["x"] + [f"Psi_b={output.fmt(b)}" for b in bs] + ["K_bar"]
    rows = []
    for x in ctx.xs(DEFAULT_X):
        rows.append([x] + [ctx.psi(x, BarrierPolicy(b)) for b in bs] + [ctx.k_bar(x)])
    ctx.table(header, rows, plot=(_series(header, rows), "constraint function", "x", "Psi"))
    return EXIT_OK


def _policy_cells(ctx, sol):
    if ctx.is_band:
        if sol.policy is None:
            return [math.nan, math.nan]
        return [sol.policy.lower, sol.policy.upper]
    return [sol.policy.level if sol.policy is not None else math.nan]


def _policy_header(ctx):
    return ["b_lower", "b_upper"] if ctx.is_band else ["b_star"]


def cmd_bstar(ctx):
    Ks = ctx.needs("K", "constraint levels")
    header = ["x", "K", "status"] + _policy_header(ctx) + ["Lambda"]
    rows = []
    for K in Ks:
        for x in ctx.xs(_grid(0.0, 10.0, 21)):
            sol = constrained.solve(ctx.ev, x, K, ctx.regime)
            rows.append([x, K, sol.status.value] + _policy_cells(ctx, sol) + [sol.multiplier])
    series = [(f"K={output.fmt(K)}", [r[0] for r in rows if r[1] == K], [r[3] for r in rows if r[1] == K]) for K in Ks]
    ctx.table(header, rows, plot=(series, "constrained optimal level", "x", header[3]))
    return EXIT_OK


def cmd_value_curves(ctx):
    Ks = ctx.needs("K", "constraint levels")
    xs = ctx.xs(_grid(0.0, 10.0, 21))
    header = ["x"] + [f"V_K={output.fmt(K)}" for K in Ks] + ["V_unconstrained"]
    policy = ctx.unconstrained_policy()
    rows = []
    for x in xs:
        row = [x]
        for K in Ks:
            sol = constrained.solve(ctx.ev, x, K, ctx.regime)
            row.append(sol.value if sol.status is not Status.INFEASIBLE else math.nan)
        rows.append(row + [ctx.value(x, policy)])
    ctx.table(header, rows, plot=(_series(header, rows), "constrained value", "x", "V"))
    return EXIT_OK


def _lambdas(ctx):
    return ctx.problem.get("lambda", _grid(0.0, 20.0, 41))


def _require_band(ctx):
    if not ctx.is_band:
        raise ConfigError([("regime.type", f"{ctx.command} needs the cost regime (--cost BETA)")])


def cmd_band_curve(ctx):
    _require_band(ctx)
    ev, beta = ctx.ev, ctx.regime.beta
    header = ["Lambda", "b_lower", "b_upper", "b_Lambda", "G", "zeta_upper"]
    rows = []
    for lam in _lambdas(ctx):
        band = transaction.optimal_band(ev, lam, beta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", definetti.HeuristicWarning)
            b_lam = definetti.optimal_barrier(ev, lam).level
        rows.append([lam, band.lower, band.upper, b_lam,
                     transaction.g_lambda(ev, lam, band.lower, band.upper, beta),
                     definetti.zeta(ev, lam, band.upper)])
    ctx.table(header, rows, plot=(_series(header[:4], rows), "optimal band along the multiplier", "Lambda", "level"))
    return EXIT_OK


def cmd_psi_contour(ctx):
    _require_band(ctx)
    ev, beta = ctx.ev, ctx.regime.beta
    x = ctx.xs([3.0])[0]
    Ks = ctx.needs("K", "contour levels")
    rows = []
    series = []
    for K in Ks:
        pts = transaction.level_curve(ev, x, K, 50)
        rows.extend([x, K, lo, hi] for lo, hi in pts)
        series.append((f"K={output.fmt(K)}", [p[0] for p in pts], [p[1] for p in pts]))
    curve = []
    for lam in _lambdas(ctx):
        band = transaction.optimal_band(ev, lam, beta)
        curve.append([lam, band.lower, band.upper, transaction.psi_band(ev, x, band.lower, band.upper)])
    series.append(("Lambda curve", [r[1] for r in curve], [r[2] for r in curve]))
    print(f"K_bar({x:g}) = {definetti.k_bar(ev, x):.6f}")
    ctx.table(["x", "K", "b_lower", "b_upper"], rows, plot=(series, f"level curves at x = {x:g}", "b-", "b+"))
    ctx.table(["Lambda", "b_lower", "b_upper", "Psi"], curve, suffix="-lambda")
    return EXIT_OK


def cmd_solve_constrained(ctx):
    Ks = ctx.needs("K", "constraint levels")
    header = ["x", "K", "status"] + _policy_header(ctx) + ["Lambda", "V", "Psi", "K_bar", "heuristic"]
    rows = []
    infeasible = False
    for x in ctx.xs(SOLVE_X):
        for K in Ks:
            sol = constrained.solve(ctx.ev, x, K, ctx.regime)
            infeasible |= sol.status is Status.INFEASIBLE
            rows.append([x, K, sol.status.value] + _policy_cells(ctx, sol)
                        + [sol.multiplier, sol.value, sol.constraint_value, sol.k_bar, sol.heuristic])
            print(f"x={x:g} K={K:g}: {sol.status.value}", *(f"{h}={output.fmt(v)}" for h, v in zip(header[3:-1], rows[-1][3:-1])))
    ctx.table(header, rows)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_duality_report(ctx):
    Ks = ctx.needs("K", "constraint levels")
    header = ["x", "K", "status"] + _policy_header(ctx) + ["Lambda", "V", "Psi", "primal", "dual", "gap"]
    rows = []
    for x in ctx.xs(SOLVE_X):
        for K in Ks:
            sol = constrained.solve(ctx.ev, x, K, ctx.regime)
            rep = constrained.duality_gap_report(ctx.ev, x, K, ctx.regime)
            rows.append([x, K, sol.status.value] + _policy_cells(ctx, sol)
                        + [sol.multiplier, sol.value, sol.constraint_value, rep.primal, rep.dual, rep.gap])
            print(f"x={x:g} K={K:g}: {sol.status.value} gap={output.fmt(rep.gap)}")
    ctx.table(header, rows)
    return EXIT_OK


def _simulation_policy(ctx):
    sim = ctx.cfg.get("simulation", {})
    kind = sim.get("policy", "optimal")
    if kind == "none":
        return None
    if kind == "barrier":
        return BarrierPolicy(float(sim["level"]))
    if kind == "band":
        beta = ctx.regime.beta if ctx.is_band else None
        if beta is None:
            raise ConfigError([("simulation.policy", "band policies need the cost regime")])
        try:
            return transaction.BandPolicy(float(sim["lower"]), float(sim["upper"]), beta)
        except DomainError as exc:
            raise ConfigError([("simulation", str(exc))]) from None
    return ctx.unconstrained_policy()


def cmd_simulate(ctx):
    sim = ctx.cfg.get("simulation", {})
    model = config.build_model(ctx.cfg["model"])
    q = float(ctx.cfg["q"])
    policy = _simulation_policy(ctx)
    header = ["x", "value_mean", "value_se", "constraint_mean", "constraint_se", "n_paths", "horizon",
              "truncation_bias_bound", "mean_transactions", "formula_value", "formula_constraint"]
    rows = []
    for x in ctx.xs(SOLVE_X):
        est = montecarlo.simulate_policy(
            model, q, policy, x,
            n_paths=int(sim.get("n_paths", 100_000)),
            T=sim.get("horizon"),
            seed=ctx.seed,
            dt=float(sim.get("dt", montecarlo.DEFAULT_DT)),
            antithetic=bool(sim.get("antithetic", False)),
        )
        if policy is None:
            fv, fc = 0.0, ctx.k_bar(x)
        else:
            fv, fc = ctx.value(x, policy), ctx.psi(x, policy)
        rows.append([x, est.value_mean, est.value_se, est.constraint_mean, est.constraint_se, est.n_paths,
                     est.horizon, est.truncation_bias_bound, est.mean_transactions, fv, fc])
        print(f"x={x:g}: value {est.value_mean:.6g} +- {est.value_se:.2g} (formula {fv:.6g}), "
              f"constraint {est.constraint_mean:.6g} +- {est.constraint_se:.2g} (formula {fc:.6g})")
    ctx.table(header, rows)
    return EXIT_OK


HANDLERS = {
    "scale": cmd_scale,
    "solve-unconstrained": cmd_solve_unconstrained,
    "lambda-map": cmd_lambda_map,
    "psi-curve": cmd_psi_curve,
    "bstar": cmd_bstar,
    "value-curves": cmd_value_curves,
    "psi-contour": cmd_psi_contour,
    "band-curve": cmd_band_curve,
    "solve-constrained": cmd_solve_constrained,
    "duality-report": cmd_duality_report,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ruindiv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return HANDLERS[args.command](Context(args.command, cfg))
    except ConfigError as exc:
        for field, msg in exc.problems:
            print(f"config error: {field}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnsupportedModelError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
