"""Command-line pipeline: analyze | tilt | verify | simulate.

Exit codes: 0 all good, 1 parse/usage error, 2 mathematical precondition
failure (with the witness on stderr), 3 at least one check failed.
Reports are JSON (schema shipped as report_schema.json); the return
series can additionally be dumped as CSV with fixed column order
n,p_n,weighted_term,partial_sum.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import __version__
from .errors import (DegenerateSupport, NotIrreducible, NotNormalized,
                     RwalkError, SpecFileError)
from .groups import FiniteGroup, Lattice
from .laws import Law, check_irreducible, default_window
from .recurrence import (build_recurrence_report,
                         check_translation_invariance, simulate_harris)
from .specfile import (WalkSpec, format_walk_spec, parse_element_set,
                       parse_walk_spec)
from .spectral import check_dual_spectral_radius, find_exponential
from .tables import LatticeBox
from .tilting import (check_dual_invariance, check_measure_invariance,
                      check_symmetric_degeneracy, check_tilted_powers, tilt)

CHECK_NAMES = ("eq1", "eq17", "dual", "measure", "eq12", "corollary2")
RESIDUAL_TOL = 1e-10
TRANSLATION_TOL = 1e-12
TRANSLATION_STEPS = {1: 50, 2: 24, 3: 12}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_CHECK_FAILED = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the exit-code contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rwalk", description=__doc__)
    parser.add_argument("--version", action="version", version=f"rwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="walk-spec file path")
    common.add_argument("--json", metavar="PATH",
                        help="write the machine-readable report here ('-' for stdout)")

    sub.add_parser("analyze", parents=[common],
                   help="spectral radius, convergence parameter and minimizer")

    p_tilt = sub.add_parser("tilt", parents=[common],
                            help="emit the zero-drift reweighted walk as a new spec file")
    p_tilt.add_argument("-o", "--out", required=True,
                        help="output spec path ('-' for stdout)")

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run the identity checks and report PASS/FAIL")
    p_verify.add_argument("--paper-checks", default="all", metavar="NAMES",
                          help="'all' or comma list of: " + ",".join(CHECK_NAMES))
    p_verify.add_argument("--max-residual", type=float, default=None,
                          help="override the residual tolerance for the "
                               "residual-valued checks")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="Monte Carlo return fractions plus the series heuristics")
    p_sim.add_argument("--trajectories", type=int, default=None)
    p_sim.add_argument("--horizon", type=int, default=None,
                       help="steps per trajectory (default 10000)")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--target", default=None,
                       help="element set, e.g. '0' or '1,2;3,4' (default: identity)")
    p_sim.add_argument("--series-horizon", type=int, default=None,
                       help="horizon for the exact return series (default per dimension)")
    p_sim.add_argument("--csv", metavar="PATH",
                       help="dump the weighted return series as CSV")
    return parser


def _group_json(group):
    if isinstance(group, Lattice):
        return {"kind": "lattice", "dim": group.dim}
    return {"kind": "finite", "order": group.order}


def _law_json(law: Law):
    def elem(x):
        return list(x) if isinstance(x, tuple) else x
    return [{"element": elem(x), "prob": p} for x, p in law.atoms.items()]


def _options_json(options):
    return {k: v for k, v in vars(options).items() if v is not None}


def _spectral_json(spectral, irreducible):
    return {"theta": list(spectral.theta), "rho": spectral.rho, "R": spectral.R,
            "gradient_norm": spectral.gradient_norm,
            "iterations": spectral.iterations,
            "irreducible": irreducible.irreducible,
            "witness": irreducible.witness}


def _mc_json(mc):
    out = {"trajectories": mc.trajectories, "horizon": mc.horizon,
           "seed": mc.seed, "return_fraction": mc.return_fraction,
           "ci_halfwidth": mc.ci_halfwidth}
    if mc.mean_displacement is not None:
        out["mean_displacement"] = list(mc.mean_displacement)
        out["displacement_sem"] = list(mc.displacement_sem)
    return out


def _write_report(report: dict, path: str | None):
    if path is None:
        return
    text = json.dumps(report, indent=2)
    if path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _load_spec(path: str) -> WalkSpec:
    with open(path) as fh:
        return parse_walk_spec(fh.read())


def _window_for(spec: WalkSpec):
    if isinstance(spec.group, FiniteGroup):
        return None
    if spec.options.window_radius is not None:
        return LatticeBox.centered(spec.options.window_radius, spec.group.dim)
    return default_window(spec.law)


def _report_skeleton(path: str, spec: WalkSpec) -> dict:
    return {"tool": {"name": "rwalk", "version": __version__},
            "spec": {"path": path, "group": _group_json(spec.group),
                     "law": _law_json(spec.law),
                     "options": _options_json(spec.options)},
            "timings": {}}


def _analyze(spec: WalkSpec):
    irreducible = check_irreducible(spec.law)
    exponential, spectral = find_exponential(spec.law)
    return exponential, spectral, irreducible


def cmd_analyze(args) -> int:
    spec = _load_spec(args.spec)
    report = _report_skeleton(args.spec, spec)
    t0 = time.perf_counter()
    exponential, spectral, irreducible = _analyze(spec)
    report["timings"]["spectral"] = time.perf_counter() - t0
    report["spectral"] = _spectral_json(spectral, irreducible)
    report["exit_code"] = EXIT_OK
    print(f"theta*        = {list(spectral.theta)}")
    print(f"rho           = {spectral.rho!r}")
    print(f"R             = {spectral.R!r}")
    print(f"gradient_norm = {spectral.gradient_norm:.3e}")
    print(f"iterations    = {spectral.iterations}")
    print(f"irreducible   = {irreducible.irreducible} ({irreducible.witness})")
    _write_report(report, args.json)
    return EXIT_OK


def cmd_tilt(args) -> int:
    spec = _load_spec(args.spec)
    exponential, spectral, _ = _analyze(spec)
    tw = tilt(spec.law, exponential, spectral.R)
    out_spec = WalkSpec(spec.group, tw.tilted, spec.options)
    text = format_walk_spec(out_spec)
    if args.out == "-":
        print(text, end="")
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"tilted walk written to {args.out} "
              f"(R = {spectral.R!r}, theta* = {list(spectral.theta)})")
    return EXIT_OK


def _run_check(name: str, spec: WalkSpec, ctx: dict, tol_override: float | None):
    """Returns (residual, tolerance, passed, detail)."""
    law = spec.law
    exponential, spectral = ctx["exponential"], ctx["spectral"]
    window = ctx["window"]
    tol = tol_override if tol_override is not None else RESIDUAL_TOL

    if name == "eq1":
        closure = abs(spectral.R * spectral.rho - 1.0)
        from .spectral import verify_r_invariance
        resid = max(closure, verify_r_invariance(law, exponential, spectral.R, window))
        return resid, tol, resid <= tol, "fixed point R*Lambda(theta*) = 1 and phi = R*P(phi)"
    if name == "eq17":
        tw = tilt(law, exponential, spectral.R)
        resid = check_tilted_powers(tw, 10)
        return resid, tol, resid <= tol, "tilted^n = R^n * phi * original^n, n <= 10"
    if name == "dual":
        resid_inv = check_dual_invariance(law, exponential, spectral.R, window)
        dual_res = check_dual_spectral_radius(law)
        resid = max(resid_inv, abs(dual_res.rho - dual_res.rho_dual))
        return resid, tol, resid <= tol, "psi = R*Phat(psi) and rho(v) = rho(dual v)"
    if name == "measure":
        resid = check_measure_invariance(law, exponential, spectral.R, window)
        return resid, tol, resid <= tol, "psi-weighted counting measure is R-invariant"
    if name == "eq12":
        ttol = tol_override if tol_override is not None else TRANSLATION_TOL
        group = law.group
        e = group.identity()
        first = next(iter(law.atoms))
        if isinstance(group, FiniteGroup):
            y = first if first != e else (e + 1) % group.order
            steps = 100
        else:
            y = tuple(5 * c for c in first)
            steps = TRANSLATION_STEPS[group.dim]
        resid = check_translation_invariance(law, {e}, y, steps)
        return resid, ttol, resid <= ttol, f"h^(yB)(yx) = h^B(x) with y={y}, T={steps}"
    if name == "corollary2":
        deg = check_symmetric_degeneracy(law)
        if not deg.is_symmetric:
            return 0.0, RESIDUAL_TOL, True, "law not symmetric; degeneracy vacuous"
        tw = tilt(law, exponential, spectral.R)
        atom_diff = max(abs(tw.tilted.atoms[x] - p) for x, p in law.atoms.items())
        theta_norm = max((abs(t) for t in spectral.theta), default=0.0)
        r_diff = abs(spectral.R - 1.0)
        passed = theta_norm <= 1e-8 and r_diff <= 1e-10 and atom_diff <= 1e-14
        resid = max(theta_norm, r_diff, atom_diff)
        detail = (f"|theta*|={theta_norm:.2e} (tol 1e-8), |R-1|={r_diff:.2e} "
                  f"(tol 1e-10), atom diff={atom_diff:.2e} (tol 1e-14)")
        return resid, 1e-8, passed, detail
    raise ValueError(f"unknown check {name!r}")


def cmd_verify(args) -> int:
    spec = _load_spec(args.spec)
    if args.paper_checks == "all":
        names = list(CHECK_NAMES)
    else:
        names = [n.strip() for n in args.paper_checks.split(",") if n.strip()]
        unknown = [n for n in names if n not in CHECK_NAMES]
        if unknown:
            print(f"unknown check name(s): {', '.join(unknown)}", file=sys.stderr)
            return EXIT_USAGE
    report = _report_skeleton(args.spec, spec)
    t0 = time.perf_counter()
    exponential, spectral, irreducible = _analyze(spec)
    report["timings"]["spectral"] = time.perf_counter() - t0
    report["spectral"] = _spectral_json(spectral, irreducible)
    ctx = {"exponential": exponential, "spectral": spectral,
           "window": _window_for(spec)}
    all_passed = True
    report["checks"] = []
    for name in names:
        t0 = time.perf_counter()
        try:
            resid, tol, passed, detail = _run_check(name, spec, ctx, args.max_residual)
            entry = {"name": name, "residual": resid, "tolerance": tol,
                     "passed": passed, "detail": detail}
            print(f"{name:<12} residual={resid:.3e} tol={tol:.0e} "
                  f"{'PASS' if passed else 'FAIL'}  ({detail})")
        except RwalkError as exc:
            passed = False
            entry = {"name": name, "residual": None, "tolerance": None,
                     "passed": False, "detail": f"error: {exc}"}
            print(f"{name:<12} ERROR ({exc})")
        report["timings"][f"check:{name}"] = time.perf_counter() - t0
        report["checks"].append(entry)
        all_passed = all_passed and passed
    code = EXIT_OK if all_passed else EXIT_CHECK_FAILED
    report["exit_code"] = code
    _write_report(report, args.json)
    return code


def _write_series_csv(path: str, series, R: float):
    with open(path, "w") as fh:
        fh.write("n,p_n,weighted_term,partial_sum\n")
        acc = 0.0
        ln_r = math.log(R)
        for n, p in enumerate(series.probabilities):
            term = 0.0
            if p > 0.0:
                term = p if ln_r == 0.0 else math.exp(n * ln_r + math.log(p))
            acc += term
            fh.write(f"{n},{p!r},{term!r},{acc!r}\n")


def cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    opts = spec.options
    trajectories = args.trajectories if args.trajectories is not None else \
        (opts.trajectories if opts.trajectories is not None else 10_000)
    horizon = args.horizon if args.horizon is not None else \
        (opts.horizon if opts.horizon is not None else 10_000)
    seed = args.seed if args.seed is not None else \
        (opts.seed if opts.seed is not None else 42)
    if trajectories < 1:
        print("--trajectories must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if horizon < 1:
        print("--horizon must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    target = (parse_element_set(args.target, spec.group) if args.target
              else frozenset({spec.group.identity()}))

    report = _report_skeleton(args.spec, spec)
    t0 = time.perf_counter()
    exponential, spectral, irreducible = _analyze(spec)
    report["timings"]["spectral"] = time.perf_counter() - t0
    report["spectral"] = _spectral_json(spectral, irreducible)

    t0 = time.perf_counter()
    mc = simulate_harris(spec.law, target, trajectories, horizon, seed)
    report["timings"]["monte_carlo"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    kwargs = {}
    if opts.growth_recurrent is not None:
        kwargs["recurrent_threshold"] = opts.growth_recurrent
    if opts.growth_transient is not None:
        kwargs["transient_threshold"] = opts.growth_transient
    rec = build_recurrence_report(spec.law, spectral.rho, spectral.R,
                                  horizon=args.series_horizon, mc=mc, **kwargs)
    report["timings"]["series"] = time.perf_counter() - t0

    report["recurrence"] = {
        "rho_series": rec.rho_series, "rho_method": rec.rho_method,
        "rho_spectral": rec.rho_spectral, "period": rec.period,
        "horizon": rec.horizon, "growth_ratio": rec.growth_ratio,
        "verdict": rec.verdict.value,
        "partial_sums": rec.partial_sum_checkpoints,
        "thresholds": {"recurrent": rec.recurrent_threshold,
                       "transient": rec.transient_threshold},
        "max_mass_error": rec.max_mass_error,
        "warnings": rec.warnings,
        "mc": _mc_json(mc),
    }
    report["exit_code"] = EXIT_OK

    print(f"return_fraction = {mc.return_fraction!r} +/- {mc.ci_halfwidth:.4f} "
          f"(trajectories={trajectories}, horizon={horizon}, seed={seed})")
    if mc.mean_displacement is not None:
        print(f"mean_displacement = {list(mc.mean_displacement)} "
              f"(sem {list(mc.displacement_sem)})")
    print(f"series: horizon={rec.horizon} period={rec.period} "
          f"rho_series={rec.rho_series} rho_spectral={rec.rho_spectral!r}")
    print(f"verdict = {rec.verdict.value} (growth_ratio={rec.growth_ratio:.4f}, "
          f"thresholds {rec.recurrent_threshold}/{rec.transient_threshold})")
    for w in rec.warnings:
        print(f"warning: {w}")

    if args.csv:
        from .recurrence import return_series
        series = return_series(spec.law, args.series_horizon)
        _write_series_csv(args.csv, series, spectral.R)
    _write_report(report, args.json)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "tilt":
            return cmd_tilt(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return EXIT_USAGE
    except (SpecFileError, FileNotFoundError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateSupport, NotIrreducible, NotNormalized) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except RwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
