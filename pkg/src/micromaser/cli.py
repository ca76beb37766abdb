"""Command-line front end: simulate / analytic / compare / sweep / figure1.

Exit codes: 0 success (all comparisons passed), 1 failed comparison,
2 usage error (including parameter-guard violations), 3 truncation-guard
abort.  Angles are radians; all rates are in the inverse time units of tau.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytic, harness, plots
from .model import (
    DEFAULT_CUTOFF,
    CavityParams,
    InitialStateSpec,
    StrictDampingError,
    TruncationOverflowError,
)


def _typed(parse, check, bound: str):
    def convert(text: str):
        try:
            value = parse(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if not check(value):
            raise argparse.ArgumentTypeError(f"value {text!r} violates bound: {bound}")
        return value

    return convert


_positive_float = _typed(float, lambda v: v > 0, "must be > 0")
_nonneg_float = _typed(float, lambda v: v >= 0, "must be >= 0")
_unit_float = _typed(float, lambda v: 0 <= v <= 1, "must lie in [0, 1]")
_positive_int = _typed(int, lambda v: v >= 1, "must be >= 1")
_nonneg_int = _typed(int, lambda v: v >= 0, "must be >= 0")


def _zeta(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"zeta must be 're,im', got {text!r}") from exc


def _grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated floats: {text!r}") from exc


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=_positive_float, default=1.0, help="cavity mode energy (> 0)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="coupling strength")
    p.add_argument("--tau", type=_positive_float, default=1.0, help="atom passage time (> 0)")
    p.add_argument("--p", type=_unit_float, default=0.5, help="excitation probability in [0, 1]")
    p.add_argument("--sigma-minus", type=_nonneg_float, default=0.0, help="leaking rate (>= 0)")
    p.add_argument("--sigma-plus", type=_nonneg_float, default=0.0, help="pumping rate (>= 0)")
    p.add_argument("--atom-energy", type=_nonneg_float, default=1.0, help="atom level E (>= 0)")


def _add_run_flags(p: argparse.ArgumentParser, steps_default: int = 8) -> None:
    p.add_argument("--init", type=InitialStateSpec.parse, default="vacuum",
                   help="vacuum | gibbs:<beta> | coherent:<r>,<phi>")
    p.add_argument("--trunc", type=_positive_int, default=DEFAULT_CUTOFF, help="Fock cutoff M")
    p.add_argument("--steps", type=_nonneg_int, default=steps_default, help="number of passages")
    p.add_argument("--mode", choices=("auto", "ideal", "open"), default="auto")


def _add_out_flags(p: argparse.ArgumentParser, fmt_default: str) -> None:
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
    p.add_argument("--plot", default=None, help="also render a PNG figure to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="micromaser",
        description="Photon cavity pumped by a two-level atomic beam: "
        "simulation and closed-form evaluation (radians, rates in 1/time).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the step map and emit trajectory observables")
    _add_param_flags(sim)
    _add_run_flags(sim)
    sim.add_argument("--substeps", type=_positive_int, default=1,
                     help="samples per passage (mid-flight states)")
    _add_out_flags(sim, "csv")

    ana = sub.add_parser("analytic", help="evaluate a closed-form quantity")
    _add_param_flags(ana)
    ana.add_argument("--quantity", required=True, choices=(
        "mean-ideal", "mean-open", "limit", "bounds", "regime", "weyl-limit",
        "growth", "energy-ideal", "energy-open", "entropy-ideal", "nobeam",
    ))
    ana.add_argument("--steps", type=_nonneg_int, default=8)
    ana.add_argument("--n0", type=_nonneg_float, default=0.0, help="initial photon number")
    ana.add_argument("--time", type=_nonneg_float, default=None, help="continuous time t")
    ana.add_argument("--zeta", type=_zeta, default=0.5 + 0.0j, help="Weyl argument 're,im'")
    ana.add_argument("--beta-ref", type=_positive_float, default=1.0,
                     help="reference inverse temperature")
    ana.add_argument("--regime-name", default="p_zero",
                     choices=("p_zero", "p_one", "sigma_plus_zero_sigma_minus_to_zero",
                              "sigma_minus_to_sigma_plus"))
    ana.add_argument("--energy-regime", default=None,
                     choices=("long_time", "short_time", "equal_rates"))
    ana.add_argument("--tol", type=_positive_float, default=1e-10)
    ana.add_argument("--out", default=None)

    cmp_ = sub.add_parser("compare", help="numeric-vs-analytic comparison suite")
    _add_param_flags(cmp_)
    _add_run_flags(cmp_)
    cmp_.add_argument("--tol", type=_positive_float, default=1e-6)
    cmp_.add_argument("--beta-ref", type=_positive_float, default=1.0)
    _add_out_flags(cmp_, "json")

    swp = sub.add_parser("sweep", help="evaluate closed forms over a parameter grid")
    _add_param_flags(swp)
    swp.add_argument("--vary", required=True,
                     choices=("eps", "lam", "tau", "p", "sigma_minus", "sigma_plus"))
    swp.add_argument("--grid", type=_grid, required=True, help="comma-separated grid values")
    swp.add_argument("--quantity", action="append", required=True,
                     help="repeatable; e.g. ideal_rate, mean_photons_open_limit")
    swp.add_argument("--steps", type=_positive_int, default=1)
    swp.add_argument("--n0", type=_nonneg_float, default=0.0)
    _add_out_flags(swp, "csv")

    fig = sub.add_parser("figure1", help="ideal vs open photon growth dataset")
    fig.add_argument("--trunc", type=_positive_int, default=64)
    fig.add_argument("--steps", type=_positive_int, default=200)
    _add_out_flags(fig, "csv")

    return parser


def _params_from(args: argparse.Namespace) -> CavityParams:
    return CavityParams(
        eps=args.eps, lam=args.lam, tau=args.tau, p=args.p,
        sigma_minus=args.sigma_minus, sigma_plus=args.sigma_plus,
        atom_energy=args.atom_energy,
    )


def _run_config(args: argparse.Namespace) -> dict:
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key == "command":
            continue
        if isinstance(value, InitialStateSpec):
            value = value.kind if value.kind == "vacuum" else (
                f"gibbs:{value.beta}" if value.kind == "gibbs"
                else f"coherent:{value.r},{value.phi}"
            )
        elif isinstance(value, complex):
            value = [value.real, value.imag]
        elif isinstance(value, tuple):
            value = list(value)
        cfg[key] = value
    return cfg


def _emit(payload: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", newline="") as fh:
            fh.write(payload)


def _emit_rows(rows: list[dict], args: argparse.Namespace) -> None:
    if args.format == "csv":
        _emit(harness.rows_to_csv(rows), args.out)
    else:
        _emit(json.dumps({"run_config": _run_config(args), "rows": rows}, indent=2) + "\n",
              args.out)


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = _params_from(args)
    rows = harness.simulate_dataset(
        params, args.init, args.trunc, args.steps, substeps=args.substeps, mode=args.mode
    )
    _emit_rows(rows, args)
    if args.plot:
        plots.render_simulation(rows, args.plot)
    return 0


def _cmd_analytic(args: argparse.Namespace) -> int:
    params = _params_from(args)
    n, n0 = args.steps, args.n0
    t = args.time if args.time is not None else n * params.tau
    q = args.quantity
    if q == "mean-ideal":
        result = {"value": analytic.mean_photons_ideal(params, n0, n)}
    elif q == "mean-open":
        result = {"value": analytic.mean_photons_open(params, n0, t)}
    elif q == "limit":
        result = {"value": analytic.mean_photons_open_limit(params)}
    elif q == "bounds":
        lower, upper = analytic.limit_bounds(params)
        result = {"lower": lower, "upper": upper}
    elif q == "regime":
        rep = analytic.limit_regime(params, args.regime_name)
        result = {"regime": rep.regime, "value": rep.value, "infinite": rep.infinite}
    elif q == "weyl-limit":
        value = analytic.weyl_char_limit(args.zeta, params, tol=args.tol)
        result = {"re": value.real, "im": value.imag, "abs": abs(value)}
    elif q == "growth":
        ideal, open_ = analytic.growth_rates(params, n0, max(n, 1))
        result = {"ideal_rate": ideal, "open_rate": open_}
    elif q == "energy-ideal":
        result = {
            "per_step": analytic.energy_step_ideal(params),
            "total": analytic.energy_total_ideal(params, n),
        }
    elif q == "energy-open":
        if args.energy_regime is not None:
            result = {"value": analytic.energy_open_regimes(params, n0, args.energy_regime, n)}
        else:
            bd = analytic.energy_open(params, n0, max(n, 1))
            result = {
                "photon_part": bd.photon_part,
                "interaction_part": bd.interaction_part,
                "jump_part": bd.jump_part,
                "total": bd.total,
                "cumulative_total": analytic.energy_open_total(params, n0, n),
            }
    elif q == "entropy-ideal":
        result = {"value": analytic.entropy_production_ideal(params, args.beta_ref, n0, n)}
    else:  # nobeam
        rep = analytic.nobeam_relaxation(params, n0, t, zeta=args.zeta)
        result = {
            "mean_photons": rep.mean_photons,
            "weyl_prefactor_re": rep.weyl_prefactor.real,
            "weyl_prefactor_im": rep.weyl_prefactor.imag,
            "steady_nbar": rep.steady_nbar,
            "steady_beta": rep.steady_beta,
        }
    payload = json.dumps({"run_config": _run_config(args), "result": result}, indent=2)
    _emit(payload + "\n", args.out)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    params = _params_from(args)
    reports = harness.compare_suite(
        params, args.init, args.trunc, max(args.steps, 1),
        tol=args.tol, mode=args.mode, beta_cavity_ref=args.beta_ref,
    )
    rows = [r.as_row() for r in reports]
    if args.format == "csv":
        _emit(harness.rows_to_csv(rows), args.out)
    else:
        _emit(json.dumps(harness.report_object(_run_config(args), reports), indent=2) + "\n",
              args.out)
    if args.plot:
        plots.render_compare(rows, args.plot)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = harness.SweepSpec(
        param_name=args.vary,
        grid=args.grid,
        base=_params_from(args),
        quantities=tuple(args.quantity),
        N0=args.n0,
        n=args.steps,
    )
    rows = harness.run_sweep(spec)
    _emit_rows(rows, args)
    if args.plot:
        plots.render_sweep(rows, args.vary, args.plot)
    return 0


def _cmd_figure1(args: argparse.Namespace) -> int:
    rows = harness.figure1_dataset(M=args.trunc, n_max=args.steps)
    _emit_rows(rows, args)
    if args.plot:
        plots.render_figure1(rows, args.plot)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analytic": _cmd_analytic,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "figure1": _cmd_figure1,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except TruncationOverflowError as exc:
        print(f"truncation guard: {exc}", file=sys.stderr)
        return 3
    except (StrictDampingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
