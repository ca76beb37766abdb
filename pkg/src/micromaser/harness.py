"""Numeric-vs-analytic comparison orchestration and dataset emission.

Every check produces a ComparisonReport; suites of reports serialize to
CSV (RFC-4180 quoting, '.' decimal separator, 17 significant digits) or to
a JSON object {run_config, reports, summary}.  Identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import analytic, channels
from .model import (
    CavityParams,
    DensityMatrix,
    InitialStateSpec,
    TruncationOverflowError,
    initial_state,
    ladder_operators,
    weyl_operator,
)

__all__ = [
    "ComparisonReport",
    "SweepSpec",
    "WEYL_PROBES",
    "compare_suite",
    "figure1_params",
    "figure1_dataset",
    "convergence_study",
    "run_sweep",
    "simulate_dataset",
    "rows_to_csv",
    "write_csv",
    "report_object",
    "write_json_report",
]

#: fixed Weyl probe points: real, imaginary and mixed phases
WEYL_PROBES = (0.5 + 0.0j, 0.5j, 0.3 + 0.4j)

PURE_ALGEBRA_TOL = 1e-8
SIMULATION_TOL = 1e-6


@dataclass(frozen=True)
class ComparisonReport:
    """One checked quantity: analytic value, numeric value, errors, verdict."""

    quantity: str
    analytic: complex
    numeric: complex
    tolerance: float
    trunc_dim: int
    tail_mass: float

    @property
    def abs_err(self) -> float:
        return abs(self.numeric - self.analytic)

    @property
    def rel_err(self) -> float:
        scale = abs(self.analytic)
        return self.abs_err / scale if scale > 0 else self.abs_err

    @property
    def passed(self) -> bool:
        return self.abs_err <= self.tolerance or self.rel_err <= self.tolerance

    def as_row(self) -> dict:
        return {
            "quantity": self.quantity,
            "analytic_re": float(np.real(self.analytic)),
            "analytic_im": float(np.imag(self.analytic)),
            "numeric_re": float(np.real(self.numeric)),
            "numeric_im": float(np.imag(self.numeric)),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "trunc_dim": self.trunc_dim,
            "tail_mass": self.tail_mass,
        }


def _resolve_mode(params: CavityParams, mode: str) -> str:
    if mode == "auto":
        return "open" if (params.sigma_minus > 0 or params.sigma_plus > 0) else "ideal"
    if mode not in ("ideal", "open"):
        raise ValueError(f"mode must be ideal, open or auto, got {mode!r}")
    return mode


def _initial_weyl_expectation(
    spec: InitialStateSpec, params: CavityParams, zeta: complex
) -> complex:
    """Closed-form Tr(rho_0 W(zeta)) for the supported initial states."""
    gauss = np.exp(-abs(zeta) ** 2 / 4.0)
    if spec.kind == "vacuum":
        return complex(gauss)
    if spec.kind == "coherent":
        alpha = spec.r * np.exp(1j * spec.phi)
        return complex(gauss * np.exp(1j * np.sqrt(2.0) * np.real(np.conj(alpha) * zeta)))
    if spec.kind == "gibbs":
        nbar = 1.0 / np.expm1(spec.beta * params.eps)
        return complex(np.exp(-abs(zeta) ** 2 / 4.0 * (2 * nbar + 1)))
    raise ValueError(f"no closed-form Weyl expectation for initial state {spec.kind!r}")


class _StepEngine:
    """Shared stepping loop producing states, branches and observables."""

    def __init__(self, params: CavityParams, init: InitialStateSpec, M: int, mode: str):
        self.params = params
        self.mode = mode
        self.M = M
        self.state = initial_state(init, params, M)
        b, _, n_op = ladder_operators(M)
        self.b = b.entries
        self.n_op = n_op.entries
        self.x_op = self.b + self.b.conj().T
        self.n0 = float(self.state.expectation(self.n_op).real)
        self.b0 = complex(self.state.expectation(self.b))
        self.excited_branch: np.ndarray | None = None

    def step(self) -> None:
        if self.mode == "ideal":
            excited, ground = channels.ideal_step_branches(self.state, self.params)
        else:
            excited, ground = channels.open_step_branches(self.state, self.params)
        self.excited_branch = excited
        p = self.params.p
        nxt = p * excited + (1 - p) * ground
        self.state = channels._guarded(nxt)

    @property
    def photon_number(self) -> float:
        return float(self.state.expectation(self.n_op).real)

    @property
    def first_moment(self) -> complex:
        return complex(self.state.expectation(self.b))

    @property
    def interaction_energy(self) -> float:
        return channels.interaction_expectation(self.excited_branch, self.params)

    def weyl_expectation(self, zeta: complex) -> complex:
        return complex(self.state.expectation(weyl_operator(zeta, self.M).entries))


def compare_suite(
    params: CavityParams,
    init: InitialStateSpec,
    M: int,
    n_max: int,
    tol: float = SIMULATION_TOL,
    mode: str = "auto",
    beta_cavity_ref: float = 1.0,
) -> list[ComparisonReport]:
    """Check photon number, first moment, Weyl expectations, energy totals
    and (ideal mode) entropy production at every step n <= n_max.

    Energy and entropy checks need a gauge-invariant start and are emitted
    for vacuum/gibbs initial states only.  A truncation-guard trip aborts
    with the largest valid n in the error message.
    """
    mode = _resolve_mode(params, mode)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    engine = _StepEngine(params, init, M, mode)
    gauge_invariant = init.kind in ("vacuum", "gibbs")
    dual = channels.dual_moments_ideal if mode == "ideal" else channels.dual_moments_open
    if gauge_invariant and mode == "ideal":
        ref = initial_state(InitialStateSpec.gibbs(beta_cavity_ref), params, M)
        log_ref = np.diag(np.log(np.real(np.diag(ref.entries))))
        rho0 = initial_state(init, params, M)
    reports: list[ComparisonReport] = []
    for n in range(1, n_max + 1):
        try:
            engine.step()
        except TruncationOverflowError as exc:
            raise TruncationOverflowError(
                f"{exc} (largest valid n = {n - 1})"
            ) from exc
        tail = engine.state.tail_mass
        dim = M + 1

        def add(quantity: str, ana: complex, num: complex, tolerance: float = tol) -> None:
            reports.append(
                ComparisonReport(
                    quantity=f"{quantity}[n={n}]",
                    analytic=ana,
                    numeric=num,
                    tolerance=tolerance,
                    trunc_dim=dim,
                    tail_mass=tail,
                )
            )

        n_poly = dual(channels.ObservablePoly.number(), params, n)
        add("photon_number", n_poly.pair_moments(engine.n0, engine.b0), engine.photon_number)
        b_poly = dual(channels.ObservablePoly.annihilation(), params, n)
        add("first_moment", b_poly.pair_moments(engine.n0, engine.b0), engine.first_moment)
        for i, zeta in enumerate(WEYL_PROBES):
            evo = channels.dual_weyl_open(zeta, params, n)
            ana = evo.scalar_factor * _initial_weyl_expectation(init, params, evo.evolved_zeta)
            add(f"weyl_{i}", ana, engine.weyl_expectation(zeta))
        if gauge_invariant:
            if mode == "ideal":
                ana_total = analytic.energy_total_ideal(params, n)
            else:
                ana_total = analytic.energy_open_total(params, engine.n0, n)
            num_total = (
                params.eps * (engine.photon_number - engine.n0) + engine.interaction_energy
            )
            add("energy_total", ana_total, num_total)
            if mode == "ideal":
                # matrix route of the entropy production: Tr[(rho0 - rhon) ln rho_ref]
                num_ds = float(
                    np.trace((rho0.entries - engine.state.entries) @ log_ref).real
                )
                add(
                    "entropy_production",
                    analytic.entropy_production_ideal(params, beta_cavity_ref, engine.n0, n),
                    num_ds,
                )
    return reports


def figure1_params() -> CavityParams:
    """Open-cavity showcase parameters; lam is pinned by lam^2/|mu|^2 = 1."""
    eps, tau, p = 0.5, 0.5, 0.5
    sigma_minus, sigma_plus = 0.003, 0.0
    lam = np.sqrt(eps**2 + (sigma_minus - sigma_plus) ** 2 / 4.0)
    return CavityParams(
        eps=eps, lam=float(lam), tau=tau, p=p,
        sigma_minus=sigma_minus, sigma_plus=sigma_plus,
    )


def figure1_dataset(M: int = 64, n_max: int = 200) -> list[dict]:
    """Ideal vs open photon growth with the showcase parameters.

    Columns: n, t, N_ideal, N_open_analytic, N_open_numeric, asymptote.
    """
    params = figure1_params()
    ideal_params = CavityParams(
        eps=params.eps, lam=params.lam, tau=params.tau, p=params.p,
    )
    asymptote = analytic.mean_photons_open_limit(params)
    engine = _StepEngine(params, InitialStateSpec.vacuum(), M, "open")
    rows = []
    for n in range(n_max + 1):
        if n > 0:
            engine.step()
        t = n * params.tau
        rows.append(
            {
                "n": n,
                "t": t,
                "N_ideal": analytic.mean_photons_ideal(ideal_params, 0.0, n),
                "N_open_analytic": analytic.mean_photons_open(params, 0.0, t),
                "N_open_numeric": engine.photon_number,
                "asymptote": asymptote,
            }
        )
    return rows


def convergence_study(
    params: CavityParams,
    init: InitialStateSpec,
    quantity: str,
    M_list: list[int],
    n: int,
    tol: float = SIMULATION_TOL,
    mode: str = "auto",
) -> list[ComparisonReport]:
    """Error of one quantity at step n across ascending cutoffs."""
    if list(M_list) != sorted(M_list) or len(set(M_list)) != len(M_list):
        raise ValueError("M_list must be strictly ascending")
    if quantity not in ("photon_number", "first_moment", "weyl_0", "weyl_1", "weyl_2"):
        raise ValueError(f"unknown convergence quantity {quantity!r}")
    mode = _resolve_mode(params, mode)
    dual = channels.dual_moments_ideal if mode == "ideal" else channels.dual_moments_open
    out = []
    for M in M_list:
        engine = _StepEngine(params, init, M, mode)
        for _ in range(n):
            engine.step()
        if quantity == "photon_number":
            ana = dual(channels.ObservablePoly.number(), params, n).pair_moments(
                engine.n0, engine.b0
            )
            num = engine.photon_number
        elif quantity == "first_moment":
            ana = dual(channels.ObservablePoly.annihilation(), params, n).pair_moments(
                engine.n0, engine.b0
            )
            num = engine.first_moment
        else:
            zeta = WEYL_PROBES[int(quantity[-1])]
            evo = channels.dual_weyl_open(zeta, params, n)
            ana = evo.scalar_factor * _initial_weyl_expectation(init, params, evo.evolved_zeta)
            num = engine.weyl_expectation(zeta)
        out.append(
            ComparisonReport(
                quantity=f"{quantity}[n={n},M={M}]",
                analytic=ana,
                numeric=num,
                tolerance=tol,
                trunc_dim=M + 1,
                tail_mass=engine.state.tail_mass,
            )
        )
    return out


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep request over closed-form quantities."""

    param_name: str
    grid: tuple[float, ...]
    base: CavityParams
    quantities: tuple[str, ...]
    N0: float = 0.0
    n: int = 1

    def __post_init__(self):
        g = list(self.grid)
        if not g:
            raise ValueError("sweep grid must be nonempty")
        ascending = all(a < b for a, b in zip(g, g[1:]))
        descending = all(a > b for a, b in zip(g, g[1:]))
        if not (ascending or descending):
            raise ValueError("sweep grid must be strictly monotone")


_SWEEPABLE = ("eps", "lam", "tau", "p", "sigma_minus", "sigma_plus")


def _sweep_value(name: str, params: CavityParams, N0: float, n: int) -> float:
    if name == "ideal_rate":
        return analytic.growth_rates(params, N0, n)[0]
    if name == "open_rate":
        return analytic.growth_rates(params, N0, n)[1]
    if name == "energy_step_ideal":
        return analytic.energy_step_ideal(params)
    if name == "mean_photons_ideal":
        return analytic.mean_photons_ideal(params, N0, n)
    if name == "mean_photons_open":
        return analytic.mean_photons_open(params, N0, n * params.tau)
    if name == "mean_photons_open_limit":
        return analytic.mean_photons_open_limit(params)
    if name == "limit_lower":
        return analytic.limit_bounds(params)[0]
    if name == "limit_upper":
        return analytic.limit_bounds(params)[1]
    if name == "energy_open_total":
        return analytic.energy_open_total(params, N0, n)
    raise ValueError(f"unknown sweep quantity {name!r}")


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Evaluate the requested quantities over the grid, one row per point."""
    if spec.param_name not in _SWEEPABLE:
        raise ValueError(f"cannot sweep {spec.param_name!r}; choose from {_SWEEPABLE}")
    rows = []
    for value in spec.grid:
        params = CavityParams(
            **{
                **{k: getattr(spec.base, k) for k in
                   ("eps", "lam", "tau", "p", "sigma_minus", "sigma_plus", "atom_energy")},
                spec.param_name: value,
            }
        )
        row = {spec.param_name: value}
        for q in spec.quantities:
            row[q] = _sweep_value(q, params, spec.N0, spec.n)
        rows.append(row)
    return rows


def simulate_dataset(
    params: CavityParams,
    init: InitialStateSpec,
    M: int,
    n_max: int,
    substeps: int = 1,
    mode: str = "auto",
) -> list[dict]:
    """Step-by-step trajectory observables, optionally sampled inside steps.

    Sub-step rows carry the mid-flight cavity state at t = (n-1)tau + nu;
    step-boundary rows coincide with the one-step map iterates.
    """
    mode = _resolve_mode(params, mode)
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    b_op, _, n_opw = ladder_operators(M)
    n_op = n_opw.entries
    b = b_op.entries
    state = initial_state(init, params, M)

    def row(n: int, nu: float, rho: DensityMatrix) -> dict:
        nmean = float(rho.expectation(n_op).real)
        bmean = complex(rho.expectation(b))
        return {
            "n": n,
            "nu": nu,
            "t": n * params.tau + nu,
            "photon_number": nmean,
            "re_first_moment": bmean.real,
            "im_first_moment": bmean.imag,
            "trace_defect": abs(complex(np.trace(rho.entries)) - 1.0),
            "tail_mass": rho.tail_mass,
        }

    rows = [row(0, 0.0, state)]
    for n in range(n_max):
        for j in range(1, substeps):
            nu = params.tau * j / substeps
            if mode == "ideal":
                mid = channels.ideal_step_direct(state, params, dt=nu)
            else:
                mid = channels.open_step_reduced(state, params, dt=nu)
            rows.append(row(n, nu, mid))
        if mode == "ideal":
            state = channels.ideal_step_shift(state, params)
        else:
            state = channels.open_step_reduced(state, params)
        rows.append(row(n + 1, 0.0, state))
    return rows


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    """Serialize rows (uniform keys) as RFC-4180 CSV with 17 digit floats."""
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for r in rows:
        writer.writerow([_fmt(r[k]) for k in header])
    return buf.getvalue()


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def report_object(run_config: dict, reports: list[ComparisonReport]) -> dict:
    """JSON-ready {run_config, reports[], summary{passed, failed}}."""
    passed = sum(1 for r in reports if r.passed)
    return {
        "run_config": run_config,
        "reports": [r.as_row() for r in reports],
        "summary": {"passed": passed, "failed": len(reports) - passed},
    }


def write_json_report(run_config: dict, reports: list[ComparisonReport], path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report_object(run_config, reports), fh, indent=2)
        fh.write("\n")
