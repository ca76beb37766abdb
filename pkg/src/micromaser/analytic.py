"""Closed-form evaluators: the ground-truth side of every comparison.

All functions are pure in CavityParams and scalars.  Removable
singularities at sigma_minus = sigma_plus are continued through their
limits with expm1-based ratios, so parameter sweeps cross the equal-rate
line without branching artifacts.  Quantities that genuinely diverge are
reported through explicit infinity flags, never as floating-point inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .channels import weyl_product_factor
from .model import CavityParams, DensityMatrix, StrictDampingError

__all__ = [
    "EnergyBreakdown",
    "LimitRegimeReport",
    "NoBeamRelaxation",
    "mean_photons_ideal",
    "mean_photons_ideal_nongauge",
    "first_moment_ideal",
    "first_moment_open",
    "mean_photons_open",
    "mean_photons_open_limit",
    "limit_bounds",
    "limit_regime",
    "weyl_char_limit",
    "araki_segal_check",
    "energy_step_ideal",
    "energy_total_ideal",
    "interaction_energy_open",
    "interaction_energy_open_entering",
    "energy_jump_open",
    "energy_open",
    "energy_open_total",
    "energy_open_regimes",
    "entropy_production_ideal",
    "relative_entropy",
    "nobeam_relaxation",
    "growth_rates",
]


# ---------------------------------------------------------------------------
# ideal cavity moments
# ---------------------------------------------------------------------------

def mean_photons_ideal(params: CavityParams, N0: float, n: int) -> float:
    """Photon number after n passages, gauge-invariant start."""
    if N0 < 0 or n < 0:
        raise ValueError("N0 and n must be >= 0")
    eps, lam, tau, p = params.eps, params.lam, params.tau, params.p
    return (
        N0
        + n * p * (1 - p) * (2 * lam**2 / eps**2) * (1 - np.cos(eps * tau))
        + p**2 * (2 * lam**2 / eps**2) * (1 - np.cos(n * eps * tau))
    )


def mean_photons_ideal_nongauge(
    params: CavityParams, N0: float, r: float, phi: float, n: int
) -> float:
    """Photon number when the start has first moment r e^{i phi}."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if N0 < r**2:
        raise ValueError(f"inconsistent moment pair: need N0 >= r^2, got N0={N0}, r^2={r**2}")
    eps, lam, tau, p = params.eps, params.lam, params.tau, params.p
    cross = p * (2 * lam * r / eps) * (np.cos(phi) - np.cos(n * eps * tau - phi))
    return mean_photons_ideal(params, N0, n) + cross


def first_moment_ideal(params: CavityParams, n: int) -> complex:
    """<b> after n passages from a gauge-invariant start."""
    eps, lam, tau, p = params.eps, params.lam, params.tau, params.p
    return p * (lam / eps) * (np.exp(-1j * n * eps * tau) - 1.0)


def first_moment_open(params: CavityParams, n: int) -> complex:
    """<b> after n open passages from a gauge-invariant start."""
    mu = params.mu
    return -params.p * (1j * params.lam / mu) * (1.0 - np.exp(-n * mu * params.tau))


# ---------------------------------------------------------------------------
# open cavity moments
# ---------------------------------------------------------------------------

def _require_not_overpumped(params: CavityParams, what: str) -> None:
    if params.sigma_plus > params.sigma_minus:
        raise StrictDampingError(
            f"{what} requires sigma_minus > sigma_plus "
            f"(got sigma_minus={params.sigma_minus}, sigma_plus={params.sigma_plus})"
        )


def _decay_ratio(t: float, params: CavityParams) -> float:
    """(1 - e^{-delta t}) / (1 - e^{-delta tau}), = t/tau at delta = 0."""
    delta, tau = params.rate_gap, params.tau
    if delta == 0.0:
        return t / tau
    return float(np.expm1(-delta * t) / np.expm1(-delta * tau))


def _pump_integral(t: float, params: CavityParams) -> float:
    """sigma_plus (1 - e^{-delta t}) / delta, = sigma_plus t at delta = 0."""
    if params.sigma_plus == 0.0:
        return 0.0
    delta = params.rate_gap
    if delta == 0.0:
        return params.sigma_plus * t
    return -params.sigma_plus * float(np.expm1(-delta * t)) / delta


def _drive_weight(params: CavityParams) -> float:
    """e^{-delta tau}(1 - e^{mu tau})(1 - e^{conj(mu) tau}), real by symmetry."""
    mu, tau, delta = params.mu, params.tau, params.rate_gap
    return float(
        (np.exp(-delta * tau) * (1 - np.exp(mu * tau)) * (1 - np.exp(np.conj(mu) * tau))).real
    )


def mean_photons_open(params: CavityParams, N0: float, t: float) -> float:
    """Photon number at continuous time t >= 0 (five-term closed form).

    Valid for sigma_minus >= sigma_plus; the equal-rate case is the
    analytic limit, which adds sigma_plus*t to the ideal value at t = n tau.
    """
    if N0 < 0 or t < 0:
        raise ValueError("N0 and t must be >= 0")
    _require_not_overpumped(params, "mean_photons_open")
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    r_t = _decay_ratio(t, params)
    cos_step = 1 - np.exp(-delta * tau / 2) * np.cos(eps * tau)
    return (
        np.exp(-delta * t) * N0
        + p * lam**2 / amu2 * _drive_weight(params) * r_t
        - p**2 * 2 * lam**2 / amu2 * r_t * cos_step
        + p**2 * 2 * lam**2 / amu2 * (1 - np.exp(-delta * t / 2) * np.cos(eps * t))
        + _pump_integral(t, params)
    )


def mean_photons_open_limit(params: CavityParams) -> float:
    """t -> infinity photon number; requires strict damping."""
    params.require_strict_damping("mean_photons_open_limit")
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    cos_step = 1 - np.exp(-delta * tau / 2) * np.cos(eps * tau)
    return (
        p * (1 - p) * (2 * lam**2 / amu2) * cos_step / (-np.expm1(-delta * tau))
        + p * (2 * p - 1) * lam**2 / amu2
        + params.sigma_plus / delta
    )


def limit_bounds(params: CavityParams) -> tuple[float, float]:
    """(lower, upper) bounds sandwiching mean_photons_open_limit."""
    params.require_strict_damping("limit_bounds")
    p, lam, tau = params.p, params.lam, params.tau
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    base = params.sigma_plus / delta
    upper = (
        (2 * lam**2 / amu2) * p * (1 - p) / (-np.expm1(-delta * tau))
        + p * (2 * p - 1) * lam**2 / amu2
        + base
    )
    lower = (2 * lam**2 / amu2) * p**2 / (1 + np.exp(delta * tau)) + base
    return lower, upper


@dataclass(frozen=True)
class LimitRegimeReport:
    """Value of the limiting photon number in one of the instructive regimes."""

    regime: str
    value: float | None
    infinite: bool = False


_REGIMES = ("p_zero", "p_one", "sigma_plus_zero_sigma_minus_to_zero", "sigma_minus_to_sigma_plus")


def limit_regime(params: CavityParams, regime: str) -> LimitRegimeReport:
    """Evaluate the limiting photon number in the named regime."""
    if regime not in _REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {_REGIMES}")
    eps, lam, tau, p = params.eps, params.lam, params.tau, params.p
    if regime == "p_zero":
        params.require_strict_damping("limit_regime(p_zero)")
        return LimitRegimeReport(regime, params.sigma_plus / params.rate_gap)
    if regime == "p_one":
        params.require_strict_damping("limit_regime(p_one)")
        return LimitRegimeReport(
            regime, lam**2 / abs(params.mu) ** 2 + params.sigma_plus / params.rate_gap
        )
    if regime == "sigma_plus_zero_sigma_minus_to_zero":
        if p == 0.0:
            return LimitRegimeReport(regime, 0.0)
        resonant = abs(np.cos(eps * tau) - 1.0) < 1e-15
        if not resonant and 0.0 < p < 1.0:
            return LimitRegimeReport(regime, None, infinite=True)
        if resonant:
            # cos eps*tau = 1: the 0/0 ratio tends to 1/2, leaving p^2 lam^2/eps^2
            return LimitRegimeReport(regime, p**2 * lam**2 / eps**2)
        # p = 1: Rabi-bounded, sigma_- -> 0 limit of the p_one value
        return LimitRegimeReport(regime, lam**2 / eps**2)
    # sigma_minus_to_sigma_plus
    if params.sigma_plus > 0:
        return LimitRegimeReport(regime, None, infinite=True)
    return LimitRegimeReport(regime, 0.0)


# ---------------------------------------------------------------------------
# limiting Weyl characteristic functional
# ---------------------------------------------------------------------------

def _weyl_limit_terms(zeta: complex, params: CavityParams, tol: float) -> tuple[complex, int, float]:
    """(value, K, certified tail bound) of the truncated infinite product."""
    params.require_strict_damping("weyl_char_limit")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    delta, tau = params.rate_gap, params.tau
    mu = params.mu
    gauss = np.exp(-abs(zeta) ** 2 / 4.0 * (params.sigma_minus + params.sigma_plus) / delta)
    if zeta == 0 or params.p == 0.0 or params.lam == 0.0:
        return complex(gauss), 0, 0.0
    q = np.exp(-delta * tau / 2.0)
    coeff = (
        2.0 * np.sqrt(2.0) * params.p * params.lam * abs(zeta) / abs(mu) ** 2
        * (delta / 2.0 + params.eps) * (1.0 + q)
    )
    # geometric tail sum_{k>=K} coeff q^k = coeff q^K/(1-q); 2x safety factor
    target = tol / 2.0
    if coeff / (1.0 - q) <= target:
        K = 1
    else:
        K = int(np.ceil(np.log(coeff / ((1.0 - q) * target)) / (delta * tau / 2.0))) + 1
    K = max(K, 1)
    factors = weyl_product_factor(params, np.arange(K), zeta)
    tail = coeff * q**K / (1.0 - q)
    return complex(gauss * np.prod(factors)), K, float(tail)


def weyl_char_limit(zeta: complex, params: CavityParams, tol: float = 1e-10) -> complex:
    """Characteristic functional of the limiting cavity state at zeta.

    The infinite beam product is truncated at a K certified by its
    geometric tail bound so the relative error is below tol.
    """
    value, _, _ = _weyl_limit_terms(zeta, params, tol)
    return value


def araki_segal_check(
    functional: Callable[[complex], complex], sample_points: Iterable[complex]
) -> tuple[bool, float]:
    """Twisted positive-semidefiniteness test for a characteristic functional.

    Builds the Gram-like matrix omega(W(f_j - f_k)) e^{-i Im(conj(f_j) f_k)/2}
    and reports (passed, minimum eigenvalue); passes at >= -1e-8.
    """
    pts = [complex(z) for z in sample_points]
    if len(pts) > 64:
        raise ValueError(f"at most 64 sample points supported, got {len(pts)}")
    m = len(pts)
    gram = np.empty((m, m), dtype=complex)
    for j in range(m):
        for k in range(m):
            twist = np.exp(-1j * np.imag(np.conj(pts[j]) * pts[k]) / 2.0)
            gram[j, k] = functional(pts[j] - pts[k]) * twist
    gram = 0.5 * (gram + gram.conj().T)
    min_eig = float(np.linalg.eigvalsh(gram)[0])
    return min_eig >= -1e-8, min_eig


# ---------------------------------------------------------------------------
# energy bookkeeping
# ---------------------------------------------------------------------------

def energy_step_ideal(params: CavityParams) -> float:
    """Total-energy jump when a fresh atom enters the ideal cavity."""
    eps, lam, tau, p = params.eps, params.lam, params.tau, params.p
    return p * (1 - p) * (2 * lam**2 / eps) * (1 - np.cos(tau * eps))


def energy_total_ideal(params: CavityParams, n: int) -> float:
    """Total energy variation over n passages; the first entry costs nothing."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return max(n - 1, 0) * energy_step_ideal(params)


def interaction_energy_open(params: CavityParams, n: int) -> float:
    """lam <(b*+b) (x) eta_n> just before atom n leaves (t = n tau - 0)."""
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    cos_step = 1 - np.exp(-delta * tau / 2) * np.cos(eps * tau)
    cos_n = 1 - np.exp(-n * delta * tau / 2) * np.cos(n * eps * tau)
    return (
        -(2 * lam**2 * eps / amu2) * (p * (1 - p) * cos_step + p**2 * cos_n)
        + (lam**2 * delta / amu2)
        * (
            p * (1 - p) * np.exp(-delta * tau / 2) * np.sin(eps * tau)
            + p**2 * np.exp(-n * delta * tau / 2) * np.sin(n * eps * tau)
        )
    )


def interaction_energy_open_entering(params: CavityParams, n: int) -> float:
    """lam <(b*+b) (x) eta_n> when atom n enters (t = (n-1) tau, product state)."""
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    k = n - 1
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    return (
        -(2 * lam**2 * eps / amu2) * p**2 * (1 - np.exp(-k * delta * tau / 2) * np.cos(k * eps * tau))
        + (lam**2 * delta / amu2) * p**2 * np.exp(-k * delta * tau / 2) * np.sin(k * eps * tau)
    )


def energy_jump_open(params: CavityParams) -> float:
    """Total-energy jump when an atom (n >= 2) enters the open cavity."""
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    return p * (1 - p) * (lam**2 / amu2) * (
        2 * eps * (1 - np.exp(-delta * tau / 2) * np.cos(eps * tau))
        - delta * np.exp(-delta * tau / 2) * np.sin(eps * tau)
    )


@dataclass(frozen=True)
class EnergyBreakdown:
    """Total-energy variation over one extended passage, by mechanism."""

    photon_part: float
    interaction_part: float
    jump_part: float

    @property
    def total(self) -> float:
        return self.photon_part + self.interaction_part + self.jump_part


def energy_open(params: CavityParams, N0: float, n: int) -> EnergyBreakdown:
    """Energy variation over the extended interval ((n-1)tau - 0, n tau - 0).

    photon_part follows the photon-number evolution, interaction_part the
    in-flight interaction energy of atom n, jump_part the swap when atom n
    enters (zero for n = 1: a fresh atom costs nothing against a
    gauge-invariant cavity).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _require_not_overpumped(params, "energy_open")
    tau = params.tau
    photon = params.eps * (
        mean_photons_open(params, N0, n * tau) - mean_photons_open(params, N0, (n - 1) * tau)
    )
    interaction = interaction_energy_open(params, n) - interaction_energy_open_entering(params, n)
    jump = energy_jump_open(params) if n >= 2 else 0.0
    return EnergyBreakdown(photon_part=photon, interaction_part=interaction, jump_part=jump)


def energy_open_total(params: CavityParams, N0: float, n: int) -> float:
    """Cumulative total-energy variation from t = -0 to t = n tau - 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    _require_not_overpumped(params, "energy_open_total")
    return params.eps * (
        mean_photons_open(params, N0, n * params.tau) - N0
    ) + interaction_energy_open(params, n)


def energy_open_regimes(
    params: CavityParams, N0: float, regime: str, n: int | None = None
) -> float:
    """Asymptotic forms of the cumulative energy variation.

    long_time: the n -> infinity plateau (strict damping required).
    short_time: the leading linear-in-(n tau) growth.
    equal_rates: the sigma_minus -> sigma_plus limit at given n.
    """
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    delta = params.rate_gap
    amu2 = abs(params.mu) ** 2
    if regime == "long_time":
        params.require_strict_damping("energy_open_regimes(long_time)")
        cos_step = 1 - np.exp(-delta * tau / 2) * np.cos(eps * tau)
        return (
            eps * (params.sigma_plus / delta - N0)
            + p * (1 - p) * (2 * lam**2 * eps / amu2) * cos_step
            * np.exp(-delta * tau) / (-np.expm1(-delta * tau))
            - eps * p * lam**2 / amu2
            + p * (1 - p) * (lam**2 * delta / amu2) * np.exp(-delta * tau / 2) * np.sin(eps * tau)
        )
    if n is None:
        raise ValueError(f"regime {regime!r} needs the step count n")
    if regime == "short_time":
        _require_not_overpumped(params, "energy_open_regimes(short_time)")
        slope = (
            eps * params.sigma_plus
            - delta * eps * N0
            + p * (1 - p) * (2 * lam**2 * eps / amu2) * (1 - np.cos(eps * tau))
            * (delta / (-np.expm1(-delta * tau)) if delta != 0.0 else 1.0 / tau)
            + p**2 * lam**2 * delta * eps / amu2
        )
        return n * tau * slope
    if regime == "equal_rates":
        return n * tau * eps * params.sigma_plus + max(n - 1, 0) * p * (1 - p) * (
            2 * lam**2 / eps
        ) * (1 - np.cos(eps * tau))
    raise ValueError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------------

def entropy_production_ideal(
    params: CavityParams, beta_cavity_ref: float, N0: float, n: int
) -> float:
    """Entropy production against a Gibbs reference: beta_C eps (N(t) - N(0)).

    The beam contribution vanishes identically because the atomic occupation
    commutes with the dynamics.
    """
    if not beta_cavity_ref > 0:
        raise ValueError("beta_cavity_ref must be > 0")
    return beta_cavity_ref * params.eps * (mean_photons_ideal(params, N0, n) - N0)


def relative_entropy(rho: DensityMatrix, rho_ref: DensityMatrix) -> float:
    """Tr(rho ln rho - rho ln rho_ref), nonnegative up to rounding.

    Requires supp(rho) inside supp(rho_ref) numerically: reference
    eigendirections with eigenvalue <= 1e-14 must carry no rho mass.
    """
    if rho.dim != rho_ref.dim:
        raise ValueError("dimension mismatch")
    evals = np.linalg.eigvalsh(rho.entries)
    refvals, refvecs = np.linalg.eigh(rho_ref.entries)
    weights = np.real(np.einsum("ij,jk,ki->i", refvecs.conj().T, rho.entries, refvecs))
    singular = refvals <= 1e-14
    stray = float(weights[singular].sum()) if singular.any() else 0.0
    if stray > 1e-12:
        raise ValueError(
            f"support violation: rho carries mass {stray:.3e} outside supp(rho_ref)"
        )
    pos = evals > 1e-15
    s_rho = float(np.sum(evals[pos] * np.log(evals[pos])))
    keep = (~singular) & (weights > 1e-15)
    cross = float(np.sum(weights[keep] * np.log(refvals[keep])))
    return s_rho - cross


# ---------------------------------------------------------------------------
# no-beam relaxation and growth rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoBeamRelaxation:
    """Relaxation data of the beam-free cavity at time t."""

    mean_photons: float
    weyl_prefactor: complex
    steady_nbar: float | None
    steady_beta: float | None


def nobeam_relaxation(
    params: CavityParams, N0: float, t: float, zeta: complex = 0.0
) -> NoBeamRelaxation:
    """Photon decay, Weyl damping factor and the steady Gibbs data (no beam).

    For sigma_minus > sigma_plus the cavity relaxes to the Gibbs state with
    beta_cav = ln(sigma_minus/sigma_plus)/eps (vacuum for sigma_plus = 0);
    at equal rates the photon number grows linearly and no steady state
    exists.
    """
    if N0 < 0 or t < 0:
        raise ValueError("N0 and t must be >= 0")
    _require_not_overpumped(params, "nobeam_relaxation")
    delta = params.rate_gap
    sigsum = params.sigma_minus + params.sigma_plus
    if delta == 0.0:
        mean = N0 + params.sigma_plus * t
        omega = abs(zeta) ** 2 / 4.0 * sigsum * t
        nbar = beta = None
    else:
        mean = float(np.exp(-delta * t)) * N0 - params.sigma_plus * float(np.expm1(-delta * t)) / delta
        omega = -abs(zeta) ** 2 / 4.0 * (sigsum / delta) * float(np.expm1(-delta * t))
        if params.sigma_plus > 0:
            nbar = params.sigma_plus / delta
            beta = float(np.log(params.sigma_minus / params.sigma_plus) / params.eps)
        else:
            nbar, beta = 0.0, None
    return NoBeamRelaxation(
        mean_photons=mean,
        weyl_prefactor=complex(np.exp(-omega)),
        steady_nbar=nbar,
        steady_beta=beta,
    )


def growth_rates(params: CavityParams, N0: float, n: int) -> tuple[float, float]:
    """(ideal, open) photon growth rates N(t)/(n tau) at t = n tau."""
    if n < 1:
        raise ValueError("n must be >= 1")
    t = n * params.tau
    ideal = mean_photons_ideal(params, N0, n) / t
    open_ = mean_photons_open(params, N0, t) / t
    return ideal, open_
