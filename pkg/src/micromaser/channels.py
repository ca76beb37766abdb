"""One-step evolution maps of the pumped cavity and their Heisenberg duals.

Schroedinger picture: the cavity state after one atom passage is

    ideal   L(rho)   = p S^-1(U S(rho) U^dag) + (1-p) U rho U^dag
    open    L_s(rho) = p S^-1(e^{tau K_lam}(S rho)) + (1-p) e^{tau K_0}(rho)

with U = exp(-i tau eps b*b), S the unitary shift by lam/eps and K_lam the
cavity Lindblad generator with jump operators shifted by lam/eps.  Both are
also available through the brute-force joint cavity (x) atom route, which
serves as the cross-implementation oracle and exposes pre-trace states.

Heisenberg picture: the affine span of {b*b, b*, b, 1} is closed under the
dual maps, as is the Weyl family up to a scalar; both n-step actions are
closed-form and O(1) in n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from ._liouville import DiagonalBlockPropagator, RealPropagator, liouvillian_sparse
from .model import (
    TAIL_GUARD,
    CavityParams,
    DensityMatrix,
    TruncatedOperator,
    TruncationOverflowError,
    _ladder,
)

__all__ = [
    "ObservablePoly",
    "WeylEvolutionResult",
    "joint_hamiltonian",
    "ideal_step_direct",
    "ideal_step_shift",
    "ideal_step_pretrace",
    "ideal_step_branches",
    "open_step_reduced",
    "open_step_branches",
    "open_step_joint",
    "open_step_joint_pretrace",
    "dual_moments_ideal",
    "dual_moments_open",
    "dual_weyl_open",
    "interaction_expectation",
    "joint_energy",
]

JOINT_CUTOFF_MAX = 16


@dataclass(frozen=True)
class ObservablePoly:
    """Affine observable c_number b*b + c_create b* + c_annih b + c_id."""

    c_number: complex = 0.0
    c_create: complex = 0.0
    c_annih: complex = 0.0
    c_id: complex = 0.0

    @classmethod
    def number(cls) -> "ObservablePoly":
        return cls(c_number=1.0)

    @classmethod
    def annihilation(cls) -> "ObservablePoly":
        return cls(c_annih=1.0)

    @classmethod
    def creation(cls) -> "ObservablePoly":
        return cls(c_create=1.0)

    @classmethod
    def identity(cls) -> "ObservablePoly":
        return cls(c_id=1.0)

    @property
    def is_hermitian(self) -> bool:
        return (
            abs(complex(self.c_number).imag) < 1e-12
            and abs(complex(self.c_id).imag) < 1e-12
            and abs(complex(self.c_create) - np.conj(complex(self.c_annih))) < 1e-12
        )

    def to_matrix(self, M: int) -> np.ndarray:
        b, bd, n = _ladder(M)
        return (
            self.c_number * n
            + self.c_create * bd
            + self.c_annih * b
            + self.c_id * np.eye(M + 1, dtype=complex)
        )

    def pair_moments(self, n_mean: float, b_mean: complex = 0.0) -> complex:
        """Expectation against a state with given <b*b> and <b> (so <b*> = conj)."""
        return (
            self.c_number * n_mean
            + self.c_create * np.conj(b_mean)
            + self.c_annih * b_mean
            + self.c_id
        )

    def expectation(self, rho: DensityMatrix) -> complex:
        return complex(np.trace(self.to_matrix(rho.dim - 1) @ rho.entries))


@dataclass(frozen=True)
class WeylEvolutionResult:
    """n-step dual action on W(zeta): scalar_factor * W(evolved_zeta)."""

    scalar_factor: complex
    evolved_zeta: complex


# ---------------------------------------------------------------------------
# joint-space building blocks
# ---------------------------------------------------------------------------

def joint_hamiltonian(params: CavityParams, M: int) -> TruncatedOperator:
    """eps b*b (x) 1 + 1 (x) E eta + lam (b*+b) (x) eta for the in-cavity atom."""
    if M < 1:
        raise ValueError(f"cutoff M must be >= 1, got {M}")
    b, bd, n = _ladder(M)
    eye_c = np.eye(M + 1, dtype=complex)
    eye_a = np.eye(2, dtype=complex)
    eta = np.diag([1.0, 0.0]).astype(complex)
    H = (
        params.eps * np.kron(n, eye_a)
        + params.atom_energy * np.kron(eye_c, eta)
        + params.lam * np.kron(bd + b, eta)
    )
    return TruncatedOperator.wrap(H, hermitian_hint=True)


@lru_cache(maxsize=16)
def _joint_eig(params: CavityParams, M: int):
    H = joint_hamiltonian(params, M).entries
    return np.linalg.eigh(H)


def _joint_unitary(params: CavityParams, M: int, dt: float) -> np.ndarray:
    w, v = _joint_eig(params, M)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


@lru_cache(maxsize=32)
def _displacement(M: int, c: float) -> np.ndarray:
    """exp(c (b* - b)), the unitary e^{iV} of the shift isomorphism."""
    b, bd, _ = _ladder(M)
    g = 1j * (bd - b)  # Hermitian
    w, v = np.linalg.eigh(g)
    return (v * np.exp(-1j * c * w)) @ v.conj().T


def _atom_state(p: float) -> np.ndarray:
    return np.diag([p, 1.0 - p]).astype(complex)


def _check_dt(params: CavityParams, dt: float | None) -> float:
    if dt is None:
        return params.tau
    if not 0.0 < dt <= params.tau + 1e-15:
        raise ValueError(f"dt must lie in (0, tau], got {dt} with tau={params.tau}")
    return float(dt)


def _guarded(rho: np.ndarray) -> DensityMatrix:
    out = DensityMatrix.from_entries(rho)
    if out.tail_mass > TAIL_GUARD:
        raise TruncationOverflowError(
            f"tail mass {out.tail_mass:.3e} exceeds guard {TAIL_GUARD:.0e}; increase the cutoff"
        )
    return out


# ---------------------------------------------------------------------------
# ideal cavity
# ---------------------------------------------------------------------------

def ideal_step_pretrace(
    rho: DensityMatrix, params: CavityParams, M: int | None = None, dt: float | None = None
) -> DensityMatrix:
    """Joint cavity (x) atom state after evolving for dt, before the trace."""
    M = rho.dim - 1 if M is None else M
    if M != rho.dim - 1:
        raise ValueError(f"cutoff M={M} does not match state dimension {rho.dim}")
    dt = _check_dt(params, dt)
    U = _joint_unitary(params, M, dt)
    joint = np.kron(rho.entries, _atom_state(params.p))
    return DensityMatrix.from_entries(U @ joint @ U.conj().T)


def ideal_step_direct(
    rho: DensityMatrix, params: CavityParams, M: int | None = None, dt: float | None = None
) -> DensityMatrix:
    """One passage through the joint space: Tr_A[e^{-i dt H}(rho (x) rho_atom)e^{i dt H}]."""
    joint = ideal_step_pretrace(rho, params, M, dt)
    d = rho.dim
    cav = joint.entries.reshape(d, 2, d, 2).trace(axis1=1, axis2=3)
    return _guarded(cav)


def ideal_step_branches(
    rho: DensityMatrix, params: CavityParams, dt: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """(excited, ground) branch states of the shift-form map, each unit trace.

    The pre-trace joint state is p * excited (x) |e><e| + (1-p) * ground (x) |g><g|.
    """
    dt = _check_dt(params, dt)
    M = rho.dim - 1
    d = rho.dim
    phases = np.exp(-1j * params.eps * np.arange(d) * dt)
    D = _displacement(M, params.lam / params.eps)
    shifted = D @ rho.entries @ D.conj().T
    rotated = (phases[:, None] * shifted) * np.conj(phases)[None, :]
    excited = D.conj().T @ rotated @ D
    ground = (phases[:, None] * rho.entries) * np.conj(phases)[None, :]
    return excited, ground


def ideal_step_shift(rho: DensityMatrix, params: CavityParams) -> DensityMatrix:
    """One full tau step without the joint space (unitary-shift form)."""
    excited, ground = ideal_step_branches(rho, params, params.tau)
    return _guarded(params.p * excited + (1.0 - params.p) * ground)


# ---------------------------------------------------------------------------
# open cavity
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _open_driven_propagator(params: CavityParams, M: int, dt: float) -> RealPropagator:
    b, bd, _ = _ladder(M)
    c = params.lam / params.eps
    eye = np.eye(M + 1, dtype=complex)
    L = liouvillian_sparse(
        params.eps * (bd @ b),
        [(params.sigma_minus, b - c * eye), (params.sigma_plus, bd - c * eye)],
    )
    return RealPropagator(L, dt, M + 1)


@lru_cache(maxsize=8)
def _open_free_propagator(params: CavityParams, M: int, dt: float) -> DiagonalBlockPropagator:
    return DiagonalBlockPropagator(M + 1, params.eps, params.sigma_minus, params.sigma_plus, dt)


def open_step_branches(
    rho: DensityMatrix, params: CavityParams, dt: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """(excited, ground) branch states of the reduced open map after dt.

    excited = S^-1(e^{dt K_lam}(S rho)), ground = e^{dt K_0}(rho); the
    pre-trace joint state is p * excited (x) |e><e| + (1-p) * ground (x) |g><g|.
    """
    dt = _check_dt(params, dt)
    M = rho.dim - 1
    ground = _open_free_propagator(params, M, dt).apply(rho.entries)
    if params.lam == 0.0:
        # shift is the identity; both branches evolve freely
        return ground, ground
    D = _displacement(M, params.lam / params.eps)
    shifted = D @ rho.entries @ D.conj().T
    evolved = _open_driven_propagator(params, M, dt).apply(shifted)
    excited = D.conj().T @ evolved @ D
    return excited, ground


def open_step_reduced(
    rho: DensityMatrix, params: CavityParams, dt: float | None = None
) -> DensityMatrix:
    """One open-cavity step on the cavity alone (exact reduction, any sigma)."""
    excited, ground = open_step_branches(rho, params, dt)
    return _guarded(params.p * excited + (1.0 - params.p) * ground)


@lru_cache(maxsize=8)
def _open_joint_propagator(params: CavityParams, M: int, dt: float) -> np.ndarray:
    b, bd, _ = _ladder(M)
    eye_a = np.eye(2, dtype=complex)
    H = joint_hamiltonian(params, M).entries
    L = liouvillian_sparse(
        H,
        [(params.sigma_minus, np.kron(b, eye_a)), (params.sigma_plus, np.kron(bd, eye_a))],
    )
    return scipy.linalg.expm(dt * L.toarray())


def open_step_joint_pretrace(
    rho: DensityMatrix, params: CavityParams, M: int | None = None, dt: float | None = None
) -> DensityMatrix:
    """Joint state after dt under the full Lindblad generator (small M oracle)."""
    M = rho.dim - 1 if M is None else M
    if M != rho.dim - 1:
        raise ValueError(f"cutoff M={M} does not match state dimension {rho.dim}")
    if M > JOINT_CUTOFF_MAX:
        raise ValueError(f"joint-space route is limited to M <= {JOINT_CUTOFF_MAX}, got {M}")
    dt = _check_dt(params, dt)
    P = _open_joint_propagator(params, M, dt)
    joint = np.kron(rho.entries, _atom_state(params.p))
    out = (P @ joint.reshape(-1)).reshape(2 * rho.dim, 2 * rho.dim)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix.from_entries(out)


def open_step_joint(
    rho: DensityMatrix, params: CavityParams, M: int | None = None, dt: float | None = None
) -> DensityMatrix:
    """Cross-check oracle: exponential of the joint generator, then trace."""
    joint = open_step_joint_pretrace(rho, params, M, dt)
    d = rho.dim
    cav = joint.entries.reshape(d, 2, d, 2).trace(axis1=1, axis2=3)
    return _guarded(cav)


# ---------------------------------------------------------------------------
# joint observables
# ---------------------------------------------------------------------------

def interaction_expectation(
    excited_branch: np.ndarray, params: CavityParams
) -> float:
    """lam <(b*+b) (x) eta> on the pre-trace joint state, from the excited branch."""
    M = excited_branch.shape[0] - 1
    b, bd, _ = _ladder(M)
    val = params.lam * params.p * np.trace((bd + b) @ excited_branch)
    return float(val.real)


def joint_energy(joint: DensityMatrix, params: CavityParams) -> float:
    """<H_n> on a cavity (x) atom state."""
    M = joint.dim // 2 - 1
    H = joint_hamiltonian(params, M).entries
    return float(np.trace(H @ joint.entries).real)


# ---------------------------------------------------------------------------
# Heisenberg-picture closed forms
# ---------------------------------------------------------------------------

def _geometric_steps(n: int, delta: float, tau: float) -> float:
    """(1 - e^{-n delta tau}) / (1 - e^{-delta tau}), = n at delta = 0."""
    if delta == 0.0:
        return float(n)
    return float(np.expm1(-n * delta * tau) / np.expm1(-delta * tau))


def _pump_accumulation(n: int, params: CavityParams) -> float:
    """sigma_plus (1 - e^{-n delta tau}) / delta, = sigma_plus n tau at delta = 0."""
    delta, tau = params.rate_gap, params.tau
    if params.sigma_plus == 0.0:
        return 0.0
    if delta == 0.0:
        return params.sigma_plus * n * tau
    return -params.sigma_plus * np.expm1(-n * delta * tau) / delta


def dual_moments_ideal(obs: ObservablePoly, params: CavityParams, n: int) -> ObservablePoly:
    """n-step Heisenberg evolution of an affine observable, ideal cavity."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return obs
    eps, lam, tau, p = params.eps, params.lam, params.tau, params.p
    eplus = np.exp(1j * n * eps * tau)
    eminus = np.conj(eplus)
    g_plus = (lam / eps) * (1.0 - eplus)   # scalar shift acquired by b*
    g_minus = (lam / eps) * (1.0 - eminus)
    growth = (
        n * p * (1 - p) * (2 * lam**2 / eps**2) * (1 - np.cos(eps * tau))
        + p**2 * (2 * lam**2 / eps**2) * (1 - np.cos(n * eps * tau))
    )
    return ObservablePoly(
        c_number=obs.c_number,
        c_create=eplus * obs.c_create + obs.c_number * p * g_plus,
        c_annih=eminus * obs.c_annih + obs.c_number * p * g_minus,
        c_id=obs.c_id
        - p * g_plus * obs.c_create
        - p * g_minus * obs.c_annih
        + obs.c_number * growth,
    )


def _open_number_scalar(params: CavityParams, n: int) -> float:
    """Scalar picked up by b*b after n open steps (gauge-invariant part)."""
    p, lam, tau, eps = params.p, params.lam, params.tau, params.eps
    mu = params.mu
    delta = params.rate_gap
    amu2 = abs(mu) ** 2
    r = _geometric_steps(n, delta, tau)
    cos_step = 1 - np.exp(-delta * tau / 2) * np.cos(eps * tau)
    cos_n = 1 - np.exp(-n * delta * tau / 2) * np.cos(n * eps * tau)
    drive = (
        np.exp(-delta * tau)
        * (1 - np.exp(mu * tau))
        * (1 - np.exp(np.conj(mu) * tau))
    ).real
    return (
        p * lam**2 / amu2 * drive * r
        - p**2 * 2 * lam**2 / amu2 * r * cos_step
        + p**2 * 2 * lam**2 / amu2 * cos_n
        + _pump_accumulation(n, params)
    )


def dual_moments_open(obs: ObservablePoly, params: CavityParams, n: int) -> ObservablePoly:
    """n-step Heisenberg evolution of an affine observable, open cavity.

    Exact for any sigma_minus, sigma_plus >= 0; removable singularities at
    sigma_minus = sigma_plus are continued through their limits.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return obs
    p, lam, tau = params.p, params.lam, params.tau
    mu = params.mu
    mub = np.conj(mu)
    delta = params.rate_gap
    decay_n = np.exp(-n * delta * tau)
    e_mub = np.exp(-n * mub * tau)
    e_mu = np.exp(-n * mu * tau)
    # (L*)^n(b*) = e^{-n mub tau} b* + p (i lam / mub)(1 - e^{-n mub tau})
    # (L*)^n(b)  = e^{-n mu  tau} b  - p (i lam / mu )(1 - e^{-n mu  tau})
    shift_create = p * (1j * lam / mub) * (1.0 - e_mub)
    shift_annih = -p * (1j * lam / mu) * (1.0 - e_mu)
    # b*b picks up b* and b with the (e^{-n delta tau} - e^{-n mu(bar) tau}) weights
    from_n_create = p * (1j * lam / mu) * (decay_n - e_mub)
    from_n_annih = -p * (1j * lam / mub) * (decay_n - e_mu)
    return ObservablePoly(
        c_number=obs.c_number * decay_n,
        c_create=obs.c_create * e_mub + obs.c_number * from_n_create,
        c_annih=obs.c_annih * e_mu + obs.c_number * from_n_annih,
        c_id=obs.c_id
        + obs.c_create * shift_create
        + obs.c_annih * shift_annih
        + obs.c_number * _open_number_scalar(params, n),
    )


def one_step_transfer_matrix(params: CavityParams) -> np.ndarray:
    """Explicit 4x4 matrix of the one-step dual on (b*b, b*, b, 1) coefficients.

    Column convention: coefficient vectors transform as c -> T c.  Used as a
    cross-check oracle for the closed-form n-step composition.
    """
    cols = []
    for basis in (
        ObservablePoly.number(),
        ObservablePoly.creation(),
        ObservablePoly.annihilation(),
        ObservablePoly.identity(),
    ):
        out = dual_moments_open(basis, params, 1)
        cols.append([out.c_number, out.c_create, out.c_annih, out.c_id])
    return np.array(cols, dtype=complex).T


def weyl_product_factor(params: CavityParams, k: int | np.ndarray, zeta: complex) -> np.ndarray:
    """k-th factor p e^{h_k} + 1 - p of the dual Weyl product."""
    mu = params.mu
    mub = np.conj(mu)
    lam, tau, p = params.lam, params.tau, params.p
    h = (
        (lam / mu) * (1.0 - np.exp(-mu * tau)) * np.exp(-np.asarray(k) * mu * tau) * np.conj(zeta)
        - (lam / mub) * (1.0 - np.exp(-mub * tau)) * np.exp(-np.asarray(k) * mub * tau) * zeta
    ) / np.sqrt(2.0)
    return p * np.exp(h) + (1.0 - p)


_LOGSPACE_THRESHOLD = 10_000


def dual_weyl_open(zeta: complex, params: CavityParams, n: int) -> WeylEvolutionResult:
    """n-step dual action on the Weyl operator W(zeta), open cavity.

    scalar_factor is the Gaussian damping prefactor times the n-term beam
    product; evolved_zeta = e^{-n conj(mu) tau} zeta.  The sigma_minus =
    sigma_plus case is the analytic limit of the Gaussian exponent.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return WeylEvolutionResult(scalar_factor=1.0 + 0j, evolved_zeta=complex(zeta))
    delta, tau = params.rate_gap, params.tau
    sigsum = params.sigma_minus + params.sigma_plus
    if delta == 0.0:
        gauss = -abs(zeta) ** 2 / 4.0 * sigsum * n * tau
    else:
        gauss = abs(zeta) ** 2 / 4.0 * (sigsum / delta) * np.expm1(-n * delta * tau)
    ks = np.arange(n)
    factors = weyl_product_factor(params, ks, zeta)
    if n > _LOGSPACE_THRESHOLD:
        log_prod = np.sum(np.log(factors))
        scalar = np.exp(gauss + log_prod)
    else:
        scalar = np.exp(gauss) * np.prod(factors)
    evolved = np.exp(-n * np.conj(params.mu) * tau) * zeta
    return WeylEvolutionResult(scalar_factor=complex(scalar), evolved_zeta=complex(evolved))
