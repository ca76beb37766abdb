"""Truncated Fock-space operators, parameters and initial states.

Everything downstream works on a photon cavity truncated to Fock levels
0..M (dimension M+1), optionally tensored with one two-level atom whose
basis is ordered (excited, ground), so the atomic projector is
eta = diag(1, 0).  All matrices are dense complex numpy arrays wrapped in
light containers that carry dimension and validity checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.special

__all__ = [
    "CavityParams",
    "TruncatedOperator",
    "DensityMatrix",
    "InitialStateSpec",
    "ModelError",
    "StrictDampingError",
    "TruncationOverflowError",
    "ladder_operators",
    "weyl_operator",
    "unitarity_defect",
    "initial_state",
    "kron",
    "matrix_exponential",
    "partial_trace_atom",
    "DEFAULT_CUTOFF",
    "TAIL_GUARD",
]

#: default Fock cutoff; channels abort when the top-4-level occupancy of a
#: produced state exceeds TAIL_GUARD
DEFAULT_CUTOFF = 48
TAIL_GUARD = 1e-8

_HERMITIAN_TOL = 1e-12
_TRACE_TOL = 1e-10
_MIN_EIG_TOL = -1e-9


class ModelError(Exception):
    """Base class for model-level failures."""


class StrictDampingError(ModelError):
    """Raised when an operation requires sigma_minus > sigma_plus."""


class TruncationOverflowError(ModelError):
    """Raised when a state cannot be represented at the requested cutoff."""


@dataclass(frozen=True)
class CavityParams:
    """Physical constants of the cavity-beam model.

    eps         cavity mode energy (> 0)
    lam         cavity-atom coupling
    tau         passage time of one atom (> 0)
    p           probability that a beam atom is excited, in [0, 1]
    sigma_minus photon leaking rate (>= 0)
    sigma_plus  environmental pumping rate (>= 0)
    atom_energy two-level splitting E; carried along but it never enters
                the cavity dynamics (the atom state commutes with H)
    """

    eps: float
    lam: float
    tau: float
    p: float
    sigma_minus: float = 0.0
    sigma_plus: float = 0.0
    atom_energy: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.sigma_minus < 0 or self.sigma_plus < 0:
            raise ValueError("sigma_minus and sigma_plus must be >= 0")
        if self.atom_energy < 0:
            raise ValueError("atom_energy must be >= 0")

    @property
    def mu(self) -> complex:
        """mu = i*eps + (sigma_minus - sigma_plus)/2, recomputed on access."""
        return 1j * self.eps + (self.sigma_minus - self.sigma_plus) / 2.0

    @property
    def rate_gap(self) -> float:
        """sigma_minus - sigma_plus (may be negative or zero)."""
        return self.sigma_minus - self.sigma_plus

    def require_strict_damping(self, what: str) -> None:
        if not self.sigma_minus > self.sigma_plus:
            raise StrictDampingError(
                f"{what} requires sigma_minus > sigma_plus "
                f"(got sigma_minus={self.sigma_minus}, sigma_plus={self.sigma_plus})"
            )


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense complex square matrix on a truncated space."""

    dim: int
    entries: np.ndarray = field(repr=False)
    hermitian_hint: bool = False

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape != (self.dim, self.dim):
            raise ValueError(f"entries must be a {self.dim}x{self.dim} matrix, got {a.shape}")
        object.__setattr__(self, "entries", a)
        if self.hermitian_hint:
            defect = np.abs(a - a.conj().T).max()
            if defect >= _HERMITIAN_TOL:
                raise ValueError(f"hermitian_hint set but max |A - A^dag| = {defect:.3e}")

    @classmethod
    def wrap(cls, entries: np.ndarray, hermitian_hint: bool = False) -> "TruncatedOperator":
        entries = np.asarray(entries, dtype=complex)
        return cls(dim=entries.shape[0], entries=entries, hermitian_hint=hermitian_hint)


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace Hermitian PSD operator plus its truncation-tail diagnostic.

    tail_mass is the occupancy of the top 4 Fock levels (or top 4 basis
    states of a joint space); it is recorded at construction so every
    channel application leaves an auditable trail.
    """

    op: TruncatedOperator
    tail_mass: float

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @classmethod
    def from_entries(cls, entries: np.ndarray, check: bool = True) -> "DensityMatrix":
        a = np.asarray(entries, dtype=complex)
        if check:
            tr = np.trace(a)
            if abs(tr - 1.0) >= _TRACE_TOL:
                raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
            herm = np.abs(a - a.conj().T).max()
            if herm >= _HERMITIAN_TOL * 10:
                raise ValueError(f"not Hermitian: max |A - A^dag| = {herm:.3e}")
            a = 0.5 * (a + a.conj().T)
            lo = scipy.linalg.eigvalsh(a, subset_by_index=[0, 0])[0]
            if lo < _MIN_EIG_TOL:
                raise ValueError(f"minimum eigenvalue {lo:.3e} below truncation allowance")
        tail = float(np.real(np.diag(a)[-4:].sum()))
        op = TruncatedOperator(dim=a.shape[0], entries=a, hermitian_hint=True)
        return cls(op=op, tail_mass=tail)

    def expectation(self, observable: np.ndarray | TruncatedOperator) -> complex:
        obs = observable.entries if isinstance(observable, TruncatedOperator) else observable
        return complex(np.trace(obs @ self.entries))


@dataclass(frozen=True)
class InitialStateSpec:
    """Initial cavity state request: vacuum, gibbs(beta), coherent(r, phi) or custom."""

    kind: str
    beta: float | None = None
    r: float | None = None
    phi: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def vacuum(cls) -> "InitialStateSpec":
        return cls(kind="vacuum")

    @classmethod
    def gibbs(cls, beta: float) -> "InitialStateSpec":
        if not beta > 0:
            raise ValueError(f"gibbs beta must be > 0, got {beta}")
        return cls(kind="gibbs", beta=beta)

    @classmethod
    def coherent(cls, r: float, phi: float) -> "InitialStateSpec":
        if r < 0:
            raise ValueError(f"coherent r must be >= 0, got {r}")
        return cls(kind="coherent", r=r, phi=phi)

    @classmethod
    def custom(cls, matrix: np.ndarray) -> "InitialStateSpec":
        return cls(kind="custom", matrix=np.asarray(matrix, dtype=complex))

    @classmethod
    def parse(cls, text: str) -> "InitialStateSpec":
        """Parse 'vacuum', 'gibbs:<beta>' or 'coherent:<r>,<phi>'."""
        if text == "vacuum":
            return cls.vacuum()
        if text.startswith("gibbs:"):
            return cls.gibbs(float(text.split(":", 1)[1]))
        if text.startswith("coherent:"):
            r_s, phi_s = text.split(":", 1)[1].split(",")
            return cls.coherent(float(r_s), float(phi_s))
        raise ValueError(f"unrecognized initial state {text!r}")


@lru_cache(maxsize=None)
def _ladder(M: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    b = np.diag(np.sqrt(np.arange(1, M + 1, dtype=float)), 1).astype(complex)
    bd = b.conj().T
    return b, bd, bd @ b


def ladder_operators(M: int) -> tuple[TruncatedOperator, TruncatedOperator, TruncatedOperator]:
    """Annihilation, creation and number operators at cutoff M.

    b has sqrt(k) at (k-1, k); the commutator [b, b^dag] equals the
    identity except for the -M corner defect inherent to truncation.
    """
    if M < 1:
        raise ValueError(f"cutoff M must be >= 1, got {M}")
    b, bd, n = _ladder(M)
    return (
        TruncatedOperator.wrap(b),
        TruncatedOperator.wrap(bd),
        TruncatedOperator.wrap(n, hermitian_hint=True),
    )


def weyl_operator(zeta: complex, M: int) -> TruncatedOperator:
    """Weyl operator W(zeta) = exp(i(conj(zeta) b + zeta b*)/sqrt(2)).

    Built from the Hermitian eigendecomposition of the generator, so the
    result is exactly the exponential of the truncated generator; the
    truncation shows up as a unitarity defect near the top levels
    (see unitarity_defect).
    """
    if M < 1:
        raise ValueError(f"cutoff M must be >= 1, got {M}")
    b, bd, _ = _ladder(M)
    gen = (np.conj(zeta) * b + zeta * bd) / np.sqrt(2.0)
    w, v = np.linalg.eigh(gen)
    mat = (v * np.exp(1j * w)) @ v.conj().T
    return TruncatedOperator.wrap(mat)


def unitarity_defect(op: TruncatedOperator, levels: int | None = None) -> float:
    """max |W^dag W - 1| entry, restricted to the lowest `levels` rows/cols."""
    d = op.entries.conj().T @ op.entries - np.eye(op.dim)
    if levels is not None:
        d = d[:levels, :levels]
    return float(np.abs(d).max())


def kron(a: TruncatedOperator, b: TruncatedOperator) -> TruncatedOperator:
    """Kronecker product; dim = dim(a) * dim(b), row-major a (x) b ordering."""
    return TruncatedOperator.wrap(
        np.kron(a.entries, b.entries),
        hermitian_hint=a.hermitian_hint and b.hermitian_hint,
    )


def matrix_exponential(a: TruncatedOperator) -> TruncatedOperator:
    """exp(A) of a truncated operator.

    Hermitian-hinted inputs go through an eigendecomposition (spectral
    reconstruction); general inputs use scipy's scaling-and-squaring
    diagonal Pade approximant, which is backward-error controlled well
    below 1e-13.
    """
    if not np.all(np.isfinite(a.entries)):
        raise ValueError("matrix_exponential requires finite entries")
    if a.hermitian_hint:
        w, v = np.linalg.eigh(a.entries)
        return TruncatedOperator.wrap((v * np.exp(w)) @ v.conj().T, hermitian_hint=True)
    return TruncatedOperator.wrap(scipy.linalg.expm(a.entries))


def partial_trace_atom(joint: DensityMatrix) -> DensityMatrix:
    """Trace out the two-level atom of a cavity (x) atom state.

    The joint dimension must be even; ordering is row-major cavity (x)
    atom, so the atom index is the fast one.  Trace is preserved exactly
    (pure index reorganization).
    """
    d2 = joint.dim
    if d2 % 2 != 0:
        raise ValueError(f"joint dimension {d2} is odd; expected cavity (x) atom")
    d = d2 // 2
    cav = joint.entries.reshape(d, 2, d, 2).trace(axis1=1, axis2=3)
    return DensityMatrix.from_entries(cav)


def _gibbs_diagonal(beta: float, eps: float, M: int) -> np.ndarray:
    x = np.exp(-beta * eps)
    # discarded mass fraction of the untruncated state is x^(M+1)
    if x ** (M + 1) >= 1e-12:
        raise TruncationOverflowError(
            f"gibbs(beta={beta}) at cutoff M={M} leaves tail {x ** (M + 1):.3e} >= 1e-12; "
            "increase M or beta*eps"
        )
    w = x ** np.arange(M + 1)
    return w / w.sum()

def initial_state(spec: InitialStateSpec, params: CavityParams, M: int) -> DensityMatrix:
    """Build the requested initial cavity state at cutoff M.

    gibbs follows the diagonal exp(-beta eps b*b) form (renormalized after
    truncation); coherent is the displaced vacuum with first moment
    r e^{i phi}; custom matrices are validated like any density matrix.
    """
    if M < 1:
        raise ValueError(f"cutoff M must be >= 1, got {M}")
    d = M + 1
    if spec.kind == "vacuum":
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
    elif spec.kind == "gibbs":
        rho = np.diag(_gibbs_diagonal(spec.beta, params.eps, M)).astype(complex)
    elif spec.kind == "coherent":
        alpha = spec.r * np.exp(1j * spec.phi)
        # Poisson amplitudes; tail guard on the discarded probability mass
        k = np.arange(d)
        logw = k * np.log(abs(alpha)) - 0.5 * scipy.special.gammaln(k + 1) if abs(alpha) > 0 else np.where(k == 0, 0.0, -np.inf)
        amp = np.exp(logw - abs(alpha) ** 2 / 2.0) * np.exp(1j * spec.phi * k)
        discarded = 1.0 - float(np.sum(np.abs(amp) ** 2))
        if discarded >= 1e-12:
            raise TruncationOverflowError(
                f"coherent(r={spec.r}) at cutoff M={M} leaves tail {discarded:.3e} >= 1e-12"
            )
        amp = amp / np.linalg.norm(amp)
        rho = np.outer(amp, amp.conj())
    elif spec.kind == "custom":
        if spec.matrix.shape != (d, d):
            raise ValueError(f"custom matrix has shape {spec.matrix.shape}, expected {(d, d)}")
        rho = spec.matrix
    else:
        raise ValueError(f"unknown initial state kind {spec.kind!r}")
    return DensityMatrix.from_entries(rho)
