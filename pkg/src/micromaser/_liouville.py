"""Dense propagators for vectorized Lindblad generators.

Two representations are used:

* a real one: density matrices are expanded in an orthonormal basis of
  Hermitian matrices, where any Hermiticity-preserving superoperator has a
  real matrix.  exp() of a real matrix is ~4x cheaper than the complex
  vectorization and the propagated state stays exactly Hermitian.

* a per-diagonal one for generators that commute with the photon-number
  phase (no drive): every Fock diagonal j-k = const evolves independently
  under a small real tridiagonal block times a pure phase.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse


def hermitian_basis(d: int) -> scipy.sparse.csr_matrix:
    """Isometry Q mapping real coordinates to vec(rho) for Hermitian rho.

    Columns are vec() of: |j><j| for each j, then (|j><k|+|k><j|)/sqrt2 and
    i(|j><k|-|k><j|)/sqrt2 for each j < k.  Q^dag Q = 1.
    """
    rows, cols, vals = [], [], []
    col = 0
    s = 1.0 / np.sqrt(2.0)
    for j in range(d):
        rows.append(j * d + j)
        cols.append(col)
        vals.append(1.0 + 0j)
        col += 1
    for j in range(d):
        for k in range(j + 1, d):
            rows += [j * d + k, k * d + j]
            cols += [col, col]
            vals += [s, s]
            col += 1
            rows += [j * d + k, k * d + j]
            cols += [col, col]
            vals += [1j * s, -1j * s]
            col += 1
    return scipy.sparse.csr_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)), shape=(d * d, d * d)
    )


def liouvillian_sparse(
    hamiltonian: np.ndarray,
    jumps: list[tuple[float, np.ndarray]],
) -> scipy.sparse.csr_matrix:
    """Vectorized generator -i[H, .] + sum_r r (V . V^dag - {V^dag V, .}/2).

    Acts on vec(rho) with row-major flattening: vec(A rho B) =
    (A kron B^T) vec(rho).
    """
    d = hamiltonian.shape[0]
    eye = scipy.sparse.identity(d, dtype=complex, format="csr")
    H = scipy.sparse.csr_matrix(hamiltonian)
    L = -1j * (scipy.sparse.kron(H, eye) - scipy.sparse.kron(eye, H.T))
    for rate, V in jumps:
        if rate == 0.0:
            continue
        Vs = scipy.sparse.csr_matrix(V)
        VdV = (Vs.getH() @ Vs).tocsr()
        L = L + rate * (
            scipy.sparse.kron(Vs, Vs.conj())
            - 0.5 * (scipy.sparse.kron(VdV, eye) + scipy.sparse.kron(eye, VdV.T))
        )
    return L.tocsr()


class RealPropagator:
    """exp(t L) in the Hermitian-matrix basis, applied to density matrices."""

    def __init__(self, liouvillian: scipy.sparse.csr_matrix, t: float, d: int):
        self.d = d
        self.basis = hermitian_basis(d)
        gen = (self.basis.getH() @ (liouvillian @ self.basis)).toarray()
        imag_leak = np.abs(gen.imag).max() if gen.size else 0.0
        if imag_leak > 1e-10:
            raise ValueError(f"generator is not Hermiticity-preserving (leak {imag_leak:.3e})")
        self.matrix = scipy.linalg.expm(t * gen.real)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        x = (self.basis.getH() @ rho.reshape(-1)).real
        return (self.basis @ (self.matrix @ x)).reshape(self.d, self.d)


class DiagonalBlockPropagator:
    """exp(t L) for a generator preserving Fock diagonals (no drive).

    Requires a diagonal Hamiltonian eps*b*b and jump operators b (rate
    sigma_minus) and b* (rate sigma_plus).  Diagonal s >= 0 (elements
    rho[m, m+s]) evolves as e^{i eps s t} expm(t G_s) with G_s real
    tridiagonal; lower diagonals follow by Hermiticity.
    """

    def __init__(self, d: int, eps: float, sigma_minus: float, sigma_plus: float, t: float):
        self.d = d
        self.phases = np.exp(1j * eps * np.arange(d) * t)
        self.blocks = []
        for s in range(d):
            n = d - s
            m = np.arange(n, dtype=float)
            diag = -0.5 * sigma_minus * (2 * m + s) - 0.5 * sigma_plus * (2 * m + s + 2)
            up = sigma_minus * np.sqrt((m[:-1] + 1) * (m[:-1] + s + 1))
            dn = sigma_plus * np.sqrt((m[1:]) * (m[1:] + s))
            G = np.diag(diag) + np.diag(up, 1) + np.diag(dn, -1)
            self.blocks.append(scipy.linalg.expm(t * G))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for s in range(self.d):
            v = np.diagonal(rho, offset=s)
            w = self.phases[s] * (self.blocks[s] @ v)
            idx = np.arange(self.d - s)
            out[idx, idx + s] = w
            if s > 0:
                out[idx + s, idx] = np.conj(w)
        return out
