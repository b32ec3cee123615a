"""Hermitian eigensolver facade for ground states and low-lying spectra.

Dense LAPACK is used up to dimension 2000 (N = 60 gives dimension 1891);
above that a restarted Krylov solve with a fixed starting vector keeps
results deterministic.  A dense fallback guards against Krylov
misconvergence on near-degenerate clusters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

from .algebra import ModelParams, model_context
from .coherent import QuantumState
from .fock import SparseHermitianOperator

DENSE_LIMIT = 2000
_RESIDUAL_FACTOR = 1e-10


class SolverError(RuntimeError):
    """Eigensolver failed to converge; carries diagnostic detail."""


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray          # ascending
    states: list                     # QuantumState, same order
    residuals: np.ndarray            # per-pair ||Hv - Ev||


def eigensolve_lowest(operator: SparseHermitianOperator, k: int,
                      basis=None) -> SpectrumResult:
    """k lowest eigenpairs with phase-fixed, orthonormal eigenvectors."""
    dim = operator.dimension
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in 1..{dim}, got {k}")
    m = operator.matrix
    if dim <= DENSE_LIMIT or k > dim // 4:
        vals, vecs = la.eigh(m.toarray(), subset_by_index=[0, k - 1])
    else:
        vals, vecs = _krylov_lowest(m, k)
    vecs = np.ascontiguousarray(vecs[:, np.argsort(vals)])
    vals = np.sort(vals)
    vecs = _fix_phases(vecs)
    residuals = np.linalg.norm(m @ vecs - vecs * vals[None, :], axis=0)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.any(residuals > _RESIDUAL_FACTOR * scale):
        # Krylov result did not meet the residual invariant; redo densely.
        vals, vecs = la.eigh(m.toarray(), subset_by_index=[0, k - 1])
        vecs = _fix_phases(vecs)
        residuals = np.linalg.norm(m @ vecs - vecs * vals[None, :], axis=0)
        if np.any(residuals > _RESIDUAL_FACTOR * scale):
            raise SolverError(
                f"residuals {residuals} exceed {_RESIDUAL_FACTOR:g} * {scale:g}")
    states = [_wrap_state(vecs[:, i], basis) for i in range(k)]
    return SpectrumResult(vals, states, residuals)


def _krylov_lowest(m, k):
    v0 = np.ones(m.shape[0]) / np.sqrt(m.shape[0])
    try:
        vals, vecs = spla.eigsh(m, k=k, which="SA", v0=v0,
                                ncv=min(m.shape[0], max(4 * k + 20, 40)))
    except spla.ArpackNoConvergence as exc:
        raise SolverError(
            f"ARPACK did not converge: {len(exc.eigenvalues)} of {k} pairs "
            f"found") from exc
    return vals, vecs


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude of each vector real positive."""
    out = np.array(vecs, dtype=complex)
    for i in range(out.shape[1]):
        pivot = int(np.argmax(np.abs(out[:, i])))
        z = out[pivot, i]
        out[:, i] *= np.conj(z) / abs(z)
        out[:, i] /= np.linalg.norm(out[:, i])
    return out


def _wrap_state(vec, basis):
    if basis is None:
        return vec
    return QuantumState(basis, vec)


def degenerate_clusters(eigenvalues: np.ndarray,
                        rel_tol: float = 1e-9) -> list:
    """Group indices of eigenvalues closer than rel_tol * spectral scale."""
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    clusters, current = [], [0]
    for i in range(1, len(eigenvalues)):
        if abs(eigenvalues[i] - eigenvalues[i - 1]) < rel_tol * scale:
            current.append(i)
        else:
            clusters.append(current)
            current = [i]
    clusters.append(current)
    return clusters


def spectrum(params: ModelParams, k: int) -> SpectrumResult:
    """k lowest eigenpairs of the model Hamiltonian at the given parameters."""
    ctx = model_context(params.n_particles)
    return eigensolve_lowest(ctx.hamiltonian(params), k, basis=ctx.basis)


def ground_state(params: ModelParams):
    """Lowest eigenpair; returns (energy, QuantumState)."""
    result = spectrum(params, 1)
    return float(result.eigenvalues[0]), result.states[0]
