"""Model parameters, su(3) generators and the three-mode Hamiltonian.

The Hamiltonian is built in two equivalent forms: directly from the bosonic
bilinears, and rewritten through the eight su(3) generators.  The two differ
by an N-dependent multiple of the identity (the generator rewrite drops the
scalar kappa*(N^2/3 - N) term); ``verify_equivalence`` measures that shift.

Note on the generator definitions: the hopping combinations are taken in
their Hermitian form, P_k = a_k^dag a_j + a_j^dag a_k and
J_k = i (a_k^dag a_j - a_j^dag a_k) with j = ((k+1) mod 3) + 1, i.e. mode
pairs (1,3), (2,1), (3,2).  These are the unique Hermitian bilinears
consistent with the generator form of the Hamiltonian and with the
coherent-state purity normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fock import FockBasis, SparseHermitianOperator, build_basis, hop_operator


class ModelConsistencyError(RuntimeError):
    """The two Hamiltonian forms do not agree up to an identity shift."""


@dataclass(frozen=True)
class ModelParams:
    """Physical couplings of the triple-well model.

    omega: tunneling rate; kappa: self-collision; lam: cross-collision;
    n_particles: total boson number.  The reduced parameters chi, mu and the
    effective tunneling rate are derived.
    """

    omega: float
    kappa: float
    lam: float
    n_particles: int

    def __post_init__(self):
        if self.n_particles < 0:
            raise ValueError("particle number must be non-negative")

    @property
    def omega_eff(self) -> float:
        return self.omega + 2.0 * self.lam * (self.n_particles - 1)

    @property
    def chi(self) -> float:
        self._require_reducible()
        return self.kappa * (self.n_particles - 1) / self.omega

    @property
    def mu(self) -> float:
        self._require_reducible()
        return self.lam * (self.n_particles - 1) / self.omega

    def _require_reducible(self):
        if self.omega == 0.0:
            raise ValueError("reduced parameters are undefined for omega = 0")
        if self.n_particles < 1:
            raise ValueError("reduced parameters require at least one particle")

    @classmethod
    def from_reduced(cls, omega: float, chi: float, mu: float,
                     n_particles: int) -> "ModelParams":
        """Invert chi = kappa (N-1)/omega, mu = lam (N-1)/omega."""
        if omega == 0.0:
            raise ValueError("reduced parameters are undefined for omega = 0")
        if n_particles < 2:
            if chi == 0.0 and mu == 0.0:
                return cls(omega, 0.0, 0.0, n_particles)
            raise ValueError("nonzero chi or mu requires N >= 2")
        scale = omega / (n_particles - 1)
        return cls(omega, chi * scale, mu * scale, n_particles)


@dataclass(frozen=True)
class GeneratorSet:
    """The eight su(3) generators on a fixed N-particle sector."""

    q1: SparseHermitianOperator
    q2: SparseHermitianOperator
    p1: SparseHermitianOperator
    p2: SparseHermitianOperator
    p3: SparseHermitianOperator
    j1: SparseHermitianOperator
    j2: SparseHermitianOperator
    j3: SparseHermitianOperator

    def as_list(self):
        return [self.q1, self.q2, self.p1, self.p2, self.p3,
                self.j1, self.j2, self.j3]


def partner_mode(k: int) -> int:
    """Mode pairing j(k) = ((k+1) mod 3) + 1: (1,3), (2,1), (3,2)."""
    return ((k + 1) % 3) + 1


def generators(basis: FockBasis) -> GeneratorSet:
    """Build Q1, Q2, P1..P3, J1..J3 as sparse Hermitian matrices."""
    n_op = {i: hop_operator(basis, i, i) for i in (1, 2, 3)}
    q1 = 0.5 * (n_op[1] - n_op[2])
    q2 = (n_op[1] + n_op[2] - 2.0 * n_op[3]) / 3.0
    ps, js = [], []
    for k in (1, 2, 3):
        j = partner_mode(k)
        up = hop_operator(basis, k, j)
        dn = hop_operator(basis, j, k)
        ps.append(up + dn)
        js.append(1j * (up - dn))
    return GeneratorSet(
        q1=SparseHermitianOperator(q1),
        q2=SparseHermitianOperator(q2),
        p1=SparseHermitianOperator(ps[0]),
        p2=SparseHermitianOperator(ps[1]),
        p3=SparseHermitianOperator(ps[2]),
        j1=SparseHermitianOperator(js[0]),
        j2=SparseHermitianOperator(js[1]),
        j3=SparseHermitianOperator(js[2]),
    )


def hamiltonian_terms(basis: FockBasis):
    """Parameter-independent pieces of the direct Hamiltonian.

    Returns (T, K, V) with H = omega_eff*T + kappa*K - 2*lam*V, where
    T = sum_{i!=j} a_i^dag a_j, K = sum_i a_i^dag2 a_i^2 and
    V = sum over distinct (i,j,k) of n_i a_j^dag a_k.
    """
    modes = (1, 2, 3)
    n_op = {i: hop_operator(basis, i, i) for i in modes}
    hop = {(i, j): hop_operator(basis, i, j)
           for i in modes for j in modes if i != j}
    dim = basis.dimension
    T = sp.csr_matrix((dim, dim), dtype=complex)
    V = sp.csr_matrix((dim, dim), dtype=complex)
    for i, j in hop:
        T = T + hop[(i, j)]
    occ = basis.states.astype(float)
    K = sp.diags(np.sum(occ * (occ - 1.0), axis=1), format="csr", dtype=complex)
    for i in modes:
        for j in modes:
            for k in modes:
                if len({i, j, k}) == 3:
                    V = V + n_op[i] @ hop[(j, k)]
    return T.tocsr(), K, V.tocsr()


def hamiltonian_direct(basis: FockBasis,
                       params: ModelParams) -> SparseHermitianOperator:
    """The Hamiltonian from bosonic bilinears (canonical form)."""
    T, K, V = hamiltonian_terms(basis)
    m = params.omega_eff * T + params.kappa * K - 2.0 * params.lam * V
    return SparseHermitianOperator(m)


def hamiltonian_generators(basis: FockBasis,
                           params: ModelParams) -> SparseHermitianOperator:
    """The Hamiltonian rewritten through the su(3) generators."""
    g = generators(basis)
    q1, q2 = g.q1.matrix, g.q2.matrix
    p1, p2, p3 = g.p1.matrix, g.p2.matrix, g.p3.matrix
    n = params.n_particles
    lin = (params.omega_eff - 2.0 * params.lam * n / 3.0) * (p1 + p2 + p3)
    quad = 0.5 * params.kappa * (4.0 * (q1 @ q1) + 3.0 * (q2 @ q2))
    cross = params.lam * (2.0 * q1 @ (p1 - p3) + q2 @ (2.0 * p2 - p1 - p3))
    return SparseHermitianOperator(lin + quad + cross)


def verify_equivalence(basis: FockBasis, params: ModelParams,
                       tol: float = 1e-10) -> float:
    """Return c with H_direct - H_generators = c * Identity.

    Raises ModelConsistencyError if the difference is not proportional to
    the identity within tol relative to the matrix norm (a generator
    definition bug).  Analytically c = kappa * (N^2/3 - N).
    """
    hd = hamiltonian_direct(basis, params).matrix
    hg = hamiltonian_generators(basis, params).matrix
    diff = (hd - hg).toarray()
    c = float(np.real(np.trace(diff))) / basis.dimension
    residual = diff - c * np.eye(basis.dimension)
    scale = max(1.0, float(np.max(np.abs(hd.toarray()))))
    worst = float(np.max(np.abs(residual)))
    if worst > tol * scale:
        raise ModelConsistencyError(
            f"difference is not a scalar shift (residual {worst:.3e}, "
            f"scale {scale:.3e})")
    return c


@dataclass(frozen=True)
class ModelContext:
    """Cached per-N operator machinery shared by scans and solvers."""

    basis: FockBasis
    tunneling: sp.csr_matrix
    self_collision: sp.csr_matrix
    cross_collision: sp.csr_matrix
    gens: GeneratorSet

    def hamiltonian(self, params: ModelParams) -> SparseHermitianOperator:
        if params.n_particles != self.basis.total_particles:
            raise ValueError("parameter N does not match cached context")
        m = (params.omega_eff * self.tunneling
             + params.kappa * self.self_collision
             - 2.0 * params.lam * self.cross_collision)
        return SparseHermitianOperator(m, check=False)


@lru_cache(maxsize=None)
def model_context(n_particles: int) -> ModelContext:
    basis = build_basis(n_particles)
    T, K, V = hamiltonian_terms(basis)
    return ModelContext(basis, T, K, V, generators(basis))
