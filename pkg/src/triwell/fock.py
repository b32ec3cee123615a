"""N-boson, three-mode Fock space and sparse bilinear ladder operators.

The basis enumerates occupation triples (n1, n2, n3) with n1 + n2 + n3 = N
in lexicographic order on (n1, n2); n3 is implied.  All bilinears a_i^dag a_j
are realized as sparse matrices on this basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

MODES = (1, 2, 3)

_HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class FockBasis:
    """Ordered enumeration of the N-particle, 3-mode occupation triples."""

    total_particles: int
    states: np.ndarray                       # (dim, 3) integer occupations
    index_map: dict = field(repr=False)      # (n1, n2, n3) -> dense index

    @property
    def dimension(self) -> int:
        return self.states.shape[0]

    def index_of(self, occupations) -> int:
        return self.index_map[tuple(int(n) for n in occupations)]


def build_basis(n_particles: int) -> FockBasis:
    """Enumerate the N-boson sector; dimension is (N+1)(N+2)/2."""
    if n_particles < 0:
        raise ValueError(f"particle number must be non-negative, got {n_particles}")
    n = int(n_particles)
    triples = [(n1, n2, n - n1 - n2)
               for n1 in range(n + 1)
               for n2 in range(n - n1 + 1)]
    states = np.array(triples, dtype=np.int64).reshape(len(triples), 3)
    index_map = {t: i for i, t in enumerate(triples)}
    return FockBasis(n, states, index_map)


class SparseHermitianOperator:
    """Sparse Hermitian matrix on a fixed Fock sector.

    Stored as a full sparse matrix; the canonical serialization keeps only
    the upper triangle (row <= col), the lower triangle being implied by
    conjugate symmetry.
    """

    def __init__(self, matrix, check: bool = True):
        m = sp.csr_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        if check:
            defect = _hermiticity_defect(m)
            if defect > _HERMITICITY_TOL * max(1.0, _norm(m)):
                raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
        self.matrix = m

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_triangle_entries(cls, dimension: int, entries) -> "SparseHermitianOperator":
        """Build from (row, col, value) entries with row <= col.

        The conjugate of every strictly-upper entry is implied; duplicate
        (row, col) pairs are rejected.
        """
        rows, cols, vals = [], [], []
        seen = set()
        for r, c, v in entries:
            if r > c:
                raise ValueError(f"entry ({r}, {c}) below the diagonal")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry at ({r}, {c})")
            seen.add((r, c))
            rows.append(r)
            cols.append(c)
            vals.append(v)
            if r == c:
                if abs(complex(v).imag) > _HERMITICITY_TOL:
                    raise ValueError(f"diagonal entry at {r} is not real")
            else:
                rows.append(c)
                cols.append(r)
                vals.append(np.conj(v))
        m = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)),
                          shape=(dimension, dimension))
        return cls(m, check=False)

    def triangle_entries(self):
        """Yield the stored (row, col, value) entries with row <= col."""
        coo = self.matrix.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            if r <= c:
                yield int(r), int(c), complex(v)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, amplitudes: np.ndarray) -> float:
        """<psi|A|psi> for a state vector; real up to roundoff."""
        v = np.asarray(amplitudes)
        return float(np.real(np.vdot(v, self.matrix @ v)))

    def hermiticity_defect(self) -> float:
        return _hermiticity_defect(self.matrix)

    def __add__(self, other):
        return SparseHermitianOperator(self.matrix + other.matrix, check=False)

    def __sub__(self, other):
        return SparseHermitianOperator(self.matrix - other.matrix, check=False)

    def __mul__(self, scalar):
        if abs(complex(scalar).imag) > 0:
            raise ValueError("only real scalars preserve Hermiticity")
        return SparseHermitianOperator(self.matrix * float(np.real(scalar)),
                                       check=False)

    __rmul__ = __mul__


def _hermiticity_defect(m) -> float:
    d = m - m.conjugate().transpose()
    return 0.0 if d.nnz == 0 else float(np.max(np.abs(d.data)))


def _norm(m) -> float:
    return 0.0 if m.nnz == 0 else float(np.max(np.abs(m.data)))


def hop_operator(basis: FockBasis, i: int, j: int) -> sp.csr_matrix:
    """Matrix of a_i^dag a_j on the basis (one non-Hermitian part).

    <n'| a_i^dag a_j |n> = sqrt(n_j) sqrt(n_i + 1) for n' = n - e_j + e_i;
    i = j gives the diagonal number operator of mode i.
    """
    if i not in MODES or j not in MODES:
        raise ValueError(f"mode indices must be in {MODES}, got ({i}, {j})")
    dim = basis.dimension
    occ = basis.states
    if i == j:
        return sp.diags(occ[:, i - 1].astype(float), format="csr", dtype=complex)
    rows, cols, vals = [], [], []
    for col in range(dim):
        n = occ[col]
        nj = n[j - 1]
        if nj == 0:
            continue
        target = n.copy()
        target[j - 1] -= 1
        target[i - 1] += 1
        row = basis.index_of(target)
        rows.append(row)
        cols.append(col)
        vals.append(np.sqrt(nj * (n[i - 1] + 1.0)))
    return sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)),
                         shape=(dim, dim))


def number_operator(basis: FockBasis, i: int) -> sp.csr_matrix:
    return hop_operator(basis, i, i)
