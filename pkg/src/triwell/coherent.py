"""SU(3) coherent states and their closed-form expectation values.

A coherent point is the complex pair (w1, w2) with the third amplitude gauge
fixed to 1.  Fock amplitudes use log-gamma accumulation so particle numbers
of several hundred stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import FockBasis, hop_operator


@dataclass(frozen=True)
class CoherentPoint:
    """Point (w1, w2) of the coherent-state manifold, w3 = 1 gauge."""

    w1: complex
    w2: complex

    @property
    def d(self) -> float:
        """Normalization denominator |w1|^2 + |w2|^2 + 1."""
        return abs(self.w1) ** 2 + abs(self.w2) ** 2 + 1.0

    def amplitudes3(self) -> np.ndarray:
        return np.array([self.w1, self.w2, 1.0], dtype=complex)

    def to_canonical(self, n_particles: int):
        """Chart (I1, I2, phi1, phi2): w_j = sqrt(I_j/(N-I1-I2)) e^{-i phi_j}."""
        d = self.d
        i1 = n_particles * abs(self.w1) ** 2 / d
        i2 = n_particles * abs(self.w2) ** 2 / d
        phi1 = -np.angle(self.w1) if self.w1 != 0 else 0.0
        phi2 = -np.angle(self.w2) if self.w2 != 0 else 0.0
        return i1, i2, phi1, phi2

    @classmethod
    def from_canonical(cls, i1: float, i2: float, phi1: float, phi2: float,
                       n_particles: int) -> "CoherentPoint":
        i3 = n_particles - i1 - i2
        if i3 <= 0 or i1 < 0 or i2 < 0:
            raise ValueError("canonical chart requires 0 <= I1, I2 and "
                             "I1 + I2 < N")
        w1 = np.sqrt(i1 / i3) * np.exp(-1j * phi1)
        w2 = np.sqrt(i2 / i3) * np.exp(-1j * phi2)
        return cls(complex(w1), complex(w2))


@dataclass(frozen=True)
class QuantumState:
    """Normalized amplitude vector over a Fock basis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.basis.dimension,):
            raise ValueError("amplitude vector does not match basis dimension")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def log_multinomial(n: int, occ: np.ndarray) -> np.ndarray:
    """ln( N! / (n1! n2! n3!) ) per basis state, via log-gamma."""
    return gammaln(n + 1.0) - np.sum(gammaln(occ + 1.0), axis=1)


def coherent_state(basis: FockBasis, point: CoherentPoint) -> QuantumState:
    """Fock expansion C sqrt(N!/(n1! n2! n3!)) w1^n1 w2^n2, C = D^{-N/2}."""
    n = basis.total_particles
    occ = basis.states
    logmult = log_multinomial(n, occ)
    w = (point.w1, point.w2)
    log_mag = 0.5 * logmult - 0.5 * n * np.log(point.d)
    phase = np.zeros(basis.dimension)
    alive = np.ones(basis.dimension, dtype=bool)
    for j, wj in enumerate(w):
        nj = occ[:, j]
        if wj == 0:
            alive &= (nj == 0)
        else:
            log_mag = log_mag + nj * np.log(abs(wj))
            phase = phase + nj * np.angle(wj)
    amps = np.where(alive, np.exp(log_mag) * np.exp(1j * phase), 0.0)
    return QuantumState(basis, amps)


def product_form_check(basis: FockBasis, point: CoherentPoint) -> float:
    """Fidelity between the Fock expansion and (a_w^dag)^N |0> / sqrt(N!).

    The product form is built by repeated application of the collective
    creation operator a_w^dag = (w1 a1^dag + w2 a2^dag + a3^dag)/sqrt(D)
    across the particle-number sectors.
    """
    from .fock import build_basis

    n = basis.total_particles
    coeff = point.amplitudes3() / np.sqrt(point.d)
    current_basis = build_basis(0)
    vec = np.ones(1, dtype=complex)
    for m in range(n):
        next_basis = build_basis(m + 1)
        out = np.zeros(next_basis.dimension, dtype=complex)
        for idx in range(current_basis.dimension):
            occ = current_basis.states[idx]
            for mode in range(3):
                target = occ.copy()
                target[mode] += 1
                out[next_basis.index_of(target)] += (
                    coeff[mode] * np.sqrt(target[mode]) * vec[idx])
        current_basis, vec = next_basis, out
    vec /= np.sqrt(np.exp(gammaln(n + 1.0)))  # divide by sqrt(N!)
    reference = coherent_state(basis, point).amplitudes
    return float(abs(np.vdot(vec, reference)) ** 2)


def expectation_hop_closed_form(point: CoherentPoint, n_particles: int,
                                i: int, j: int) -> complex:
    """<a_i^dag a_j> on |N; w> = N conj(w_i) w_j / D."""
    w = point.amplitudes3()
    _check_modes(i, j)
    return n_particles * np.conj(w[i - 1]) * w[j - 1] / point.d


def expectation_self_collision_closed_form(point: CoherentPoint,
                                           n_particles: int, i: int) -> float:
    """<a_i^dag2 a_i^2> = N(N-1) |w_i|^4 / D^2."""
    _check_modes(i)
    w = point.amplitudes3()
    return (n_particles * (n_particles - 1)
            * abs(w[i - 1]) ** 4 / point.d ** 2)


def expectation_cross_collision_closed_form(point: CoherentPoint,
                                            n_particles: int,
                                            i: int, j: int, k: int) -> complex:
    """<n_i a_j^dag a_k> = N(N-1) |w_i|^2 conj(w_j) w_k / D^2, i,j,k distinct."""
    _check_modes(i, j, k)
    if len({i, j, k}) != 3:
        raise ValueError("mode indices must be distinct")
    w = point.amplitudes3()
    return (n_particles * (n_particles - 1) * abs(w[i - 1]) ** 2
            * np.conj(w[j - 1]) * w[k - 1] / point.d ** 2)


def matrix_expectation(basis: FockBasis, point: CoherentPoint, i: int,
                       j: int) -> complex:
    """Matrix-sandwich oracle for <a_i^dag a_j> on the coherent state."""
    psi = coherent_state(basis, point).amplitudes
    return complex(np.vdot(psi, hop_operator(basis, i, j) @ psi))


def _check_modes(*modes):
    for m in modes:
        if m not in (1, 2, 3):
            raise ValueError(f"mode index must be 1, 2 or 3, got {m}")
