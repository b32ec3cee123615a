"""Occupational Husimi function and collective-phase distribution.

The Husimi phase integral is evaluated in closed form (the uniform phase
average kills all cross terms), with log-space accumulation so large N stays
finite.  The phase distribution is the squared collective-phase overlap,
normalized automatically because (n1, n2) uniquely labels basis states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .coherent import QuantumState, log_multinomial


@dataclass(frozen=True)
class ScalarField2D:
    axis1_label: str
    axis1: np.ndarray
    axis2_label: str
    axis2: np.ndarray
    values: np.ndarray             # (len(axis1), len(axis2)), >= 0, finite
    mask: np.ndarray               # True where the grid point is valid
    metadata: dict

    def max_value(self) -> float:
        return float(np.max(self.values[self.mask])) if np.any(self.mask) else 0.0


def husimi_population(state: QuantumState, i1_grid, i2_grid,
                      metadata: dict | None = None) -> ScalarField2D:
    """Quasi-probability of mean occupations Q_I(I1, I2).

    Closed form: the phase average leaves |C|^2 sum_n multinomial *
    r1^{2 n1} r2^{2 n2} |c_n|^2 with r_j^2 = I_j / (N - I1 - I2); the
    simplex boundary I1 + I2 = N is the analytic n3 = 0 shell limit.
    """
    basis = state.basis
    n = basis.total_particles
    occ = basis.states
    i1 = np.asarray(i1_grid, dtype=float)
    i2 = np.asarray(i2_grid, dtype=float)
    base = log_multinomial(n, occ) + 2.0 * _safe_log(np.abs(state.amplitudes))
    n1 = occ[:, 0].astype(float)
    n2 = occ[:, 1].astype(float)
    on_shell = occ[:, 2] == 0

    values = np.zeros((i1.size, i2.size))
    mask = np.zeros((i1.size, i2.size), dtype=bool)
    for a, x1 in enumerate(i1):
        for b, x2 in enumerate(i2):
            if x1 < 0 or x2 < 0 or x1 + x2 > n * (1.0 + 1e-12):
                continue
            mask[a, b] = True
            if n == 0:
                values[a, b] = float(np.abs(state.amplitudes[0]) ** 2)
                continue
            i3 = n - x1 - x2
            if i3 <= 1e-12 * n:
                # boundary shell: only n3 = 0 states contribute
                total = x1 + x2
                logs = (base[on_shell]
                        + _occ_term(n1[on_shell], x1 / total)
                        + _occ_term(n2[on_shell], x2 / total))
            else:
                logs = (base + _occ_term(n1, x1 / i3) + _occ_term(n2, x2 / i3)
                        - n * np.log(n / i3))
            values[a, b] = float(np.sum(np.exp(logs)))
    values = np.clip(values, 0.0, None)
    return ScalarField2D("I1", i1, "I2", i2, values, mask, metadata or {})


def _occ_term(n_arr, ratio):
    """n * ln(ratio) with the n = 0, ratio = 0 corner fixed to 0."""
    with np.errstate(invalid="ignore"):
        return np.where(n_arr > 0, n_arr * _safe_log(ratio), 0.0)


def _safe_log(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0.0, np.log(np.where(x > 0.0, x, 1.0)), -np.inf)


def husimi_quadrature_oracle(state: QuantumState, i1: float, i2: float,
                             phase_points: int = 64) -> float:
    """Brute-force phase average of |<N; w|psi>|^2 (test oracle).

    The rectangle rule on a uniform periodic grid is exact once the number
    of points exceeds the trigonometric degree 2N of the integrand.
    """
    from .coherent import CoherentPoint, coherent_state

    basis = state.basis
    n = basis.total_particles
    i3 = n - i1 - i2
    if i3 <= 0:
        raise ValueError("quadrature oracle requires I1 + I2 < N")
    phis = 2.0 * np.pi * np.arange(phase_points) / phase_points
    total = 0.0
    for p1 in phis:
        for p2 in phis:
            point = CoherentPoint.from_canonical(i1, i2, p1, p2, n)
            overlap = np.vdot(coherent_state(basis, point).amplitudes,
                              state.amplitudes)
            total += abs(overlap) ** 2
    return total / phase_points ** 2


def phase_distribution(state: QuantumState, phi1_grid, phi2_grid,
                       metadata: dict | None = None) -> ScalarField2D:
    """Collective-phase distribution |sum_n e^{i(n1 phi1 + n2 phi2)} c_n|^2."""
    basis = state.basis
    n = basis.total_particles
    phi1 = np.asarray(phi1_grid, dtype=float)
    phi2 = np.asarray(phi2_grid, dtype=float)
    coeff = np.zeros((n + 1, n + 1), dtype=complex)
    for idx, (n1, n2, _n3) in enumerate(basis.states):
        coeff[n1, n2] = state.amplitudes[idx]
    modes = np.arange(n + 1)
    e1 = np.exp(1j * np.outer(phi1, modes))          # (P1, n+1)
    e2 = np.exp(1j * np.outer(modes, phi2))          # (n+1, P2)
    field = e1 @ coeff @ e2
    values = np.abs(field) ** 2
    mask = np.ones(values.shape, dtype=bool)
    return ScalarField2D("phi1", phi1, "phi2", phi2, values, mask,
                         metadata or {})


def phase_marginal_variance(field: ScalarField2D, axis: int = 0) -> float:
    """Circular variance 1 - |<e^{i phi}>| of one phase marginal."""
    if axis == 0:
        marginal = np.sum(field.values, axis=1)
        angles = field.axis1
    else:
        marginal = np.sum(field.values, axis=0)
        angles = field.axis2
    weight = float(np.sum(marginal))
    if weight == 0.0:
        return 1.0
    resultant = np.abs(np.sum(marginal * np.exp(1j * angles))) / weight
    return float(1.0 - resultant)


def count_local_maxima(field: ScalarField2D, rel_threshold: float) -> int:
    """Strict 8-neighborhood maxima above rel_threshold * max, with plateau
    components merged (symmetric states produce exact ties)."""
    if not 0.0 < rel_threshold < 1.0:
        raise ValueError("relative threshold must lie in (0, 1)")
    vals = np.where(field.mask, field.values, -np.inf)
    peak = field.max_value()
    if peak <= 0.0:
        return 0
    local_max = ndimage.maximum_filter(vals, size=3, mode="constant",
                                       cval=-np.inf)
    candidates = (vals == local_max) & field.mask & (vals > rel_threshold * peak)
    labels, count = ndimage.label(candidates)
    total = 0
    for comp in range(1, count + 1):
        inside = labels == comp
        ring = ndimage.binary_dilation(inside) & ~inside & field.mask
        if not np.any(ring) or np.max(vals[ring]) < np.min(vals[inside]):
            total += 1
    return total
