"""Classical limit of the triple-well model on the coherent-state manifold.

Covers the coherent-state energy surface, canonical and w-chart equations of
motion, trajectory integration, twin-sector fixed points with stability,
the saddle-node bifurcation chi_plus, the level-crossing transition chi_c,
and the theta_min / H_min first-order analysis.

Trajectories are integrated in the w-chart, which is free of coordinate
singularities at empty wells or equal phases; the canonical chart
(I1, I2, phi1, phi2) is a post-processing conversion.  Analytic canonical
partial derivatives and Hessians are generated symbolically once per
process and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .algebra import ModelParams
from .coherent import CoherentPoint

_STABLE = "stable-center"
_UNSTABLE = "unstable"

_GRAD_TOL = 1e-10
_STABILITY_REL = 1e-8


class BracketingError(ValueError):
    """Bracket does not contain the requested bifurcation or root."""


class IntegrationError(RuntimeError):
    """Trajectory integration failed or violated the energy-drift bound."""


@dataclass(frozen=True)
class ClassicalPoint:
    """Phase-space point (w1, w2), with twin-sector angle accessors."""

    w1: complex
    w2: complex

    @classmethod
    def from_twin_w(cls, w) -> "ClassicalPoint":
        return cls(complex(w), complex(w))

    @classmethod
    def from_twin_angles(cls, theta: float, phi: float) -> "ClassicalPoint":
        """Twin sphere chart tau = sqrt(2) w = tan(theta/2) e^{-i phi}."""
        tau = math.tan(theta / 2.0) * np.exp(-1j * phi)
        w = tau / math.sqrt(2.0)
        return cls(complex(w), complex(w))

    @classmethod
    def from_canonical(cls, i1, i2, phi1, phi2, n_particles) -> "ClassicalPoint":
        p = CoherentPoint.from_canonical(i1, i2, phi1, phi2, n_particles)
        return cls(p.w1, p.w2)

    @property
    def is_twin(self) -> bool:
        return abs(self.w1 - self.w2) <= 1e-12 * max(1.0, abs(self.w1))

    @property
    def tau(self) -> complex:
        return math.sqrt(2.0) * self.w1

    @property
    def theta(self) -> float:
        return 2.0 * math.atan(abs(self.tau))

    @property
    def phi(self) -> float:
        return float(-np.angle(self.tau)) if self.tau != 0 else 0.0

    @property
    def i_z(self) -> float:
        """Population balance (4 I1 - N)/N on the twin sphere."""
        a2 = abs(self.w1) ** 2
        return (2.0 * a2 - 1.0) / (2.0 * a2 + 1.0)

    def coherent(self) -> CoherentPoint:
        return CoherentPoint(self.w1, self.w2)

    def canonical(self, n_particles: int):
        return self.coherent().to_canonical(n_particles)

    def w_vector(self) -> np.ndarray:
        return np.array([self.w1, self.w2], dtype=complex)


@dataclass(frozen=True, eq=False)
class FixedPointRecord:
    point: ClassicalPoint
    energy_per_particle: float
    label: str                     # one of 1+, 2+, 3+, 4+, other
    stability: str                 # stable-center or unstable
    sector: str                    # twin restriction containing the point
    gradient_norm: float
    eigenvalues: np.ndarray        # linearization spectrum


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    energies: np.ndarray
    params: ModelParams

    @property
    def relative_energy_drift(self) -> float:
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / max(1.0, abs(e0)))

    def canonical_arrays(self):
        """(I1, I2, phi1, phi2) along the trajectory."""
        n = self.params.n_particles
        d = np.abs(self.w1) ** 2 + np.abs(self.w2) ** 2 + 1.0
        i1 = n * np.abs(self.w1) ** 2 / d
        i2 = n * np.abs(self.w2) ** 2 / d
        phi1 = -np.angle(self.w1)
        phi2 = -np.angle(self.w2)
        return i1, i2, phi1, phi2

    def i_z(self) -> np.ndarray:
        a2 = np.abs(self.w1) ** 2
        return (2.0 * a2 - 1.0) / (2.0 * a2 + 1.0)


# ---------------------------------------------------------------------------
# Energy surface and its w-chart gradient
# ---------------------------------------------------------------------------

def _moments(w: np.ndarray):
    """(h1, h2, h3, D) for the 3-vector (w1, w2, 1)."""
    wf = np.array([w[0], w[1], 1.0], dtype=complex)
    d = float(np.sum(np.abs(wf) ** 2))
    s = np.sum(wf)
    h1 = abs(s) ** 2 - d
    h2 = float(np.sum(np.abs(wf) ** 4))
    h3 = 0.0 + 0.0j
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if len({i, j, k}) == 3:
                    h3 += abs(wf[i]) ** 2 * np.conj(wf[j]) * wf[k]
    return h1.real, h2, h3, d


def classical_hamiltonian(point: ClassicalPoint, params: ModelParams) -> float:
    """Coherent-state energy surface <N; w| H |N; w> in closed form."""
    h1, h2, h3, d = _moments(point.w_vector())
    n = params.n_particles
    value = (params.omega_eff * n * h1 / d
             + n * (n - 1) * (params.kappa * h2 - 2.0 * params.lam * h3.real)
             / d ** 2)
    return float(value)


def w_gradient(w: np.ndarray, params: ModelParams) -> np.ndarray:
    """Wirtinger gradient dH/d(conj(w_m)), m = 1, 2, of the energy surface."""
    wf = np.array([w[0], w[1], 1.0], dtype=complex)
    h1, h2, h3, d = _moments(w)
    s = np.sum(wf)
    n = params.n_particles
    grad = np.zeros(2, dtype=complex)
    for m in range(2):
        others = [i for i in range(3) if i != m]
        a, b = wf[others[0]], wf[others[1]]
        dh1 = s - wf[m]
        dh2 = 2.0 * abs(wf[m]) ** 2 * wf[m]
        dh3 = (wf[m] * 2.0 * np.real(np.conj(a) * b)
               + abs(a) ** 2 * b + abs(b) ** 2 * a)
        dd = wf[m]
        grad[m] = (params.omega_eff * n * (dh1 * d - h1 * dd) / d ** 2
                   + n * (n - 1)
                   * (params.kappa * (dh2 * d - 2.0 * h2 * dd)
                      - 2.0 * params.lam * (dh3 * d - 2.0 * h3 * dd))
                   / d ** 3)
    return grad


def _metric(w: np.ndarray, n: int) -> np.ndarray:
    """Coherent-state (Kaehler) metric g_jk on the w-chart."""
    d = abs(w[0]) ** 2 + abs(w[1]) ** 2 + 1.0
    return n * (d * np.eye(2) - np.outer(w, np.conj(w))) / d ** 2


def w_velocity(point: ClassicalPoint, params: ModelParams) -> np.ndarray:
    """dw/dt = -i g^{-1} dH/d(conj w) on the w-chart."""
    w = point.w_vector()
    g = _metric(w, params.n_particles)
    return -1j * np.linalg.solve(g, w_gradient(w, params))


# ---------------------------------------------------------------------------
# Canonical chart: symbolic H, gradient and Hessian
# ---------------------------------------------------------------------------

_CANONICAL_CACHE = None


def _canonical_functions():
    global _CANONICAL_CACHE
    if _CANONICAL_CACHE is None:
        import sympy as sym

        i1, i2, p1, p2 = sym.symbols("I1 I2 p1 p2", real=True, positive=False)
        omp, kp, lm, n = sym.symbols("omp kp lm n", real=True)
        i3 = n - i1 - i2
        tun = 2 * (sym.sqrt(i1 * i2) * sym.cos(p1 - p2)
                   + sym.sqrt(i1 * i3) * sym.cos(p1)
                   + sym.sqrt(i2 * i3) * sym.cos(p2))
        quad = (n - 1) / n * (
            kp * (i1 ** 2 + i2 ** 2 + i3 ** 2)
            - 4 * lm * (i1 * sym.sqrt(i2 * i3) * sym.cos(p2)
                        + i2 * sym.sqrt(i1 * i3) * sym.cos(p1)
                        + i3 * sym.sqrt(i1 * i2) * sym.cos(p1 - p2)))
        ham = omp * tun + quad
        coords = (i1, i2, p1, p2)
        grad = [sym.diff(ham, v) for v in coords]
        hess = [[sym.diff(g, v) for v in coords] for g in grad]
        args = coords + (omp, kp, lm, n)
        _CANONICAL_CACHE = (
            sym.lambdify(args, ham, "numpy"),
            sym.lambdify(args, grad, "numpy"),
            sym.lambdify(args, hess, "numpy"),
        )
    return _CANONICAL_CACHE


def canonical_hamiltonian(i1, i2, phi1, phi2, params: ModelParams) -> float:
    ham, _, _ = _canonical_functions()
    return float(ham(i1, i2, phi1, phi2, params.omega_eff, params.kappa,
                     params.lam, params.n_particles))


def canonical_gradient(i1, i2, phi1, phi2, params: ModelParams) -> np.ndarray:
    """(dH/dI1, dH/dI2, dH/dphi1, dH/dphi2), analytic."""
    _, grad, _ = _canonical_functions()
    return np.asarray(grad(i1, i2, phi1, phi2, params.omega_eff, params.kappa,
                           params.lam, params.n_particles), dtype=float)


def canonical_velocity(point: ClassicalPoint,
                       params: ModelParams) -> np.ndarray:
    """Canonical flow (dI1, dI2, dphi1, dphi2)/dt."""
    i1, i2, phi1, phi2 = point.canonical(params.n_particles)
    g = canonical_gradient(i1, i2, phi1, phi2, params)
    return np.array([-g[2], -g[3], g[0], g[1]])


def equations_of_motion(point: ClassicalPoint, params: ModelParams,
                        boundary_margin: float = 1e-6):
    """Phase-space velocity at a point.

    Returns ("canonical", (dI1, dI2, dphi1, dphi2)) away from the chart
    boundary, and ("w", (dw1, dw2)) when any mean occupation is within
    boundary_margin * N of the boundary.
    """
    n = params.n_particles
    i1, i2, _, _ = point.canonical(n)
    i3 = n - i1 - i2
    eps = boundary_margin * n
    if min(i1, i2, i3) < eps:
        return "w", w_velocity(point, params)
    return "canonical", canonical_velocity(point, params)


def linearization(point: ClassicalPoint, params: ModelParams) -> np.ndarray:
    """Linearized canonical flow matrix S * Hess(H) at a phase-space point."""
    _, _, hess_fn = _canonical_functions()
    i1, i2, phi1, phi2 = point.canonical(params.n_particles)
    hess = np.asarray(hess_fn(i1, i2, phi1, phi2, params.omega_eff,
                              params.kappa, params.lam, params.n_particles),
                      dtype=float)
    s = np.zeros((4, 4))
    s[0, 2] = s[1, 3] = -1.0
    s[2, 0] = s[3, 1] = 1.0
    return s @ hess


def _classify_stability(eigenvalues: np.ndarray) -> str:
    scale = float(np.max(np.abs(eigenvalues)))
    if scale == 0.0:
        return _STABLE
    return (_STABLE if np.max(np.abs(eigenvalues.real)) <= _STABILITY_REL * scale
            else _UNSTABLE)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

def _rhs(_t, y, params):
    point = ClassicalPoint(complex(y[0], y[1]), complex(y[2], y[3]))
    v = w_velocity(point, params)
    return [v[0].real, v[0].imag, v[1].real, v[1].imag]


def integrate_trajectory(init: ClassicalPoint, params: ModelParams,
                         t_max: float, dt: float,
                         drift_tol: float = 1e-8) -> Trajectory:
    """Adaptive high-order integration in the w-chart with drift control."""
    if t_max <= 0 or dt <= 0:
        raise ValueError("t_max and dt must be positive")
    y0 = [init.w1.real, init.w1.imag, init.w2.real, init.w2.imag]
    t_eval = np.arange(0.0, t_max + 0.5 * dt, dt)
    last = None
    for rtol in (1e-10, 1e-12):
        sol = solve_ivp(_rhs, (0.0, t_max), y0, method="DOP853",
                        t_eval=t_eval, rtol=rtol, atol=1e-12, args=(params,))
        if not sol.success:
            raise IntegrationError(f"integrator failed: {sol.message}")
        w1 = sol.y[0] + 1j * sol.y[1]
        w2 = sol.y[2] + 1j * sol.y[3]
        energies = np.array([
            classical_hamiltonian(ClassicalPoint(a, b), params)
            for a, b in zip(w1, w2)])
        last = Trajectory(sol.t, w1, w2, energies, params)
        if last.relative_energy_drift <= drift_tol:
            return last
    raise IntegrationError(
        f"energy drift {last.relative_energy_drift:.3e} exceeds {drift_tol:g}")


# ---------------------------------------------------------------------------
# Twin-sector reduction and fixed points
# ---------------------------------------------------------------------------

def twin_energy_reduced(w, chi: float, mu: float):
    """H/(N Omega) restricted to w1 = w2 = w real; depends only on chi, mu."""
    w = np.asarray(w, dtype=float)
    d = 2.0 * w ** 2 + 1.0
    return ((1.0 + 2.0 * mu) * (2.0 * w ** 2 + 4.0 * w) / d
            + chi * (2.0 * w ** 4 + 1.0) / d ** 2
            - 2.0 * mu * (4.0 * w ** 3 + 2.0 * w ** 2) / d ** 2)


def _twin_gradient_polynomial(chi: float, mu: float) -> Polynomial:
    """Numerator polynomial of d/dw of the reduced twin energy."""
    w = Polynomial([0.0, 1.0])
    d = 2.0 * w ** 2 + 1.0
    n1 = (1.0 + 2.0 * mu) * (2.0 * w ** 2 + 4.0 * w)
    n2 = chi * (2.0 * w ** 4 + 1.0) - 2.0 * mu * (4.0 * w ** 3 + 2.0 * w ** 2)
    return ((n1.deriv() * d - n1 * d.deriv()) * d
            + n2.deriv() * d - 2.0 * n2 * d.deriv())


def twin_critical_points(chi: float, mu: float) -> np.ndarray:
    """Real critical points of the reduced twin energy, ascending."""
    poly = _twin_gradient_polynomial(chi, mu)
    roots = poly.roots()
    real = np.sort(np.unique(np.round(
        roots[np.abs(roots.imag) < 1e-8 * (1.0 + np.abs(roots))].real, 12)))
    # Newton polish on the numerator polynomial.
    dpoly = poly.deriv()
    polished = []
    for r in real:
        x = float(r)
        for _ in range(50):
            fx, dfx = poly(x), dpoly(x)
            if dfx == 0.0:
                break
            step = fx / dfx
            x -= step
            if abs(step) < 1e-15 * max(1.0, abs(x)):
                break
        polished.append(x)
    out = []
    for x in sorted(polished):
        if not out or abs(x - out[-1]) > 1e-9 * max(1.0, abs(x)):
            out.append(x)
    return np.asarray(out)


def find_fixed_points(params: ModelParams,
                      replicate: bool = False) -> list:
    """Twin-sector equilibria with labels and full 4-D stability.

    Labels: 1+ is w = 1 (present for every chi, mu); 2+ is the persistent
    companion root at negative w; 3+/4+ are the saddle-node pair, the
    stable member being 4+.  ``replicate`` adds the two equivalent twin
    sectors for every record.
    """
    chi, mu = params.chi, params.mu
    roots = twin_critical_points(chi, mu)
    records = []
    pair = []
    for w in roots:
        point = ClassicalPoint.from_twin_w(w)
        rec = _record_for(point, params, sector="w1=w2")
        if abs(w - 1.0) < 1e-6:
            rec = _with_label(rec, "1+")
        elif w < 0.0:
            rec = _with_label(rec, "2+")
        else:
            pair.append(rec)
        records.append(rec)
    if len(pair) == 2:
        stable = [r for r in pair if r.stability == _STABLE]
        if len(stable) == 1:
            four = stable[0]
        else:  # fall back to energy ordering in the energy-minimum sense
            four = min(pair, key=lambda r: r.energy_per_particle)
        for i, rec in enumerate(records):
            if rec in pair:
                records[i] = _with_label(rec, "4+" if rec is four else "3+")
    elif pair:
        records = [(_with_label(r, "other") if r in pair else r)
                   for r in records]
    if replicate:
        extra = []
        for rec in records:
            w = rec.point.w1
            if abs(w) < 1e-9:
                continue
            for sector, pt in (("w1=1", ClassicalPoint(1.0, 1.0 / w)),
                               ("w2=1", ClassicalPoint(1.0 / w, 1.0))):
                twin_rec = _record_for(pt, params, sector=sector)
                extra.append(_with_label(twin_rec, rec.label))
        records.extend(extra)
    return records


def _record_for(point: ClassicalPoint, params: ModelParams,
                sector: str) -> FixedPointRecord:
    n = params.n_particles
    grad = w_gradient(point.w_vector(), params) / n
    scale = max(1.0, abs(classical_hamiltonian(point, params)) / n)
    gnorm = float(np.linalg.norm(grad)) / scale
    eigs = np.linalg.eigvals(linearization(point, params))
    return FixedPointRecord(
        point=point,
        energy_per_particle=classical_hamiltonian(point, params) / n,
        label="other",
        stability=_classify_stability(eigs),
        sector=sector,
        gradient_norm=gnorm,
        eigenvalues=eigs,
    )


def _with_label(rec: FixedPointRecord, label: str) -> FixedPointRecord:
    return FixedPointRecord(rec.point, rec.energy_per_particle, label,
                            rec.stability, rec.sector, rec.gradient_norm,
                            rec.eigenvalues)


def _saddle_node_pair_present(chi: float, mu: float) -> bool:
    roots = twin_critical_points(chi, mu)
    positive = [w for w in roots if w > 1e-6 and abs(w - 1.0) > 1e-6]
    return len(positive) >= 2


def bifurcation_scan(mu: float, chi_range: tuple,
                     tol: float = 1e-4) -> float:
    """chi_plus(mu): bisection on appearance of the 3+/4+ root pair."""
    lo, hi = float(chi_range[0]), float(chi_range[1])
    if _saddle_node_pair_present(lo, mu) or not _saddle_node_pair_present(hi, mu):
        raise BracketingError(
            f"range ({lo}, {hi}) does not bracket the saddle-node bifurcation")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _saddle_node_pair_present(mid, mu):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _twin_branch_w4(chi: float, mu: float) -> Optional[float]:
    """Location of the 4+ fixed point (smallest positive non-unit root)."""
    roots = twin_critical_points(chi, mu)
    positive = [w for w in roots if w > 1e-6 and abs(w - 1.0) > 1e-6]
    if len(positive) < 2:
        return None
    return min(positive)


def level_crossing(mu: float, chi_search: tuple = (1.0, 4.0),
                   tol: float = 1e-6) -> float:
    """chi_c(mu): energy crossing of the 1+ and 4+ fixed points.

    Works in energy-minimum units (Omega < 0 convention), where the ground
    branch switches from 1+ to 4+ at the crossing.
    """
    chi_plus = bifurcation_scan(mu, chi_search)

    def energy_gap(chi):
        w4 = _twin_branch_w4(chi, mu)
        if w4 is None:
            raise BracketingError(f"4+ branch missing at chi={chi:g}")
        # H/N with Omega = -1 is -twin_energy_reduced.
        return twin_energy_reduced(w4, chi, mu) - twin_energy_reduced(1.0, chi, mu)

    lo = chi_plus + 1e-3
    hi = float(chi_search[1])
    if energy_gap(lo) * energy_gap(hi) > 0:
        raise BracketingError(
            f"no 1+/4+ crossing between chi={lo:g} and chi={hi:g}")
    return float(brentq(energy_gap, lo, hi, xtol=tol))


# ---------------------------------------------------------------------------
# theta_min / H_min first-order analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaMinRow:
    chi: float
    theta_min: float
    h_min: float                   # min of H/N on the twin manifold
    dh_dchi: float                 # finite-difference derivative
    d2h_dchi2: float
    h1_at_min: float               # quadratic-term portion at theta_min
    first_order_residual: float    # |dh_dchi - h1_at_min|
    degenerate: bool               # flagged at the crossing point


def _theta_of_w(w: float) -> float:
    return 2.0 * math.atan(math.sqrt(2.0) * abs(w))


def twin_quadratic_portion(w, mu: float, omega: float = -1.0):
    """H1/N: the chi-coefficient of the reduced twin energy (per particle)."""
    w = np.asarray(w, dtype=float)
    d = 2.0 * w ** 2 + 1.0
    return omega * (2.0 * w ** 4 + 1.0) / d ** 2


def _twin_minimum(chi: float, mu: float, omega: float):
    """(w_min, H_min/N, degenerate?) over the real twin manifold."""
    roots = twin_critical_points(chi, mu)
    energies = omega * twin_energy_reduced(roots, chi, mu)
    order = np.argsort(energies)
    w_min = float(roots[order[0]])
    e_min = float(energies[order[0]])
    degenerate = (len(roots) > 1
                  and energies[order[1]] - e_min < 1e-9 * max(1.0, abs(e_min)))
    return w_min, e_min, degenerate


def theta_min_analysis(chi_values, mu: float = 0.0, omega: float = -1.0,
                       fd_step: float = 1e-4) -> list:
    """Global twin-manifold minimizer and the first/second chi-derivatives.

    On smooth branches the first derivative of H_min equals the
    quadratic-term portion evaluated at theta_min; the residual column
    records how well the identity holds.
    """
    rows = []
    for chi in np.asarray(chi_values, dtype=float):
        w_min, e_min, degenerate = _twin_minimum(chi, mu, omega)
        e_p = _twin_minimum(chi + fd_step, mu, omega)[1]
        e_m = _twin_minimum(chi - fd_step, mu, omega)[1]
        dh = (e_p - e_m) / (2.0 * fd_step)
        d2h = (e_p - 2.0 * e_min + e_m) / fd_step ** 2
        h1 = float(twin_quadratic_portion(w_min, mu, omega))
        rows.append(ThetaMinRow(
            chi=float(chi),
            theta_min=_theta_of_w(w_min),
            h_min=e_min,
            dh_dchi=dh,
            d2h_dchi2=d2h,
            h1_at_min=h1,
            first_order_residual=abs(dh - h1),
            degenerate=degenerate,
        ))
    return rows
