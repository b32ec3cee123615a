import numpy as np
import pytest

from triwell.algebra import ModelParams
from triwell.semiclassical import (BracketingError, ClassicalPoint,
                                   bifurcation_scan, canonical_gradient,
                                   canonical_hamiltonian, canonical_velocity,
                                   classical_hamiltonian, equations_of_motion,
                                   find_fixed_points, integrate_trajectory,
                                   level_crossing, linearization,
                                   theta_min_analysis, twin_critical_points,
                                   twin_energy_reduced, twin_quadratic_portion,
                                   w_gradient, w_velocity)

PARAMS = ModelParams.from_reduced(-1.0, 2.2, 0.15, 30)


def test_coherent_energy_matches_quantum_expectation():
    from triwell.algebra import model_context
    from triwell.coherent import coherent_state

    ctx = model_context(9)
    params = ModelParams(-1.0, 0.3, 0.1, 9)
    pt = ClassicalPoint(0.7 + 0.4j, -0.2 + 0.9j)
    st = coherent_state(ctx.basis, pt.coherent())
    quantum = ctx.hamiltonian(params).expectation(st.amplitudes)
    assert classical_hamiltonian(pt, params) == pytest.approx(
        quantum, abs=1e-10)


def test_w_gradient_finite_difference():
    w = np.array([0.8 + 0.2j, -0.3 + 0.5j])
    grad = w_gradient(w, PARAMS)
    eps = 1e-6
    for m in range(2):
        for part, picker in ((1.0, np.real), (1j, np.imag)):
            dw = np.zeros(2, dtype=complex)
            dw[m] = eps * part
            hp = classical_hamiltonian(ClassicalPoint(*(w + dw)), PARAMS)
            hm = classical_hamiltonian(ClassicalPoint(*(w - dw)), PARAMS)
            # dH/dRe w = 2 Re grad, dH/dIm w = 2 Im grad (Wirtinger)
            assert (hp - hm) / (2 * eps) == pytest.approx(
                2.0 * picker(grad[m]), rel=1e-6, abs=1e-6)


def test_canonical_gradient_finite_difference():
    x = np.array([9.0, 7.5, 0.4, -0.3])
    grad = canonical_gradient(*x, PARAMS)
    eps = 1e-6
    for m in range(4):
        dx = np.zeros(4)
        dx[m] = eps
        hp = canonical_hamiltonian(*(x + dx), PARAMS)
        hm = canonical_hamiltonian(*(x - dx), PARAMS)
        assert (hp - hm) / (2 * eps) == pytest.approx(grad[m], rel=1e-6)


def test_charts_give_the_same_flow():
    pt = ClassicalPoint(0.8 + 0.2j, 0.6 - 0.1j)
    n = PARAMS.n_particles
    wdot = w_velocity(pt, PARAMS)
    cv = canonical_velocity(pt, PARAMS)
    w = np.array([pt.w1, pt.w2])
    eps = 1e-7

    def canon_of(wv):
        d = abs(wv[0]) ** 2 + abs(wv[1]) ** 2 + 1.0
        return np.array([n * abs(wv[0]) ** 2 / d, n * abs(wv[1]) ** 2 / d,
                         -np.angle(wv[0]), -np.angle(wv[1])])

    mapped = np.zeros(4)
    for k in range(2):
        for part in (1.0, 1j):
            dw = np.zeros(2, dtype=complex)
            dw[k] = eps * part
            comp = wdot[k].real if part == 1.0 else wdot[k].imag
            mapped += (canon_of(w + dw) - canon_of(w - dw)) / (2 * eps) * comp
    assert np.allclose(cv, mapped, rtol=1e-6, atol=1e-6)


def test_chart_switch_near_boundary():
    inner = ClassicalPoint(0.5, 0.5)
    chart, _ = equations_of_motion(inner, PARAMS)
    assert chart == "canonical"
    edge = ClassicalPoint(1e-8, 1e-8)
    chart, vel = equations_of_motion(edge, PARAMS)
    assert chart == "w"
    assert vel.shape == (2,)


def test_linearization_finite_difference():
    x0 = np.array([11.0, 8.0, 0.2, -0.1])
    n = PARAMS.n_particles
    a = linearization(ClassicalPoint.from_canonical(*x0, n), PARAMS)
    eps = 1e-6
    fd = np.zeros((4, 4))
    for m in range(4):
        dx = np.zeros(4)
        dx[m] = eps
        vp = canonical_velocity(
            ClassicalPoint.from_canonical(*(x0 + dx), n), PARAMS)
        vm = canonical_velocity(
            ClassicalPoint.from_canonical(*(x0 - dx), n), PARAMS)
        fd[:, m] = (vp - vm) / (2 * eps)
    assert np.allclose(a, fd, rtol=1e-5, atol=1e-5)


def test_energy_per_particle_scale_free():
    """With fixed (chi, mu) the energy per particle does not depend on N."""
    pt = ClassicalPoint(0.9, 1.1)
    values = []
    for n in (10, 30, 100):
        p = ModelParams.from_reduced(-1.0, 1.7, 0.2, n)
        values.append(classical_hamiltonian(pt, p) / n)
    assert values[0] == pytest.approx(values[1], abs=1e-12)
    assert values[1] == pytest.approx(values[2], abs=1e-12)


def test_twin_energy_matches_full_surface():
    for w in (0.3, 1.0, 1.8, -0.4):
        pt = ClassicalPoint.from_twin_w(w)
        p = ModelParams.from_reduced(-1.0, 2.4, 0.3, 40)
        full = classical_hamiltonian(pt, p) / 40
        reduced = p.omega * twin_energy_reduced(w, 2.4, 0.3)
        assert full == pytest.approx(reduced, abs=1e-12)


def test_twin_critical_points_chi_zero():
    roots = twin_critical_points(0.0, 0.0)
    assert np.allclose(sorted(roots), [-0.5, 1.0], atol=1e-10)


def test_twin_critical_points_chi_two():
    roots = sorted(twin_critical_points(2.0, 0.0))
    expected = sorted([1.0, 0.5, 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)])
    assert np.allclose(roots, expected, atol=1e-9)


def test_fixed_point_labels_and_stability():
    params = ModelParams.from_reduced(-1.0, 3.0, 0.0, 30)
    records = {r.label: r for r in find_fixed_points(params)}
    assert set(records) == {"1+", "2+", "3+", "4+"}
    assert records["4+"].stability == "stable-center"
    assert records["1+"].stability == "unstable"
    assert records["4+"].point.i_z < -0.8
    assert records["4+"].point.w1.real == pytest.approx(0.2140, abs=2e-4)
    for r in records.values():
        assert r.gradient_norm < 1e-8
    # global minimum sits on the self-trapped branch past the crossing
    assert records["4+"].energy_per_particle < records["1+"].energy_per_particle


def test_fixed_point_symmetric_branch_below_transition():
    params = ModelParams.from_reduced(-1.0, 1.0, 0.0, 30)
    records = {r.label: r for r in find_fixed_points(params)}
    assert "1+" in records and records["1+"].stability == "stable-center"
    assert "3+" not in records and "4+" not in records


def test_replicated_sectors_share_energy():
    params = ModelParams.from_reduced(-1.0, 3.0, 0.0, 30)
    records = find_fixed_points(params, replicate=True)
    by_label = {}
    for r in records:
        by_label.setdefault(r.label, []).append(r)
    assert len(by_label["4+"]) == 3
    energies = [r.energy_per_particle for r in by_label["4+"]]
    assert np.ptp(energies) < 1e-9
    sectors = {r.sector for r in by_label["4+"]}
    assert len(sectors) == 3


def test_saddle_node_location():
    chi_plus = bifurcation_scan(0.0, (1.0, 3.0))
    assert chi_plus == pytest.approx(1.9708, abs=1e-3)
    with pytest.raises(BracketingError):
        bifurcation_scan(0.0, (0.1, 0.5))


def test_saddle_node_square_root_scaling():
    chi_plus = bifurcation_scan(0.0, (1.0, 3.0), tol=1e-8)

    def gap(chi):
        roots = sorted(r for r in twin_critical_points(chi, 0.0)
                       if 0.0 < r < 0.99)
        assert len(roots) == 2
        return roots[1] - roots[0]

    delta = 1e-4
    ratio = gap(chi_plus + 4 * delta) / gap(chi_plus + delta)
    assert ratio == pytest.approx(2.0, rel=0.05)


def test_level_crossing_at_two():
    assert level_crossing(0.0) == pytest.approx(2.0, abs=1e-6)


def test_trajectory_conserves_energy_and_twin_symmetry():
    params = ModelParams.from_reduced(-1.0, 2.5, 0.0, 30)
    start = ClassicalPoint.from_twin_w(0.4)
    traj = integrate_trajectory(start, params, 30.0, 0.05)
    assert traj.relative_energy_drift < 1e-8
    assert np.max(np.abs(traj.w1 - traj.w2)) < 1e-7


def test_trajectory_stays_near_stable_center():
    params = ModelParams.from_reduced(-1.0, 1.0, 0.0, 30)
    theta_star = 2.0 * np.arctan(np.sqrt(2.0))
    start = ClassicalPoint.from_twin_angles(theta_star + 0.05, 0.0)
    traj = integrate_trajectory(start, params, 40.0, 0.05)
    assert np.max(np.abs(traj.i_z() - 1.0 / 3.0)) < 0.1


def test_theta_min_analysis_identities():
    rows = theta_min_analysis(np.linspace(1.7, 2.3, 13))
    by_chi = {round(r.chi, 3): r for r in rows}
    # first-order identity holds away from the degenerate crossing
    for r in rows:
        if not r.degenerate:
            assert r.first_order_residual < 1e-6
    # the minimizing angle jumps at chi = 2
    assert by_chi[1.95].theta_min == pytest.approx(
        2.0 * np.arctan(np.sqrt(2.0)), abs=1e-9)
    assert by_chi[2.05].theta_min < 1.2
    assert by_chi[2.0].degenerate


def test_theta_min_second_derivative_cross_check():
    """d2H_min/dchi2 equals the slope of the quadratic portion along the
    moving minimum (chain rule through theta_min)."""
    chis = np.array([2.3, 2.31, 2.32])
    rows = theta_min_analysis(chis, fd_step=1e-5)
    # independent check: finite difference of dh_dchi across the grid
    fd = (rows[2].dh_dchi - rows[0].dh_dchi) / (chis[2] - chis[0])
    assert rows[1].d2h_dchi2 == pytest.approx(fd, rel=1e-3)


def test_twin_quadratic_portion_value():
    # at w = 1 (symmetric point) the quadratic portion is omega/3
    assert twin_quadratic_portion(1.0, 0.0, -1.0) == pytest.approx(-1.0 / 3.0)
