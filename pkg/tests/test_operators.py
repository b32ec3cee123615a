import itertools

import numpy as np
import pytest

from triwell.algebra import (ModelConsistencyError, ModelParams, generators,
                             hamiltonian_direct, hamiltonian_generators,
                             hamiltonian_terms, model_context, partner_mode,
                             verify_equivalence)
from triwell.fock import build_basis


def test_partner_mode_cycle():
    # mode pairs (k, j(k)) for the off-diagonal generators: (1,3),(2,1),(3,2)
    assert [partner_mode(k) for k in (1, 2, 3)] == [3, 1, 2]


def test_generators_hermitian_and_traceless():
    basis = build_basis(4)
    for g in generators(basis).as_list():
        assert g.hermiticity_defect() < 1e-14
        assert abs(np.trace(g.to_dense())) < 1e-12


def test_generator_expectations_on_fock_state():
    basis = build_basis(3)
    gens = generators(basis)
    v = np.zeros(basis.dimension)
    v[basis.index_of((2, 1, 0))] = 1.0
    assert gens.q1.expectation(v) == pytest.approx(0.5)       # (n1 - n2)/2
    assert gens.q2.expectation(v) == pytest.approx(1.0)       # (n1 + n2 - 2 n3)/3
    for g in (gens.p1, gens.p2, gens.p3, gens.j1, gens.j2, gens.j3):
        assert g.expectation(v) == pytest.approx(0.0)


def test_algebra_closure_least_squares():
    """Commutators of the 8 generators stay inside their span (su(3))."""
    for n in (2, 3, 4):
        basis = build_basis(n)
        mats = [g.to_dense() for g in generators(basis).as_list()]
        span = np.stack([m.ravel() for m in mats], axis=1)
        for a, b in itertools.combinations(range(8), 2):
            comm = (mats[a] @ mats[b] - mats[b] @ mats[a]).ravel()
            _, residual, _, _ = np.linalg.lstsq(span, comm, rcond=None)
            misfit = float(residual[0]) if residual.size else 0.0
            assert misfit < 1e-10, (n, a, b, misfit)


def test_hamiltonian_term_structure():
    basis = build_basis(3)
    T, K, V = hamiltonian_terms(basis)
    n = basis.states.astype(float)
    assert np.allclose(np.diag(K.toarray()),
                       np.sum(n * (n - 1.0), axis=1))
    # T is the total hop sum, so acting on (3,0,0) it reaches (2,1,0), (2,0,1)
    col = basis.index_of((3, 0, 0))
    dense_t = T.toarray()
    nz = np.nonzero(dense_t[:, col])[0]
    assert set(nz) == {basis.index_of((2, 1, 0)), basis.index_of((2, 0, 1))}
    assert V.shape == T.shape


def test_hamiltonian_hermitian():
    basis = build_basis(5)
    params = ModelParams(-1.0, 0.3, 0.1, 5)
    assert hamiltonian_direct(basis, params).hermiticity_defect() < 1e-13
    assert hamiltonian_generators(basis, params).hermiticity_defect() < 1e-13


def test_equivalence_shift_grid():
    """H_direct - H_generators = kappa (N^2/3 - N) * identity."""
    for n in (1, 2, 5):
        basis = build_basis(n)
        for omega, kappa, lam in itertools.product((-1.0, 0.0, 1.0), repeat=3):
            params = ModelParams(omega, kappa, lam, n)
            c = verify_equivalence(basis, params)
            assert c == pytest.approx(kappa * (n ** 2 / 3.0 - n), abs=1e-10)


def test_verify_equivalence_detects_corruption():
    basis = build_basis(3)
    params = ModelParams(-1.0, 0.5, 0.2, 3)

    class Broken:
        pass

    # corrupt one generator path by perturbing the direct Hamiltonian
    import triwell.algebra as alg
    hd = alg.hamiltonian_direct(basis, params).matrix.tolil()
    hd[0, 1] += 0.05
    hd[1, 0] += 0.05

    hg = alg.hamiltonian_generators(basis, params).matrix
    diff = (hd.tocsr() - hg).toarray()
    c = np.trace(diff) / basis.dimension
    off = np.linalg.norm(diff - c * np.eye(basis.dimension))
    assert off > 1e-3  # the corrupted difference is visibly non-identity


def test_reduced_parameter_roundtrip():
    params = ModelParams.from_reduced(-1.0, 2.0, 0.5, 30)
    assert params.chi == pytest.approx(2.0)
    assert params.mu == pytest.approx(0.5)
    assert params.omega_eff == pytest.approx(
        params.omega + 2.0 * params.lam * 29)


def test_reduced_requires_nonzero_omega():
    params = ModelParams(0.0, 1.0, 0.0, 5)
    with pytest.raises(ValueError):
        params.chi


def test_single_particle_reduced_only_noninteracting():
    p = ModelParams.from_reduced(-1.0, 0.0, 0.0, 1)
    assert p.kappa == 0.0 and p.lam == 0.0
    with pytest.raises(ValueError):
        ModelParams.from_reduced(-1.0, 1.0, 0.0, 1)


def test_model_context_cache_and_hamiltonian():
    ctx1 = model_context(6)
    ctx2 = model_context(6)
    assert ctx1 is ctx2
    params = ModelParams(-1.0, 0.2, 0.1, 6)
    h_ctx = ctx1.hamiltonian(params).matrix
    h_dir = hamiltonian_direct(ctx1.basis, params).matrix
    assert abs(h_ctx - h_dir).max() < 1e-13
