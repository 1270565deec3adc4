import numpy as np
import pytest
import scipy.linalg

from omegapair import regions as rg
from omegapair.dh import DhParam, project_psd, skew, sym
from omegapair.fgm import (FgmOptions, estimate_lipschitz, gradient,
                           initial_quadruple, objective, project, solve_hurwitz)
from omegapair.pencil import admissibility_check


def test_objective_exact_cases():
    d = DhParam(np.eye(2), np.zeros((2, 2)), np.eye(2), np.eye(2))
    assert objective(np.eye(2), -np.eye(2), d) == 0.0
    d0 = DhParam(np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2))
    assert objective(np.eye(2), np.zeros((2, 2)), d0) == 0.0


def test_objective_matches_elementwise_recomputation():
    rng = np.random.default_rng(0)
    n = 4
    for _ in range(10):
        E, A = rng.standard_normal((n, n)), rng.standard_normal((n, n))
        d = DhParam(sym(rng.standard_normal((n, n))), skew(rng.standard_normal((n, n))),
                    sym(rng.standard_normal((n, n))), rng.standard_normal((n, n)))
        mu = float(rng.uniform(0.5, 2.0))
        ra = A - (d.J - d.R) @ d.Q
        re = E - d.T @ d.Q
        by_hand = sum(ra[i, j] ** 2 for i in range(n) for j in range(n)) \
            + mu * sum(re[i, j] ** 2 for i in range(n) for j in range(n))
        assert objective(E, A, d, mu) == pytest.approx(by_hand, rel=1e-12)


def test_gradient_vanishes_at_global_minimizer():
    d = DhParam(np.eye(3), np.zeros((3, 3)), np.eye(3), np.eye(3))
    pair_E, pair_A = d.T @ d.Q, (d.J - d.R) @ d.Q
    for g in gradient(pair_E, pair_A, d):
        np.testing.assert_allclose(g, 0.0, atol=1e-14)


def _fd_gradient(E, A, d, mu, dT, dJ, dR, dQ, h):
    def f(s):
        return objective(E, A, DhParam(d.T + s * dT, d.J + s * dJ,
                                       d.R + s * dR, d.Q + s * dQ), mu)
    return (f(h) - f(-h)) / (2 * h)


def test_gradient_matches_central_finite_differences():
    rng = np.random.default_rng(1)
    n = 4
    for _ in range(20):
        E, A = rng.standard_normal((n, n)), rng.standard_normal((n, n))
        d = DhParam(sym(rng.standard_normal((n, n))), skew(rng.standard_normal((n, n))),
                    sym(rng.standard_normal((n, n))), rng.standard_normal((n, n)))
        mu = float(rng.uniform(0.5, 2.0))
        gT, gJ, gR, gQ = gradient(E, A, d, mu)
        dT = sym(rng.standard_normal((n, n)))
        dJ = skew(rng.standard_normal((n, n)))
        dR = sym(rng.standard_normal((n, n)))
        dQ = rng.standard_normal((n, n))
        scale = 1 + max(np.linalg.norm(M) for M in (d.T, d.J, d.R, d.Q))
        fd = _fd_gradient(E, A, d, mu, dT, dJ, dR, dQ, 1e-6 * scale)
        analytic = (np.sum(gT * dT) + np.sum(gJ * dJ) + np.sum(gR * dR)
                    + np.sum(gQ * dQ))
        assert fd == pytest.approx(analytic, rel=1e-5, abs=1e-8 * scale)


def test_gradient_mu_linearity():
    rng = np.random.default_rng(2)
    n = 3
    E, A = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    d = DhParam(sym(rng.standard_normal((n, n))), skew(rng.standard_normal((n, n))),
                sym(rng.standard_normal((n, n))), rng.standard_normal((n, n)))
    gT1, _, _, gQ1 = gradient(E, A, d, 1.0)
    gT2, _, _, gQ2 = gradient(E, A, d, 2.0)
    np.testing.assert_allclose(gT2, 2.0 * gT1, atol=1e-12)
    # the E-residual part of the Q gradient doubles; isolate it by
    # subtracting the A-residual part (mu-independent)
    gQ_a = 2.0 * (d.J - d.R).T @ ((d.J - d.R) @ d.Q - A)
    np.testing.assert_allclose(gQ2 - gQ_a, 2.0 * (gQ1 - gQ_a), atol=1e-10)


def test_project_examples():
    d = project(np.eye(2), np.zeros((2, 2)), np.diag([1.0, -1.0]), np.eye(2))
    np.testing.assert_allclose(d.R, np.diag([1.0, 0.0]), atol=1e-14)

    rng = np.random.default_rng(3)
    T = sym(rng.standard_normal((3, 3)))
    T = T @ T.T
    J = skew(rng.standard_normal((3, 3)))
    R = sym(rng.standard_normal((3, 3)))
    R = R @ R.T
    Q = rng.standard_normal((3, 3))
    d = project(T, J, R, Q)
    np.testing.assert_allclose(d.T, T, atol=1e-12)
    np.testing.assert_allclose(d.J, J, atol=1e-14)
    np.testing.assert_allclose(d.R, R, atol=1e-12)
    np.testing.assert_allclose(d.Q, Q)

    M = sym(rng.standard_normal((2, 2)))
    w, V = np.linalg.eigh(M)
    oracle = V @ np.diag(np.maximum(w, 0)) @ V.T
    np.testing.assert_allclose(project(M, np.zeros((2, 2)), M, np.eye(2)).T,
                               oracle, atol=1e-12)


def test_initialization_rule():
    rng = np.random.default_rng(4)
    E, A = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    d = initial_quadruple(E, A)
    np.testing.assert_allclose(d.Q, np.eye(4))
    np.testing.assert_allclose(d.T, project_psd(E), atol=1e-12)
    np.testing.assert_allclose(d.J, skew(A), atol=1e-14)
    np.testing.assert_allclose(d.R, project_psd(-sym(A)), atol=1e-12)


def test_estimate_lipschitz_identity_case():
    # at (T, J, R, Q) = (I, 0, I, I) with A = -I the extremal direction is
    # dT = dR = s, dQ = 2s for symmetric s, giving curvature 2 * 3 = 6
    d = DhParam(np.eye(3), np.zeros((3, 3)), np.eye(3), np.eye(3))
    L = estimate_lipschitz(np.eye(3), -np.eye(3), d, 1.0, iters=200)
    assert L == pytest.approx(6.0, rel=1e-3)


def test_solve_stable_input_is_fixed_point():
    res = solve_hurwitz(np.eye(3), -np.eye(3), FgmOptions(max_time_s=2.0))
    assert res.relative_error <= 1e-12
    assert res.admissible
    assert res.objective <= 1e-20


def test_solve_small_unstable_instance():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((3, 3)) + 0.5 * np.eye(3)
    E = np.eye(3)
    res = solve_hurwitz(E, A, FgmOptions(max_time_s=5.0))
    assert res.objective < np.sum(A * A) + np.sum(E * E)
    # every trace row is best-so-far, hence non-increasing
    objs = [row[1] for row in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(objs, objs[1:]))
    # final quadruple is feasible
    assert np.linalg.eigvalsh(res.dh.T)[0] >= -1e-10
    assert np.linalg.eigvalsh(res.dh.R)[0] >= -1e-10
    np.testing.assert_allclose(res.dh.J, -res.dh.J.T)
    # realized eigenvalues essentially in the closed left half-plane
    if res.admissible:
        rep = res.admissibility.spectrum
        assert rep.finite_eigenvalues.real.max() <= 1e-8


def test_orthogonal_conjugation_gives_identical_objective_sequence():
    rng = np.random.default_rng(6)
    n = 4
    A = rng.standard_normal((n, n)) + 0.3 * np.eye(n)
    E = np.eye(n) + 0.1 * rng.standard_normal((n, n))
    U = scipy.linalg.qr(rng.standard_normal((n, n)))[0]
    opts = FgmOptions(max_time_s=60.0, max_iters=400, init_step=0.05,
                      trace_every=1)
    res1 = solve_hurwitz(E, A, opts)
    res2 = solve_hurwitz(U.T @ E @ U, U.T @ A @ U, opts)
    o1 = np.array([r[1] for r in res1.trace])
    o2 = np.array([r[1] for r in res2.trace])
    m = min(len(o1), len(o2))
    np.testing.assert_allclose(o1[:m], o2[:m], rtol=1e-10, atol=1e-12)


def test_nan_inputs_abort_with_diagnostic():
    A = np.full((2, 2), np.nan)
    with pytest.raises((FloatingPointError, ValueError)):
        solve_hurwitz(np.eye(2), A, FgmOptions(max_time_s=1.0))


def test_option_validation():
    with pytest.raises(ValueError):
        FgmOptions(mu=0.0)
    with pytest.raises(ValueError):
        FgmOptions(alpha0=1.5)
    with pytest.raises(ValueError):
        FgmOptions(ls_shrink=1.0)
