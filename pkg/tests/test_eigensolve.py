import math
from dataclasses import replace

import numpy as np
import numpy.testing as npt
import pytest

from igabound.assembly import AssembledSystem, SymmetricSparse, assemble
from igabound.eigensolve import classify_bound, normalize_signs, solve_smallest
from igabound.errors import InvalidArgument, MatrixNotSPD, NoConvergence
from igabound.model import ProblemSpec
from igabound.space import build_space
from igabound.splines import open_uniform_knots
from igabound.studies import solve_problem, two_body_spec


def _raw(K, M, shift=0.0):
    return AssembledSystem(SymmetricSparse.from_csr(K), SymmetricSparse.from_csr(M), shift,
                           None, None, None)


@pytest.mark.parametrize("path", ["dense", "iterative"])
def test_diagonal_example(path):
    s = _raw(np.diag([2.0, 8.0, 30.0, 50.0]), np.diag([1.0, 2.0, 3.0, 5.0]))
    sol = solve_smallest(s, k=2, path=path)
    npt.assert_allclose(sol.values, [2.0, 4.0], atol=1e-12)
    # M-normalized: second vector is e2 / sqrt(2)
    npt.assert_allclose(sol.vectors[:, 1], [0, 1 / math.sqrt(2), 0, 0], atol=1e-12)


def test_dense_vs_iterative_random_spd():
    rng = np.random.default_rng(7)
    n = 50
    A = rng.standard_normal((n, n))
    K = A @ A.T + n * np.eye(n)
    B = rng.standard_normal((n, n))
    M = B @ B.T / n + np.eye(n)
    s = _raw(K, M)
    d = solve_smallest(s, k=8, path="dense")
    i = solve_smallest(s, k=8, path="iterative")
    npt.assert_allclose(d.values, i.values, atol=1e-10, rtol=0)
    npt.assert_allclose(np.abs(d.vectors.T @ M @ i.vectors), np.eye(8), atol=1e-7)


def test_dense_vs_iterative_physics():
    spec = two_body_spec("gaussian", 5.0, half_width=15.0)
    d, _ = solve_problem(spec, 5, 300, k=6, path="dense")
    i, _ = solve_problem(spec, 5, 300, k=6, path="iterative")
    npt.assert_allclose(d.values, i.values, atol=1e-9, rtol=0)


def _box_values(kappa, L, beta, k):
    return np.array([kappa * (j * math.pi / L) ** 2 - beta for j in range(1, k + 1)])


def test_box_oracle_1d():
    spec = ProblemSpec("two-body", "constant", 1.0, half_width=5.0)
    sol, _ = solve_problem(spec, 7, 200, k=6)
    npt.assert_allclose(sol.values, _box_values(0.5, 10.0, 1.0, 6), atol=1e-10, rtol=0)


def test_box_oracle_2d():
    spec = ProblemSpec("three-body", "constant", 0.5, half_width=2.0, kappa_override=(0.5, 0.25))
    sol, _ = solve_problem(spec, 6, 24, k=4)
    kx, ky, L = 0.5, 0.25, 4.0
    ex = sorted((kx * (a * math.pi / L) ** 2 + ky * (b * math.pi / L) ** 2 - 1.0)
                for a in range(1, 6) for b in range(1, 6))[:4]
    npt.assert_allclose(sol.values, ex, atol=1e-10, rtol=0)


def test_monotone_refinement_from_above():
    spec = two_body_spec("gaussian", 1.0, half_width=10.0)
    prev = np.inf
    exact = solve_problem(spec, 7, 400, k=1)[0].values[0]
    for n in (10, 20, 40, 80):
        lam = solve_problem(spec, 2, n, k=1)[0].values[0]
        assert exact - 1e-12 <= lam < prev
        prev = lam


def test_shift_invariance():
    a, _ = solve_problem(two_body_spec("lorentzian-cubed", 5.0, half_width=12.0), 5, 200, k=4)
    b, _ = solve_problem(two_body_spec("lorentzian-cubed", 5.0, half_width=12.0, shift_override=16.0),
                         5, 200, k=4)
    npt.assert_allclose(a.values, b.values, atol=1e-10, rtol=0)
    assert b.shift - a.shift == 10.0


def test_no_convergence_on_impossible_tol():
    spec = two_body_spec("gaussian", 1.0, half_width=10.0)
    with pytest.raises(NoConvergence) as exc:
        solve_problem(spec, 3, 50, k=3, tol=1e-20)
    assert len(exc.value.residuals) == 3


@pytest.mark.parametrize("path", ["dense", "iterative"])
def test_not_spd(path):
    K = np.diag([-1.0, 2.0, 3.0, 4.0, 5.0])
    with pytest.raises(MatrixNotSPD):
        solve_smallest(_raw(K, np.eye(5)), k=2, path=path)


def test_invalid_k_and_path():
    s = _raw(np.eye(3), np.eye(3))
    with pytest.raises(InvalidArgument):
        solve_smallest(s, k=0)
    with pytest.raises(InvalidArgument):
        solve_smallest(s, k=4)
    with pytest.raises(InvalidArgument):
        solve_smallest(s, k=1, path="magic")


def test_sign_normalization():
    v = np.array([[0.1, -0.5], [-0.9, 0.5], [0.2, 0.1]])
    out = normalize_signs(v)
    npt.assert_array_equal(out[:, 0], [-0.1, 0.9, -0.2])
    # tie in magnitude: lowest index decides
    npt.assert_array_equal(out[:, 1], [0.5, -0.5, -0.1])


def test_m_orthonormal():
    sol, sys_ = solve_problem(two_body_spec("gaussian", 5.0, half_width=10.0), 4, 100, k=5)
    G = sol.vectors.T @ (sys_.M @ sol.vectors)
    npt.assert_allclose(G, np.eye(5), atol=1e-12)


@pytest.mark.parametrize("shape,beta,n_bound", [
    ("gaussian", 1.0, 1), ("gaussian", 2.0, 2), ("lorentzian-cubed", 5.0, 2),
])
def test_classify_bound(shape, beta, n_bound):
    sol, sys_ = solve_problem(two_body_spec(shape, beta), 7, 400, k=6)
    sol = classify_bound(sol, sys_.space)
    assert sol.n_bound == n_bound
    assert np.all(sol.bound_flags[:n_bound])


def test_n_bound_requires_classification():
    sol, _ = solve_problem(two_body_spec("gaussian", 1.0, half_width=5.0), 2, 20, k=2)
    with pytest.raises(ValueError):
        sol.n_bound
    assert replace(sol, bound_flags=np.array([True, False])).n_bound == 1
