import numpy as np
import numpy.testing as npt
import pytest
from scipy import linalg as sla

from igabound.assembly import AssembledSystem, assemble, dump_coordinate, rayleigh
from igabound.errors import InvalidArgument
from igabound.model import ProblemSpec
from igabound.space import build_space
from igabound.splines import open_uniform_knots
from oracles import brute_force_assembly


def _box(n_el=8, p=1, half_width=1.0):
    spec = ProblemSpec("two-body", "constant", 1.0, half_width=half_width,
                       kappa_override=(1.0,), shift_override=1.5)
    space = build_space([open_uniform_knots(p, n_el, -half_width, half_width)])
    return spec, space


def test_hat_function_rows():
    spec, space = _box(n_el=8)
    sys_ = assemble(space, spec)
    h = 2.0 / 8
    K, M = sys_.K.toarray(), sys_.M.toarray()
    # constant effective potential 0.5: K = stiffness + 0.5 M
    S = K - 0.5 * M
    npt.assert_allclose(S[3, 2:5], [-1 / h, 2 / h, -1 / h], rtol=1e-14)
    npt.assert_allclose(M[3, 2:5], [h / 6, 2 * h / 3, h / 6], rtol=1e-14)


def test_mass_sums_to_area():
    spec, space = _box(n_el=13, p=4, half_width=3.0)
    full = assemble(space, spec, eliminate_boundary=False)
    assert abs(full.M.matrix.sum() - 6.0) < 1e-12


def test_against_brute_force_2d():
    spec = ProblemSpec("three-body", "gaussian", 0.7, half_width=3.0, mass_ratio=20)
    kv = open_uniform_knots(2, 4, -3.0, 3.0)
    space = build_space([kv, open_uniform_knots(2, 5, -3.0, 3.0)])
    fast = assemble(space, spec, eliminate_boundary=False)
    K_ref, M_ref = brute_force_assembly(space, spec, 3)
    npt.assert_allclose(fast.K.toarray(), K_ref, atol=1e-13)
    npt.assert_allclose(fast.M.toarray(), M_ref, atol=1e-13)


def test_against_brute_force_1d():
    spec = ProblemSpec("two-body", "lorentzian-cubed", 2.0, half_width=4.0)
    space = build_space([open_uniform_knots(3, 7, -4.0, 4.0)])
    fast = assemble(space, spec, eliminate_boundary=False)
    K_ref, M_ref = brute_force_assembly(space, spec, 4)
    npt.assert_allclose(fast.K.toarray(), K_ref, atol=1e-13)
    npt.assert_allclose(fast.M.toarray(), M_ref, atol=1e-13)


@pytest.mark.parametrize("dim", [1, 2])
def test_symmetric_and_spd(dim):
    if dim == 1:
        spec = ProblemSpec("two-body", "gaussian", 5.0, half_width=10.0)
        space = build_space([open_uniform_knots(5, 40, -10.0, 10.0)])
    else:
        spec = ProblemSpec("three-body", "gaussian", 0.34, half_width=6.0, mass_ratio=20)
        kv = open_uniform_knots(3, 10, -6.0, 6.0)
        space = build_space([kv, kv])
    s = assemble(space, spec)
    for A in (s.K, s.M):
        d = A.matrix - A.matrix.T
        assert d.nnz == 0 or np.max(np.abs(d.data)) == 0.0
        sla.cholesky(A.toarray(), lower=True)
    assert s.K.half_bandwidth <= (space.degrees[0] + 1) * (space.axes[0].n_basis if dim == 2 else 1)


def test_banded_storage_roundtrip():
    spec, space = _box(n_el=9, p=3)
    K = assemble(space, spec).K
    ab = K.banded_lower()
    dense = K.toarray()
    for i in range(K.n):
        for j in range(max(0, i - K.half_bandwidth), i + 1):
            assert ab[i - j, j] == dense[i, j]


def test_extra_quadrature_changes_nothing():
    from igabound.eigensolve import solve_smallest
    spec = ProblemSpec("two-body", "gaussian", 1.0, half_width=10.0)
    space = build_space([open_uniform_knots(4, 60, -10.0, 10.0)])
    a = solve_smallest(assemble(space, spec), k=3).values
    b = solve_smallest(assemble(space, spec, quad_points_per_dir=10), k=3).values
    npt.assert_allclose(a, b, atol=1e-10)


def test_threads_deterministic_bitwise():
    spec = ProblemSpec("three-body", "gaussian", 0.34, half_width=5.0, mass_ratio=20)
    kv = open_uniform_knots(3, 12, -5.0, 5.0)
    space = build_space([kv, kv])
    a = assemble(space, spec, threads=1)
    b = assemble(space, spec, threads=2, deterministic=True)
    c = assemble(space, spec, threads=1)
    for x, y in ((a, b), (a, c)):
        assert np.array_equal(x.K.matrix.indices, y.K.matrix.indices)
        assert np.array_equal(x.K.matrix.data, y.K.matrix.data)
        assert np.array_equal(x.M.matrix.data, y.M.matrix.data)


def test_rejects_mismatched_domain():
    spec = ProblemSpec("two-body", "gaussian", 1.0, half_width=2.0)
    with pytest.raises(InvalidArgument):
        assemble(build_space([open_uniform_knots(2, 4, -1.0, 1.0)]), spec)
    with pytest.raises(InvalidArgument):
        kv = open_uniform_knots(2, 4, -2.0, 2.0)
        assemble(build_space([kv, kv]), spec)


def test_rayleigh_hand_computed():
    from igabound.assembly import SymmetricSparse
    K = SymmetricSparse.from_csr(np.array([[2.0, 0.0], [0.0, 8.0]]))
    M = SymmetricSparse.from_csr(np.array([[1.0, 0.0], [0.0, 2.0]]))
    s = AssembledSystem(K, M, 0.0, None, None, None)
    assert rayleigh(s, [1.0, 0.0]) == 2.0
    assert rayleigh(s, [0.0, 3.0]) == 4.0
    assert rayleigh(s, [1.0, 1.0]) == pytest.approx(10 / 3, abs=1e-15)
    with pytest.raises(InvalidArgument):
        rayleigh(s, [0.0, 0.0])
    with pytest.raises(InvalidArgument):
        rayleigh(s, [1.0])


def test_dump_coordinate(tmp_path):
    spec, space = _box(n_el=4)
    s = assemble(space, spec)
    path = tmp_path / "K.coo"
    dump_coordinate(s.K, path)
    lines = path.read_text().splitlines()
    n, _, nnz = map(int, lines[0].lstrip("% ").split())
    assert n == s.n and nnz == len(lines) - 1
    A = np.zeros((n, n))
    for ln in lines[1:]:
        r, c, v = ln.split()
        A[int(r), int(c)] = float(v)
    assert np.array_equal(A, s.K.toarray())
