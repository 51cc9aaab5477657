"""Galerkin stiffness and mass matrices by element-wise Gauss quadrature.

    K_kl = (kappa grad phi_k, grad phi_l) + (gamma_eff phi_k, phi_l)
    M_kl = (phi_k, phi_l)

``gamma_eff`` is the shifted (non-negative) potential, so K is SPD on the
zero-boundary space. Element blocks are computed in vectorized batches
(one row of elements at a time in 2D), only their lower triangles are
scattered, and the strict lower triangle is mirrored at the end so the
result is exactly symmetric.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import InvalidArgument
from .model import ProblemSpec, effective_gamma, kappa_of, shift_of
from .quadrature import gauss_rule, map_rule_batch
from .space import DofMap, TensorSpace, element_spans
from .splines import KnotVector, basis_ders


@dataclass(frozen=True, eq=False)
class SymmetricSparse:
    matrix: sparse.csr_matrix
    half_bandwidth: int

    @classmethod
    def from_csr(cls, a) -> "SymmetricSparse":
        a = sparse.csr_matrix(a)
        coo = a.tocoo()
        bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        return cls(a, bw)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, other):
        return self.matrix @ other

    def banded_lower(self) -> np.ndarray:
        """LAPACK lower band storage: ``ab[i - j, j] = A[i, j]`` for i >= j."""
        low = sparse.tril(self.matrix).tocoo()
        ab = np.zeros((self.half_bandwidth + 1, self.n))
        ab[low.row - low.col, low.col] = low.data
        return ab


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    K: SymmetricSparse
    M: SymmetricSparse
    shift: float
    space: TensorSpace
    spec: ProblemSpec
    dof_map: DofMap | None

    @property
    def n(self) -> int:
        return self.K.n


@dataclass(frozen=True)
class _AxisData:
    """Basis values/derivatives at the quadrature points of every element of one axis."""
    kv: KnotVector
    spans: np.ndarray      # (n_el,)
    points: np.ndarray     # (n_el, nq)
    weights: np.ndarray    # (n_el, nq)
    values: np.ndarray     # (n_el, nq, p+1)
    grads: np.ndarray      # (n_el, nq, p+1)
    first: np.ndarray      # (n_el,) first supported basis index


def _axis_data(kv: KnotVector, nq: int) -> _AxisData:
    spans = element_spans(kv)
    lo, hi = kv.knots[spans], kv.knots[spans + 1]
    pts, wts = map_rule_batch(gauss_rule(nq), lo, hi)
    d = basis_ders(kv, pts.ravel(), 1, spans=np.repeat(spans, nq))
    d = d.reshape(len(spans), nq, 2, kv.degree + 1)
    return _AxisData(kv, spans, pts, wts, d[:, :, 0, :], d[:, :, 1, :], spans - kv.degree)


def _lower_coo(rows, cols, blocks, n):
    # rows/cols: (n_el, nloc), blocks: (n_el, nloc, nloc)
    r = np.broadcast_to(rows[:, :, None], blocks.shape)
    c = np.broadcast_to(cols[:, None, :], blocks.shape)
    keep = r >= c
    return sparse.csr_matrix((blocks[keep], (r[keep], c[keep])), shape=(n, n))


def _mirror(lower) -> sparse.csr_matrix:
    lower = sparse.tril(lower).tocsr()
    full = lower + sparse.tril(lower, k=-1).T
    full = full.tocsr()
    full.sort_indices()
    return full


def _assemble_1d(space: TensorSpace, spec: ProblemSpec, nq: int):
    ax = _axis_data(space.axes[0], nq)
    kappa = float(kappa_of(spec))
    gam = effective_gamma(spec, ax.points)
    w = ax.weights
    mass = np.einsum("eq,eqa,eqb->eab", w, ax.values, ax.values)
    stiff = kappa * np.einsum("eq,eqa,eqb->eab", w, ax.grads, ax.grads)
    stiff += np.einsum("eq,eqa,eqb->eab", w * gam, ax.values, ax.values)
    idx = ax.first[:, None] + np.arange(ax.kv.degree + 1)[None, :]
    n = space.n_basis
    return [(_lower_coo(idx, idx, stiff, n), _lower_coo(idx, idx, mass, n))]


def _row_task_2d(ey, axx, axy, kx, ky, spec, nx, n):
    """Element blocks for the row of elements with y-index ``ey``."""
    px1 = axx.kv.degree + 1
    py1 = axy.kv.degree + 1
    wx, wy = axx.weights, axy.weights[ey]
    bx, gx = axx.values, axx.grads
    by, gy = axy.values[ey], axy.grads[ey]

    mx = np.einsum("eq,eqa,eqb->eab", wx, bx, bx)
    sx = np.einsum("eq,eqa,eqb->eab", wx, gx, gx)
    my = np.einsum("q,qa,qb->ab", wy, by, by)
    sy = np.einsum("q,qa,qb->ab", wy, gy, gy)

    # local layout [e, ay, ax, by, bx] -> flattened local index ay*px1 + ax
    mass = np.einsum("eab,cd->ecadb", mx, my)
    stiff = kx * np.einsum("eab,cd->ecadb", sx, my) + ky * np.einsum("eab,cd->ecadb", mx, sy)

    xq = axx.points[:, :, None]
    yq = axy.points[ey][None, None, :]
    gam = effective_gamma(spec, xq, yq)                         # (e, qx, qy)
    ty = np.einsum("q,qa,qb->qab", wy, by, by)                  # (qy, ay, by)
    tx = np.einsum("eq,eqa,eqb->eqab", wx, bx, bx)              # (e, qx, ax, bx)
    tmp = np.einsum("exq,qcd->excd", gam, ty, optimize=True)    # (e, qx, ay, by)
    stiff += np.einsum("exab,excd->ecadb", tx, tmp, optimize=True)

    ne = len(axx.spans)
    nloc = px1 * py1
    stiff = stiff.reshape(ne, nloc, nloc)
    mass = mass.reshape(ne, nloc, nloc)
    iy = axy.first[ey] + np.arange(py1)
    ix = axx.first[:, None] + np.arange(px1)[None, :]
    idx = (iy[None, :, None] * nx + ix[:, None, :]).reshape(ne, nloc)
    return _lower_coo(idx, idx, stiff, n), _lower_coo(idx, idx, mass, n)


def _assemble_2d(space, spec, nq, threads, deterministic):
    axx = _axis_data(space.axes[0], nq[0])
    axy = _axis_data(space.axes[1], nq[1])
    kx, ky = (float(k) for k in kappa_of(spec))
    nx = space.axes[0].n_basis
    n = space.n_basis
    rows = range(len(axy.spans))
    args = (axx, axy, kx, ky, spec, nx, n)
    if threads <= 1:
        return (_row_task_2d(ey, *args) for ey in rows)
    pool = ThreadPoolExecutor(max_workers=threads)
    futures = [pool.submit(_row_task_2d, ey, *args) for ey in rows]

    def ordered():
        try:
            it = futures if deterministic else as_completed(futures)
            for f in it:
                yield f.result()
        finally:
            pool.shutdown(wait=True)
    return ordered()


def assemble(space: TensorSpace, spec: ProblemSpec, quad_points_per_dir: int | None = None,
             eliminate_boundary: bool = True, threads: int = 1,
             deterministic: bool = True) -> AssembledSystem:
    """Assemble K and M over ``space`` for ``spec``.

    Parameters
    ----------
    quad_points_per_dir : int, optional
        Gauss points per element and direction; defaults to ``p + 1``.
    eliminate_boundary : bool
        Remove the rows and columns of the basis functions that are nonzero
        on the boundary, imposing u = 0 there.
    threads : int
        Worker threads for 2D element rows. With ``deterministic`` the
        contributions are summed in a fixed order, so results are bitwise
        reproducible; otherwise they are summed as workers finish.
    """
    if space.dim != spec.dim:
        raise InvalidArgument(f"space is {space.dim}D but the problem is {spec.dim}D")
    lo, hi = spec.domain
    for kv in space.axes:
        if kv.domain != (lo, hi):
            raise InvalidArgument(f"axis domain {kv.domain} differs from problem domain {(lo, hi)}")
    if quad_points_per_dir is None:
        nq = tuple(kv.degree + 1 for kv in space.axes)
    else:
        if quad_points_per_dir < 1:
            raise InvalidArgument("quad_points_per_dir must be >= 1")
        nq = (int(quad_points_per_dir),) * space.dim
    if threads is None or threads < 1:
        threads = os.cpu_count() or 1

    if space.dim == 1:
        parts = _assemble_1d(space, spec, nq[0])
    else:
        parts = _assemble_2d(space, spec, nq, threads, deterministic)

    k_low = m_low = None
    for kc, mc in parts:
        k_low = kc if k_low is None else k_low + kc
        m_low = mc if m_low is None else m_low + mc
    K, M = _mirror(k_low), _mirror(m_low)

    dof_map = None
    if eliminate_boundary:
        dof_map = space.dofs
        g = dof_map.global_of_interior
        K = K[g][:, g]
        M = M[g][:, g]
    return AssembledSystem(SymmetricSparse.from_csr(K), SymmetricSparse.from_csr(M),
                           shift_of(spec), space, spec, dof_map)


def rayleigh(system: AssembledSystem, u) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != (system.n,):
        raise InvalidArgument(f"vector length {u.shape} does not match system size {system.n}")
    den = u @ (system.M @ u)
    if not np.any(u) or den == 0:
        raise InvalidArgument("Rayleigh quotient of the zero vector")
    return float(u @ (system.K @ u) / den)


def dump_coordinate(matrix, path) -> None:
    """Write ``row col value`` lines (0-based, 17 significant digits)."""
    a = matrix.matrix if isinstance(matrix, SymmetricSparse) else sparse.csr_matrix(matrix)
    coo = a.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"% {a.shape[0]} {a.shape[1]} {coo.nnz}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
