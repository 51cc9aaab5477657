"""Smallest eigenpairs of the generalized symmetric-definite problem K u = lambda M u.

Two independent paths are provided:

* ``dense``: Cholesky-factor M, reduce to the standard symmetric problem
  L^-1 K L^-T y = lambda y and diagonalize.
* ``iterative``: implicitly restarted Lanczos (ARPACK) in shift-invert mode
  at sigma = 0, with K factored once in banded Cholesky form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .assembly import AssembledSystem
from .errors import InvalidArgument, MatrixNotSPD, NoConvergence
from .space import TensorSpace, evaluate

log = logging.getLogger(__name__)

DENSE_LIMIT = 2000
DEFAULT_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Eigenpairs ordered by ascending energy.

    ``values`` are the reported (un-shifted) energies, ``solved`` the raw
    eigenvalues of the shifted problem. ``vectors[:, j]`` are interior
    coefficients, M-orthonormal and sign-normalized.
    """

    values: np.ndarray
    solved: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    shift: float
    path: str
    bound_flags: np.ndarray | None = None
    parity: tuple[str, ...] | None = None

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def n_bound(self) -> int:
        if self.bound_flags is None:
            raise ValueError("bound states not classified yet")
        return int(np.count_nonzero(self.bound_flags))


def normalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude coefficient is positive.

    Near-ties in magnitude (antisymmetric states have mirrored extrema) are
    broken by taking the lowest index within a relative 1e-6 of the maximum.
    """
    v = np.array(vectors, dtype=float, copy=True)
    for j in range(v.shape[1]):
        mag = np.abs(v[:, j])
        i = int(np.flatnonzero(mag >= (1 - 1e-6) * mag.max())[0])
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return v


def _residuals(system, lam, vecs):
    kv = system.K @ vecs
    r = kv - (system.M @ vecs) * lam[None, :]
    return np.linalg.norm(r, axis=0) / np.linalg.norm(kv, axis=0)


def _dense(system: AssembledSystem, k: int):
    K = system.K.toarray()
    M = system.M.toarray()
    try:
        L = sla.cholesky(M, lower=True)
    except sla.LinAlgError as exc:
        raise MatrixNotSPD(f"mass matrix is not positive definite: {exc}") from None
    try:
        sla.cholesky(K, lower=True, overwrite_a=False)
    except sla.LinAlgError as exc:
        raise MatrixNotSPD(f"stiffness matrix is not positive definite: {exc}") from None
    A = sla.solve_triangular(L, K, lower=True)
    A = sla.solve_triangular(L, A.T, lower=True)
    A = 0.5 * (A + A.T)
    lam, y = sla.eigh(A, subset_by_index=[0, k - 1])
    vecs = sla.solve_triangular(L.T, y, lower=False)
    return lam, vecs


def _iterative(system: AssembledSystem, k: int, tol: float, maxiter: int):
    try:
        cb = sla.cholesky_banded(system.K.banded_lower(), lower=True)
    except sla.LinAlgError as exc:
        raise MatrixNotSPD(f"stiffness matrix is not positive definite: {exc}") from None
    n = system.n
    op = LinearOperator((n, n), matvec=lambda x: sla.cho_solve_banded((cb, True), x),
                        dtype=float)
    ncv = min(n, max(2 * k + 1, 40))
    v0 = np.ones(n) / np.sqrt(n)
    try:
        lam, vecs = eigsh(system.K.matrix, k=k, M=system.M.matrix, sigma=0.0, OPinv=op,
                          which="LM", tol=tol * 1e-3, maxiter=maxiter, ncv=ncv, v0=v0)
    except ArpackNoConvergence as exc:
        res = _residuals(system, exc.eigenvalues, exc.eigenvectors) if len(exc.eigenvalues) else ()
        raise NoConvergence(f"Lanczos did not converge within {maxiter} restarts", res) from None
    return lam, vecs


def solve_smallest(system: AssembledSystem, k: int = 8, tol: float = DEFAULT_TOL,
                   path: str = "auto", maxiter: int | None = None) -> EigenSolution:
    """Compute the ``k`` smallest eigenpairs of ``system``.

    ``path`` is ``"auto"`` (dense up to 2000 unknowns), ``"dense"`` or
    ``"iterative"``. Every returned pair satisfies
    ``|K v - lam M v| / |K v| <= tol``; otherwise NoConvergence is raised.
    """
    n = system.n
    if not 1 <= k <= n:
        raise InvalidArgument(f"k must be in [1, {n}], got {k}")
    if path == "auto":
        path = "dense" if n <= DENSE_LIMIT else "iterative"
    if path == "iterative" and k >= n - 1:
        # ARPACK needs k < n - 1
        path = "dense"
    if maxiter is None:
        maxiter = 10 * k

    if path == "dense":
        lam, vecs = _dense(system, k)
    elif path == "iterative":
        lam, vecs = _iterative(system, k, tol, maxiter)
    else:
        raise InvalidArgument(f"unknown solver path {path!r}")

    order = np.argsort(lam, kind="stable")
    lam, vecs = lam[order], vecs[:, order]
    # M-orthonormalize (Cholesky-QR in the M inner product); the Ritz values are kept
    gram = vecs.T @ (system.M @ vecs)
    vecs = vecs @ np.linalg.inv(np.linalg.cholesky(0.5 * (gram + gram.T)).T)
    vecs = normalize_signs(vecs)
    res = _residuals(system, lam, vecs)
    bad = res > tol
    if np.any(bad):
        raise NoConvergence(f"{int(bad.sum())} pair(s) above residual tolerance {tol:g}", res)
    log.debug("solved %d pairs with %s path, max residual %.2e", k, path, res.max())
    return EigenSolution(values=lam - system.shift, solved=lam, vectors=vecs,
                         residuals=res, shift=system.shift, path=path)


def boundary_fraction(space: TensorSpace, coeffs_full, band: float = 0.05,
                      resolution: int | None = None) -> float:
    """max |u| in the outer ``band`` of every axis relative to max |u| overall."""
    grids = []
    for kv in space.axes:
        a, b = kv.domain
        m = resolution or (4001 if space.dim == 1 else 241)
        grids.append(np.linspace(a, b, m))
    vals = np.abs(evaluate(space, coeffs_full, *grids))
    near = np.zeros(vals.shape, dtype=bool)
    for axis, (kv, g) in enumerate(zip(space.axes, grids)):
        a, b = kv.domain
        w = band * 0.5 * (b - a)
        edge = (g <= a + w) | (g >= b - w)
        # vals is indexed [y, x] in 2D
        if space.dim == 1:
            near |= edge
        elif axis == 0:
            near |= edge[None, :]
        else:
            near |= edge[:, None]
    peak = vals.max()
    return float(vals[near].max() / peak) if peak > 0 else 0.0


def classify_bound(solution: EigenSolution, space: TensorSpace,
                   threshold: float = 0.02) -> EigenSolution:
    """Flag pairs with negative energy whose state has decayed near the boundary."""
    dofs = space.dofs
    flags = []
    for j in range(solution.k):
        if solution.values[j] >= 0:
            flags.append(False)
            continue
        frac = boundary_fraction(space, dofs.expand(solution.vectors[:, j]))
        flags.append(frac <= threshold)
    return replace(solution, bound_flags=np.array(flags, dtype=bool))
