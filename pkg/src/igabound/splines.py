"""Clamped knot vectors and Cox-de Boor evaluation of B-spline bases.

Basis values and derivatives are computed with the triangular
knot-difference scheme (Piegl & Tiller, algorithms A2.2/A2.3), vectorized
over evaluation points. On clamped knots with a non-degenerate span every
denominator is a positive knot difference, so the 0/0 = 0 convention of the
textbook recursion never has to be applied explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, OutOfDomain

__all__ = [
    "KnotVector",
    "BasisEval",
    "open_uniform_knots",
    "graded_knots",
    "eval_nonzero",
    "find_spans",
    "basis_ders",
    "collocation_matrix",
]


@dataclass(frozen=True, eq=False)
class KnotVector:
    """Clamped knot vector of a degree ``degree`` spline basis.

    The first and last knots are repeated ``degree + 1`` times and every
    interior knot is simple, so the basis is C^(degree-1) on the open domain.
    """

    degree: int
    knots: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = self.degree
        if not isinstance(p, (int, np.integer)) or p < 0:
            raise InvalidArgument(f"degree must be a non-negative integer, got {p!r}")
        t = np.array(self.knots, dtype=float)
        if t.ndim != 1 or len(t) < 2 * (p + 1):
            raise InvalidArgument("knot vector too short for the requested degree")
        if not np.all(np.isfinite(t)):
            raise InvalidArgument("knots must be finite")
        if np.any(np.diff(t) < 0):
            raise InvalidArgument("knots must be nondecreasing")
        a, b = t[0], t[-1]
        if not a < b:
            raise InvalidArgument("knot vector spans an empty domain")
        if np.any(t[: p + 1] != a) or np.any(t[-(p + 1):] != b):
            raise InvalidArgument("end knots must have multiplicity degree + 1")
        inner = t[p + 1: len(t) - p - 1]
        if inner.size and (inner[0] <= a or inner[-1] >= b or np.any(np.diff(inner) <= 0)):
            raise InvalidArgument("interior knots must be simple and strictly inside the domain")
        t.setflags(write=False)
        object.__setattr__(self, "degree", int(p))
        object.__setattr__(self, "knots", t)

    @property
    def n_basis(self) -> int:
        return len(self.knots) - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        p = self.degree
        return self.knots[p: len(self.knots) - p]

    @property
    def n_elements(self) -> int:
        return len(self.breakpoints) - 1

    def is_symmetric(self, tol: float = 0.0) -> bool:
        """True when the knots are mirror images about the domain midpoint."""
        a, b = self.domain
        return bool(np.all(np.abs(self.knots + self.knots[::-1] - (a + b)) <= tol))

    def __repr__(self):
        a, b = self.domain
        return f"KnotVector(degree={self.degree}, n_elements={self.n_elements}, domain=[{a}, {b}])"


@dataclass(frozen=True)
class BasisEval:
    """The ``p + 1`` possibly nonzero basis functions at a single point.

    ``values[i]`` belongs to basis function ``first_index + i``; ``derivs[k-1]``
    holds the k-th derivatives in the same layout.
    """

    first_index: int
    values: np.ndarray
    derivs: tuple[np.ndarray, ...] = ()


def _clamped(p: int, breaks: np.ndarray) -> KnotVector:
    knots = np.concatenate([np.full(p, breaks[0]), breaks, np.full(p, breaks[-1])])
    return KnotVector(p, knots)


def _check_mesh_args(p, n_elements, a, b):
    if not isinstance(p, (int, np.integer)) or p < 0:
        raise InvalidArgument(f"degree must be a non-negative integer, got {p!r}")
    if not isinstance(n_elements, (int, np.integer)) or n_elements < 1:
        raise InvalidArgument(f"n_elements must be a positive integer, got {n_elements!r}")
    if not a < b:
        raise InvalidArgument(f"domain requires a < b, got [{a}, {b}]")


def open_uniform_knots(p: int, n_elements: int, a: float, b: float) -> KnotVector:
    """Clamped knots with ``n_elements`` equal spans on [a, b]."""
    _check_mesh_args(p, n_elements, a, b)
    i = np.arange(n_elements + 1)
    breaks = a + i * ((b - a) / n_elements)
    breaks[-1] = b
    return _clamped(int(p), breaks)


def graded_knots(p: int, n_elements: int, a: float, b: float, stretch: float) -> KnotVector:
    """Clamped knots on a symmetric domain [-b, b], clustered towards 0.

    Break points are ``b * sinh(stretch * t) / sinh(stretch)`` for ``t``
    uniform in [-1, 1]. ``stretch = 0`` returns exactly
    ``open_uniform_knots(p, n_elements, a, b)``.
    """
    _check_mesh_args(p, n_elements, a, b)
    if not stretch >= 0:
        raise InvalidArgument(f"stretch must be >= 0, got {stretch!r}")
    if a != -b:
        raise InvalidArgument("graded knots need a domain symmetric about 0")
    if stretch == 0:
        return open_uniform_knots(p, n_elements, a, b)
    i = np.arange(n_elements + 1)
    # integer numerator keeps t exactly antisymmetric
    t = (2 * i - n_elements) / n_elements
    breaks = b * (np.sinh(stretch * t) / np.sinh(stretch))
    breaks[0], breaks[-1] = a, b
    return _clamped(int(p), breaks)


def find_spans(kv: KnotVector, x) -> np.ndarray:
    """Knot span index for each point; x = b maps to the last nonempty span."""
    p = kv.degree
    x = np.asarray(x, dtype=float)
    spans = np.searchsorted(kv.knots, x, side="right") - 1
    return np.clip(spans, p, kv.n_basis - 1)


def basis_ders(kv: KnotVector, x, max_deriv: int = 0, spans=None) -> np.ndarray:
    """Nonzero basis functions and their derivatives at many points.

    Returns an array of shape ``(len(x), max_deriv + 1, p + 1)``; entry
    ``[q, k, r]`` is the k-th derivative of basis ``spans[q] - p + r`` at
    ``x[q]``. No domain check is done here.
    """
    knots = kv.knots
    p = kv.degree
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if spans is None:
        spans = find_spans(kv, x)
    m = x.shape[0]
    n = min(max_deriv, p)

    ndu = np.empty((m, p + 1, p + 1))
    ndu[:, 0, 0] = 1.0
    left = np.empty((m, p + 1))
    right = np.empty((m, p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - x
        saved = np.zeros(m)
        for r in range(j):
            ndu[:, j, r] = right[:, r + 1] + left[:, j - r]
            temp = ndu[:, r, j - 1] / ndu[:, j, r]
            ndu[:, r, j] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        ndu[:, j, j] = saved

    ders = np.zeros((m, max_deriv + 1, p + 1))
    ders[:, 0, :] = ndu[:, :, p]
    if n == 0:
        return ders

    a = np.empty((m, 2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:, 0, 0] = 1.0
        for k in range(1, n + 1):
            d = np.zeros(m)
            rk, pk = r - k, p - k
            if r >= k:
                a[:, s2, 0] = a[:, s1, 0] / ndu[:, pk + 1, rk]
                d += a[:, s2, 0] * ndu[:, rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[:, s2, j] = (a[:, s1, j] - a[:, s1, j - 1]) / ndu[:, pk + 1, rk + j]
                d += a[:, s2, j] * ndu[:, rk + j, pk]
            if r <= pk:
                a[:, s2, k] = -a[:, s1, k - 1] / ndu[:, pk + 1, r]
                d += a[:, s2, k] * ndu[:, r, pk]
            ders[:, k, r] = d
            s1, s2 = s2, s1

    factor = p
    for k in range(1, n + 1):
        ders[:, k, :] *= factor
        factor *= p - k
    return ders


def eval_nonzero(kv: KnotVector, x: float, max_deriv: int = 0) -> BasisEval:
    """Evaluate the ``p + 1`` basis functions that may be nonzero at ``x``."""
    if max_deriv < 0:
        raise InvalidArgument("max_deriv must be >= 0")
    a, b = kv.domain
    if not a <= x <= b:
        raise OutOfDomain(f"x={x} outside [{a}, {b}]")
    span = find_spans(kv, np.array([x]))
    d = basis_ders(kv, np.array([x], dtype=float), max_deriv, spans=span)[0]
    return BasisEval(
        first_index=int(span[0]) - kv.degree,
        values=d[0].copy(),
        derivs=tuple(d[k].copy() for k in range(1, max_deriv + 1)),
    )


def collocation_matrix(kv: KnotVector, x, deriv: int = 0):
    """Sparse matrix B with ``B[q, j]`` = (derivative of) basis j at ``x[q]``."""
    from scipy import sparse

    x = np.asarray(x, dtype=float)
    a, b = kv.domain
    if np.any(x < a) or np.any(x > b):
        raise OutOfDomain(f"evaluation points outside [{a}, {b}]")
    p = kv.degree
    spans = find_spans(kv, x)
    vals = basis_ders(kv, x, deriv, spans=spans)[:, deriv, :]
    rows = np.repeat(np.arange(len(x)), p + 1)
    cols = (spans[:, None] - p + np.arange(p + 1)[None, :]).ravel()
    return sparse.csr_matrix((vals.ravel(), (rows, cols)), shape=(len(x), kv.n_basis))
