"""Tensor-product spline spaces, element enumeration and Dirichlet DOF maps.

Global numbering is lexicographic with x running fastest:
``global = i_y * N_x + i_x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .errors import InvalidArgument, SpaceTooSmall
from .splines import KnotVector


@dataclass(frozen=True, eq=False)
class TensorSpace:
    axes: tuple[KnotVector, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def n_basis_per_axis(self) -> tuple[int, ...]:
        return tuple(kv.n_basis for kv in self.axes)

    @property
    def n_basis(self) -> int:
        return int(np.prod(self.n_basis_per_axis))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(kv.degree for kv in self.axes)

    @property
    def domain(self) -> tuple[tuple[float, float], ...]:
        return tuple(kv.domain for kv in self.axes)

    def global_index(self, *idx: int) -> int:
        if len(idx) != self.dim:
            raise InvalidArgument("index arity does not match space dimension")
        if self.dim == 1:
            return int(idx[0])
        return int(idx[1]) * self.axes[0].n_basis + int(idx[0])

    def tensor_index(self, g: int) -> tuple[int, ...]:
        if self.dim == 1:
            return (int(g),)
        nx = self.axes[0].n_basis
        return (int(g) % nx, int(g) // nx)

    @cached_property
    def dofs(self) -> "DofMap":
        return interior_dofs(self)


@dataclass(frozen=True, eq=False)
class DofMap:
    """Map between global basis indices and interior (non-boundary) unknowns.

    ``interior_of_global[g]`` is the interior index of global basis ``g`` or
    -1 for a boundary function.
    """

    interior_of_global: np.ndarray
    global_of_interior: np.ndarray

    @property
    def n_interior(self) -> int:
        return len(self.global_of_interior)

    def expand(self, u_interior: np.ndarray) -> np.ndarray:
        """Full coefficient vector with zeros on the boundary functions."""
        u_interior = np.asarray(u_interior)
        full = np.zeros(len(self.interior_of_global) if u_interior.ndim == 1
                        else (len(self.interior_of_global),) + u_interior.shape[1:],
                        dtype=u_interior.dtype)
        full[self.global_of_interior] = u_interior
        return full


@dataclass(frozen=True)
class Element:
    spans: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]
    basis: np.ndarray


def build_space(axes) -> TensorSpace:
    axes = tuple(axes)
    if len(axes) not in (1, 2):
        raise InvalidArgument(f"a space needs 1 or 2 axes, got {len(axes)}")
    if not all(isinstance(kv, KnotVector) for kv in axes):
        raise InvalidArgument("axes must be KnotVector instances")
    return TensorSpace(axes)


def interior_dofs(space: TensorSpace) -> DofMap:
    """Drop the first and last basis function of every axis (u = 0 on the boundary)."""
    sizes = space.n_basis_per_axis
    if min(sizes) < 3:
        raise SpaceTooSmall(f"every axis needs at least 3 basis functions, got {sizes}")
    masks = []
    for n in sizes:
        m = np.ones(n, dtype=bool)
        m[0] = m[-1] = False
        masks.append(m)
    if space.dim == 1:
        keep = masks[0]
    else:
        keep = np.outer(masks[1], masks[0]).ravel()
    g = np.flatnonzero(keep)
    inv = np.full(space.n_basis, -1, dtype=np.int64)
    inv[g] = np.arange(len(g))
    return DofMap(inv, g)


def element_spans(kv: KnotVector) -> np.ndarray:
    """Span index of every nonempty knot interval."""
    t = kv.knots
    p = kv.degree
    idx = np.arange(p, kv.n_basis)
    return idx[t[idx + 1] > t[idx]]


def elements(space: TensorSpace) -> list[Element]:
    per_axis = []
    for kv in space.axes:
        spans = element_spans(kv)
        per_axis.append([(int(s), (float(kv.knots[s]), float(kv.knots[s + 1])),
                          np.arange(s - kv.degree, s + 1)) for s in spans])
    out = []
    if space.dim == 1:
        for s, bnd, ix in per_axis[0]:
            out.append(Element((s,), (bnd,), ix))
        return out
    nx = space.axes[0].n_basis
    for (sy, by, iy), (sx, bx, ix) in product(per_axis[1], per_axis[0]):
        basis = (iy[:, None] * nx + ix[None, :]).ravel()
        out.append(Element((sx, sy), (bx, by), basis))
    return out


def evaluate(space: TensorSpace, coeffs, *grids, deriv: int = 0) -> np.ndarray:
    """Evaluate the spline expansion with full-space ``coeffs`` on a tensor grid.

    1D returns ``values[i]`` at ``grids[0][i]``; 2D returns ``values[iy, ix]``.
    """
    from .splines import collocation_matrix

    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != space.n_basis:
        raise InvalidArgument("coefficient vector does not match the space")
    if len(grids) != space.dim:
        raise InvalidArgument(f"need {space.dim} grid arrays")
    if space.dim == 1:
        return collocation_matrix(space.axes[0], grids[0], deriv) @ coeffs
    bx = collocation_matrix(space.axes[0], grids[0], deriv)
    by = collocation_matrix(space.axes[1], grids[1], deriv)
    c = coeffs.reshape(space.axes[1].n_basis, space.axes[0].n_basis)
    return np.asarray(by @ (bx @ c.T).T)
