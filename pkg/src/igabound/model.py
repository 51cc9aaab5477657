"""Physical model: interaction shapes, diffusion coefficients and the spectral shift.

Both the two-body (1D) and three-body (2D) Hamiltonians are written as

    -div(kappa grad u) - gamma u = lambda u

with ``kappa`` diagonal and ``gamma >= 0`` the attractive interaction. A
constant ``shift`` is added to the potential so the discrete operator is
positive definite; reported eigenvalues are shifted back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import InvalidSpec

SHIFT_MARGIN = 1.0


class PotentialShape(str, Enum):
    LORENTZIAN_CUBED = "lorentzian-cubed"
    GAUSSIAN = "gaussian"
    # test mode: f == 1, gives a particle in a box
    CONSTANT = "constant"

    def __call__(self, xi):
        return shape_eval(self, xi)


class Kind(str, Enum):
    TWO_BODY = "two-body"
    THREE_BODY = "three-body"


def shape_eval(shape: PotentialShape, xi):
    shape = PotentialShape(shape)
    xi = np.asarray(xi, dtype=float)
    if shape is PotentialShape.LORENTZIAN_CUBED:
        out = 1.0 / (1.0 + xi * xi) ** 3
    elif shape is PotentialShape.GAUSSIAN:
        out = np.exp(-xi * xi)
    else:
        out = np.ones_like(xi)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ProblemSpec:
    kind: Kind
    shape: PotentialShape
    beta: float
    half_width: float = 20.0
    mass_ratio: float | None = None
    kappa_override: tuple[float, ...] | None = None
    shift_override: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", Kind(self.kind))
            object.__setattr__(self, "shape", PotentialShape(self.shape))
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from None
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise InvalidSpec("beta must be > 0")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise InvalidSpec("half_width must be > 0")
        if self.mass_ratio is not None and not self.mass_ratio > 0:
            raise InvalidSpec("mass_ratio must be > 0")
        if self.kappa_override is not None:
            kap = tuple(float(k) for k in np.atleast_1d(self.kappa_override))
            if len(kap) != self.dim:
                raise InvalidSpec(f"kappa override needs {self.dim} entries")
            if not all(k > 0 for k in kap):
                raise InvalidSpec("kappa entries must be > 0")
            object.__setattr__(self, "kappa_override", kap)
        if self.kind is Kind.THREE_BODY and self.mass_ratio is None and self.kappa_override is None:
            raise InvalidSpec("three-body problems need mass_ratio")
        if self.shift_override is not None and not self.shift_override > attraction_sup(self):
            raise InvalidSpec(
                f"shift {self.shift_override} must exceed the maximal attraction {attraction_sup(self)}")

    @property
    def dim(self) -> int:
        return 1 if self.kind is Kind.TWO_BODY else 2

    @property
    def domain(self) -> tuple[float, float]:
        return -self.half_width, self.half_width


def mass_coefficients(mass_ratio):
    """(alpha_x, alpha_y) for heavy/light mass ratio ``r``.

    Exact rational arithmetic is used when ``r`` is a ``Fraction`` or int.
    """
    r = mass_ratio
    if isinstance(r, int):
        r = Fraction(r)
    half = Fraction(1, 2) if isinstance(r, Fraction) else 0.5
    return (half + r) / (1 + r), 2 / (1 + r)


def kappa_of(spec: ProblemSpec):
    """Diagonal diffusion coefficient: a float in 1D, ``(kx, ky)`` in 2D."""
    if spec.kappa_override is not None:
        return spec.kappa_override[0] if spec.dim == 1 else spec.kappa_override
    if spec.kind is Kind.TWO_BODY:
        return 0.5
    if spec.mass_ratio is None:
        raise InvalidSpec("three-body problems need mass_ratio")
    ax, ay = mass_coefficients(float(spec.mass_ratio))
    return (ax / 2, ay / 2)


def gamma_attractive(spec: ProblemSpec, *coords):
    """Attractive interaction beta*f(x), or beta*(f(x + y/2) + f(x - y/2))."""
    if len(coords) != spec.dim:
        raise InvalidSpec(f"expected {spec.dim} coordinates, got {len(coords)}")
    f = spec.shape
    if spec.dim == 1:
        return spec.beta * shape_eval(f, coords[0])
    x, y = (np.asarray(c, dtype=float) for c in coords)
    return spec.beta * (shape_eval(f, x + 0.5 * y) + shape_eval(f, x - 0.5 * y))


def attraction_sup(spec: ProblemSpec) -> float:
    return spec.beta * (1.0 if spec.dim == 1 else 2.0)


def shift_of(spec: ProblemSpec) -> float:
    if spec.shift_override is not None:
        return float(spec.shift_override)
    return attraction_sup(spec) + SHIFT_MARGIN


def effective_gamma(spec: ProblemSpec, *coords):
    """Shifted, non-negative potential term used in the stiffness form."""
    return shift_of(spec) - gamma_attractive(spec, *coords)


def unshift(spec: ProblemSpec, lambda_solved):
    return lambda_solved - shift_of(spec)
