"""Gauss-Legendre rules on [-1, 1] and their affine images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

MAX_POINTS = 64


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_rule(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` points on [-1, 1].

    Nodes are found by Newton iteration on the three-term Legendre
    recurrence, started from Chebyshev-like guesses. Only the non-negative
    half is iterated; the other half is mirrored so the rule is exactly
    symmetric.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_POINTS:
        raise InvalidArgument(f"number of points must be in [1, {MAX_POINTS}], got {n!r}")
    n = int(n)
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))

    m = (n + 1) // 2
    i = np.arange(1, m + 1)
    # roots in descending order, x_i ~ cos(pi (i - 1/4) / (n + 1/2))
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if n % 2:
        x[-1] = 0.0

    # x is descending positive half; build ascending full rule
    pos_x, pos_w = x[::-1], w[::-1]
    if n % 2:
        points = np.concatenate([-x, pos_x[1:]])
        weights = np.concatenate([w, pos_w[1:]])
    else:
        points = np.concatenate([-x, pos_x])
        weights = np.concatenate([w, pos_w])
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points, weights)


def map_rule(rule: QuadratureRule, a: float, b: float) -> QuadratureRule:
    """Affine image of ``rule`` on the interval [a, b]."""
    if not a < b:
        raise InvalidArgument(f"interval requires a < b, got [{a}, {b}]")
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return QuadratureRule(mid + half * rule.points, half * rule.weights)


def map_rule_batch(rule: QuadratureRule, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ``rule`` onto many intervals at once; returns arrays of shape (n_intervals, n_points)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    return mid + half * rule.points[None, :], half * rule.weights[None, :]
