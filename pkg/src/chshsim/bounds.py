"""Analytic tail and expectation bounds for the CHSH statistics.

These are the closed-form upper limits against which simulated and
enumerated frequencies are compared: the Gaussian tail estimate
``f_delta`` for the linear statistic, its 5x counterpart for the ratio
statistic, and the memory-model expectation bound.  Entries that no
known proof covers are reported as ``None`` and rendered as "unknown".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_3 = math.sqrt(3.0)


def normal_cdf(z: float) -> float:
    """Standard normal distribution function, accurate to well below 1e-10."""
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z!r}")
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def normal_tail_approx(z: float) -> float:
    """Leading-order upper tail, exp(-z^2/2) / (z sqrt(2 pi)).

    Valid for z large compared to 1; it upper-bounds the exact tail for
    every z >= 1.
    """
    if z <= 0:
        raise ValueError(f"tail approximation needs z > 0, got {z}")
    return math.exp(-0.5 * z * z) / (z * _SQRT_2PI)


def f_delta(n: int, delta: float) -> float:
    """Tail bound on P(Y_N > 3 + delta) under any memory model.

    Equals sqrt(3) / (delta sqrt(2 pi N)) * exp(-delta^2 N / 6).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return (_SQRT_3 / (delta * math.sqrt(n) * _SQRT_2PI)) * math.exp(-delta * delta * n / 6.0)


def x_tail_bound(n: int, delta: float) -> float:
    """Tail bound on P(X_N > (3 + delta) / (1 - delta)): five times f_delta."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return 5.0 * f_delta(n, delta)


def x_mean_bound(n: int, epsilon: float) -> float:
    """Upper bound on E(X_N) for memory models, any epsilon > 0.

    3 + 5 N^(-1/2+eps) + 5 sqrt(3/(2 pi)) N^(-eps) exp(-N^(2 eps)/6);
    the excess over 3 decays faster than N^(-1/2+eps).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    poly = 5.0 * n ** (-0.5 + epsilon)
    exp_term = 5.0 * math.sqrt(3.0 / (2.0 * math.pi)) * n ** (-epsilon) * math.exp(
        -(n ** (2.0 * epsilon)) / 6.0
    )
    return 3.0 + poly + exp_term


@dataclass(frozen=True)
class BoundReport:
    """Bound values for one (n, delta[, epsilon]) configuration."""

    n: int
    delta: float
    epsilon: float | None
    f_value: float
    x_tail_bound: float
    x_mean_bound: float | None


def bound_report(n: int, delta: float, epsilon: float | None = None) -> BoundReport:
    """Evaluate all closed-form bounds at one configuration."""
    return BoundReport(
        n=n,
        delta=delta,
        epsilon=epsilon,
        f_value=f_delta(n, delta),
        x_tail_bound=x_tail_bound(n, delta),
        x_mean_bound=None if epsilon is None else x_mean_bound(n, epsilon),
    )


@dataclass(frozen=True)
class ModelBounds:
    """One table row; ``None`` marks entries with no known proof."""

    e_x: float | None
    p_x_tail: float | None
    e_y: float | None
    p_y_tail: float | None


@dataclass(frozen=True)
class ModelBoundsTable:
    """Proven bounds per model class at one (n, delta, epsilon)."""

    n: int
    delta: float
    epsilon: float
    rows: dict[str, ModelBounds]


MODEL_CLASSES = ("memoryless", "one-sided", "collective", "two-sided")


def bounds_table(n: int, delta: float, epsilon: float) -> ModelBoundsTable:
    """The four-row summary of proven bounds.

    Requires delta small enough that (3 + delta) < (3 + 5 delta)(1 - delta),
    i.e. 0 < delta < 1/5, so the ratio-statistic tail event simplifies to
    "exceeds 3 + 5 delta".
    """
    if delta <= 0 or not (3.0 + delta) < (3.0 + 5.0 * delta) * (1.0 - delta):
        raise ValueError(
            f"delta={delta} must satisfy 0 < delta and (3+delta) < (3+5*delta)*(1-delta)"
        )
    f = f_delta(n, delta)
    x_tail = 5.0 * f
    memory_e_x = x_mean_bound(n, epsilon)
    rows = {
        "memoryless": ModelBounds(e_x=3.0, p_x_tail=x_tail, e_y=3.0, p_y_tail=f),
        "one-sided": ModelBounds(e_x=memory_e_x, p_x_tail=x_tail, e_y=3.0, p_y_tail=f),
        "collective": ModelBounds(e_x=None, p_x_tail=None, e_y=3.0, p_y_tail=None),
        "two-sided": ModelBounds(e_x=memory_e_x, p_x_tail=x_tail, e_y=3.0, p_y_tail=f),
    }
    return ModelBoundsTable(n=n, delta=delta, epsilon=epsilon, rows=rows)
