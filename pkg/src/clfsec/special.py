"""Scalar special functions needed by the Gamma maximum-likelihood fit.

``digamma`` and ``trigamma`` use the standard upward recurrence to push the
argument above 10, then the Bernoulli asymptotic series; absolute accuracy
is better than 1e-12 on (0, inf).  ``gammaln`` delegates to the C library.
"""

from __future__ import annotations

import math

__all__ = ["digamma", "trigamma", "gammaln"]

gammaln = math.lgamma

# Bernoulli numbers B_2..B_14 over their indices, for psi(x) ~ ln x - 1/2x - sum B_2n/(2n x^2n)
_DIGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_2n for psi'(x) ~ 1/x + 1/2x^2 + sum B_2n/x^(2n+1)
_TRIGAMMA_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)

_ASYMPTOTIC_CUTOFF = 10.0


def digamma(x: float) -> float:
    """psi(x) = d/dx ln Gamma(x), for x > 0."""
    if x <= 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < _ASYMPTOTIC_CUTOFF:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    term = inv2
    for c in _DIGAMMA_COEF:
        series += c * term
        term *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """psi'(x), for x > 0."""
    if x <= 0.0:
        raise ValueError(f"trigamma requires x > 0, got {x}")
    acc = 0.0
    while x < _ASYMPTOTIC_CUTOFF:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    term = inv * inv2
    for c in _TRIGAMMA_COEF:
        series += c * term
        term *= inv2
    return acc + inv + 0.5 * inv2 + series
