"""Independent oracles the test suite checks the library against.

These deliberately share no code with the implementations they verify:
the QP oracle is an accelerated projected-gradient method on the raw dual,
the attack oracle enumerates the whole Hamming ball, and KKT residuals are
computed straight from the optimality conditions.
"""

from __future__ import annotations

import numpy as np


def project_box_hyperplane(
    v: np.ndarray, lo: float, hi: float, a: np.ndarray, b: float
) -> np.ndarray:
    """Euclidean projection onto {lo <= x <= hi, a.x = b} for a in {-1,+1}^n."""

    def g(lam: float) -> float:
        return float(a @ np.clip(v - lam * a, lo, hi)) - b

    span = float(np.abs(v).max() + abs(hi) + abs(lo) + abs(b) + 1.0)
    lo_l, hi_l = -span, span
    while g(lo_l) < 0:
        lo_l *= 2.0
    while g(hi_l) > 0:
        hi_l *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo_l + hi_l)
        if g(mid) > 0:
            lo_l = mid
        else:
            hi_l = mid
    return np.clip(v - 0.5 * (lo_l + hi_l) * a, lo, hi)


def qp_box_equality(
    Q: np.ndarray,
    p: np.ndarray,
    lo: float,
    hi: float,
    a: np.ndarray,
    b: float,
    x0: np.ndarray,
    max_iter: int = 300_000,
    tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Accelerated projected gradient for min 0.5 x'Qx + p'x over the slab.

    Returns (x, objective).  Runs to convergence of the projected-gradient
    mapping, with monotone restarts for robustness on rank-deficient Q.
    """
    eigs = np.linalg.eigvalsh(Q)
    step = 1.0 / max(float(eigs[-1]), 1e-12)

    def obj(x: np.ndarray) -> float:
        return float(0.5 * x @ Q @ x + p @ x)

    x = project_box_hyperplane(x0, lo, hi, a, b)
    y = x.copy()
    t = 1.0
    fx = obj(x)
    stall = 0
    for _ in range(max_iter):
        x_new = project_box_hyperplane(y - step * (Q @ y + p), lo, hi, a, b)
        f_new = obj(x_new)
        if f_new > fx:  # restart momentum
            y = x.copy()
            t = 1.0
            x_new = project_box_hyperplane(y - step * (Q @ y + p), lo, hi, a, b)
            f_new = obj(x_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + (t - 1.0) / t_new * (x_new - x)
        move = float(np.abs(x_new - x).max())
        if abs(fx - f_new) < tol * (1.0 + abs(fx)) and move < 1e-10:
            stall += 1
            if stall > 50:
                return x_new, f_new
        else:
            stall = 0
        x, fx, t = x_new, f_new, t_new
    return x, fx


def svm_dual_oracle(X: np.ndarray, y: np.ndarray, c: float) -> tuple[np.ndarray, float]:
    """Max of the soft-margin SVM dual, via the projected-gradient QP oracle."""
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    p = -np.ones(len(y))
    alpha, f = qp_box_equality(Q, p, 0.0, c, y.astype(np.float64), 0.0, np.zeros(len(y)))
    return alpha, -f  # dual objective = -(min value)


def one_class_dual_oracle(K: np.ndarray, nu: float) -> tuple[np.ndarray, float]:
    """Min of the one-class nu-SVM dual 0.5 a'Ka with sum(a)=1, 0<=a<=1/(nu n)."""
    n = K.shape[0]
    upper = 1.0 / (nu * n)
    x0 = np.full(n, 1.0 / n)
    alpha, f = qp_box_equality(K, np.zeros(n), 0.0, upper, np.ones(n), 1.0, x0)
    return alpha, f


def svm_kkt_residual(X: np.ndarray, y: np.ndarray, alpha: np.ndarray, w: np.ndarray, b: float, c: float) -> float:
    """Worst complementary-slackness violation of a soft-margin solution."""
    margins = y * (X @ w + b)
    res = np.where(
        alpha <= 1e-9 * c,
        np.maximum(0.0, 1.0 - margins),
        np.where(alpha >= c * (1 - 1e-9), np.maximum(0.0, margins - 1.0), np.abs(margins - 1.0)),
    )
    return float(res.max())


def one_class_kkt_residual(K: np.ndarray, alpha: np.ndarray, rho: float, upper: float) -> float:
    f = K @ alpha  # = rho + decision value
    res = np.where(
        alpha <= 1e-9 * upper,
        np.maximum(0.0, rho - f),
        np.where(alpha >= upper * (1 - 1e-9), np.maximum(0.0, f - rho), np.abs(f - rho)),
    )
    return float(res.max())


_MASK_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _all_masks(d: int) -> tuple[np.ndarray, np.ndarray]:
    if d not in _MASK_CACHE:
        codes = np.arange(1 << d, dtype=np.uint32)
        bits = ((codes[:, None] >> np.arange(d)) & 1).astype(np.float64)
        _MASK_CACHE[d] = (bits, bits.sum(axis=1))
    return _MASK_CACHE[d]


def hamming_ball_minimum(x: np.ndarray, w: np.ndarray, w0: float, n_max: int) -> float:
    """Exhaustive minimum of w.x' + w0 over Hamming(x, x') <= n_max (d <= 16)."""
    bits, popcount = _all_masks(len(x))
    flips = bits[popcount <= n_max]
    candidates = np.abs(x[None, :] - flips)  # flip x where the mask is set
    return float((candidates @ w).min() + w0)
