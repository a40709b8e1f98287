"""Trainers and deciders for the four classifier families.

* soft-margin linear SVM, trained by pairwise dual coordinate ascent
  (SMO with maximal-violating-pair selection) to a duality-gap criterion;
* logistic regression, trained by single-sample online gradient descent;
* one-class nu-SVM with an RBF kernel, same SMO core on the one-class dual;
* likelihood-ratio score fusion backed by per-class products of Gamma
  densities fitted by Newton maximum likelihood.

All model families expose a common scalar score through
:func:`decision_score`, oriented so that *larger means more malicious*;
thresholding it at 0 reproduces each family's native decision rule.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Union

import numpy as np

from .data_model import Dataset, Label
from .rng import derive_rng
from .special import digamma, gammaln, trigamma

__all__ = [
    "LinearModel",
    "OneClassModel",
    "FusionModel",
    "TrainedModel",
    "ClassifierConfig",
    "train_linear_svm",
    "train_logistic_regression",
    "logistic_loss_gradient",
    "train_one_class_svm",
    "rbf_kernel",
    "fit_gamma_mle",
    "fit_gamma_product",
    "llr_decide",
    "llr_score",
    "decision_score",
    "decision_scores",
    "train_classifier",
    "save_model",
    "load_model",
]

Score = float


@dataclass(frozen=True)
class LinearModel:
    """Linear discriminant g(x) = w . x + bias; g >= 0 means malicious."""

    weights: np.ndarray
    bias: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise ValueError("linear model has non-finite entries")

    @property
    def dimension(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class OneClassModel:
    """nu-one-class SVM: inlier iff sum_i alpha_i k(x_i, x) >= offset."""

    support_vectors: np.ndarray
    dual_coefficients: np.ndarray
    offset: float
    kernel_gamma: float
    nu: float

    @property
    def dimension(self) -> int:
        return self.support_vectors.shape[1]

    def kernel_sum(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        d2 = ((x[:, None, :] - self.support_vectors[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-self.kernel_gamma * d2) @ self.dual_coefficients


@dataclass(frozen=True)
class FusionModel:
    """Per-class product-of-Gammas score densities plus a decision threshold.

    ``shapes``/``scales`` are (2, 2) arrays indexed [class, feature] with
    class 0 = legitimate (genuine), class 1 = malicious (impostor), and
    features (fingerprint, face).
    """

    shapes: np.ndarray
    scales: np.ndarray
    threshold: float = 1.0

    dimension = 2

    def class_log_density(self, label: Label, x: np.ndarray) -> np.ndarray:
        c = 0 if label is Label.LEGITIMATE else 1
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.zeros(x.shape[0])
        for f in range(2):
            k, th = self.shapes[c, f], self.scales[c, f]
            v = x[:, f]
            with np.errstate(divide="ignore", invalid="ignore"):
                term = (k - 1) * np.log(v) - v / th - gammaln(k) - k * np.log(th)
            out = out + np.where(v > 0, term, -np.inf)
        return out


TrainedModel = Union[LinearModel, OneClassModel, FusionModel]


# ---------------------------------------------------------------------------
# SMO core
# ---------------------------------------------------------------------------


class _ColumnCache:
    """Bounded memo of kernel columns, keyed by training index."""

    def __init__(self, compute: Callable[[int], np.ndarray], max_entries: int = 4096):
        self._compute = compute
        self._max = max_entries
        self._cols: dict[int, np.ndarray] = {}

    def __getitem__(self, i: int) -> np.ndarray:
        col = self._cols.get(i)
        if col is None:
            col = self._compute(i)
            if len(self._cols) >= self._max:
                self._cols.pop(next(iter(self._cols)))
            self._cols[i] = col
        return col


def _smo_pair_loop(
    grad: np.ndarray,
    alpha: np.ndarray,
    upper: float,
    y: np.ndarray,
    columns: _ColumnCache,
    diag: np.ndarray,
    eps: float,
    max_iter: int,
) -> float:
    """Minimize 0.5 a'Qa + p'a s.t. sum(y*a) const, 0 <= a <= upper.

    Pairs are chosen by second-order working-set selection: ``i`` is the
    most violating coordinate, ``j`` maximizes the analytic decrease of the
    objective along the (i, j) direction, which avoids the slow zigzag of
    plain maximal-violating-pair selection on ill-conditioned kernels.

    ``grad`` holds the current gradient Qa + p and is updated in place, as
    is ``alpha``.  Returns the maximal-violating-pair gap at exit, which is
    <= eps unless the update budget ran out first.
    """
    gap = np.inf
    for _ in range(max_iter):
        neg_yg = -y * grad
        up = ((y > 0) & (alpha < upper)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < upper)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            return 0.0
        i = int(np.flatnonzero(up)[np.argmax(neg_yg[up])])
        gap = float(neg_yg[i] - neg_yg[low].min())
        if gap <= eps:
            return gap
        col_i = columns[i]
        # objective decrease along (i, t) is b^2 / (2 eta); pick the best t
        b_it = neg_yg[i] - neg_yg
        eta_it = np.maximum(diag[i] + diag - 2.0 * col_i, 1e-12)
        decrease = np.where(low & (b_it > 0.0), b_it * b_it / eta_it, -np.inf)
        j = int(np.argmax(decrease))
        col_j = columns[j]
        # feasible direction d_i = y_i, d_j = -y_j keeps sum(y*a) constant
        lam = b_it[j] / eta_it[j]
        lam = min(lam, (upper - alpha[i]) if y[i] > 0 else alpha[i])
        lam = min(lam, (upper - alpha[j]) if y[j] < 0 else alpha[j])
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        grad += lam * y * (col_i - col_j)
    return gap


def train_linear_svm(
    train: Dataset, c_param: float, tolerance: float = 1e-6, with_dual: bool = False
):
    """Soft-margin linear SVM solved in the dual.

    Stops when the maximal-violating-pair gap is below ``tolerance`` and
    the duality gap is below ``tolerance * (1 + |primal objective|)``.
    ``with_dual=True`` additionally returns the dual coefficients, for
    optimality diagnostics.
    """
    if c_param <= 0 or tolerance <= 0:
        raise ValueError("c_param and tolerance must be positive")
    counts = train.class_counts()
    if min(counts.values()) == 0:
        raise ValueError("degenerate training set: both classes required")
    X = train.features
    y = train.signed_labels()
    n = len(train)

    columns = _ColumnCache(lambda i: X @ X[i])
    diag = np.einsum("ij,ij->i", X, X)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q alpha - 1 at alpha = 0
    pair_eps = min(tolerance, 1e-6)

    chunk = max(2000, 20 * n)
    for _ in range(200):
        gap = _smo_pair_loop(grad, alpha, c_param, y, columns, diag, pair_eps, chunk)
        w = X.T @ (alpha * y)
        b = _best_bias(X, y, w, c_param)
        dual_obj = alpha.sum() - 0.5 * float(w @ w)
        primal = 0.5 * float(w @ w) + c_param * np.maximum(0.0, 1.0 - y * (X @ w + b)).sum()
        if gap <= pair_eps:
            if primal - dual_obj <= tolerance * (1.0 + abs(primal)):
                model = LinearModel(w, b)
                return (model, alpha) if with_dual else model
            if pair_eps <= 1e-14:
                break
            pair_eps /= 10.0  # pairwise optimal but duality gap still too wide
    raise RuntimeError(
        "linear SVM failed to reach the requested duality gap; the dual is "
        "badly conditioned (large feature scale and/or C) -- consider "
        "rescaling features or loosening the tolerance"
    )


def _best_bias(X: np.ndarray, y: np.ndarray, w: np.ndarray, c_param: float) -> float:
    """Bias minimizing the primal hinge sum for fixed w (piecewise linear)."""
    margins = X @ w
    breakpoints = y - margins
    losses = [
        float(np.maximum(0.0, 1.0 - y * (margins + b)).sum()) for b in breakpoints
    ]
    return float(breakpoints[int(np.argmin(losses))])


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------


def logistic_loss_gradient(
    weights: np.ndarray, bias: float, X: np.ndarray, z: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Total logistic loss and its gradient wrt (weights, bias).

    ``z`` holds +/-1 targets (+1 malicious).  Numerically stable for large
    margins.
    """
    margins = z * (X @ weights + bias)
    loss = float(np.logaddexp(0.0, -margins).sum())
    p = np.exp(-np.logaddexp(0.0, margins))  # sigmoid(-margin)
    coeff = -z * p
    return loss, X.T @ coeff, float(coeff.sum())


def train_logistic_regression(
    train: Dataset,
    learning_rate_schedule: float | Callable[[int], float] = 0.1,
    epochs: int = 10,
    seed: int = 0,
) -> LinearModel:
    """Online (single-sample) gradient descent on the logistic loss.

    A float schedule argument eta0 means eta_t = eta0 / (1 + t/T) with T
    the training-set size and t the global update counter; a callable is
    used directly.  Weights start at zero, sample order is reshuffled each
    epoch from ``seed``, and no regularization is applied.
    """
    counts = train.class_counts()
    if min(counts.values()) == 0:
        raise ValueError("degenerate training set: both classes required")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    X = train.features
    z = train.signed_labels()
    n, d = X.shape
    if callable(learning_rate_schedule):
        rate = learning_rate_schedule
    else:
        eta0 = float(learning_rate_schedule)
        rate = lambda t: eta0 / (1.0 + t / n)  # noqa: E731

    rng = derive_rng(seed, "train")
    w = np.zeros(d)
    b = 0.0
    t = 0
    for epoch in range(epochs):
        for i in rng.permutation(n):
            margin = z[i] * (X[i] @ w + b)
            p = float(np.exp(-np.logaddexp(0.0, margin)))
            eta = rate(t)
            w += eta * z[i] * p * X[i]
            b += eta * z[i] * p
            t += 1
        loss, _, _ = logistic_loss_gradient(w, b, X, z)
        if not (np.isfinite(loss) and np.all(np.isfinite(w)) and np.isfinite(b)):
            raise ValueError(f"divergence at epoch {epoch}")
    return LinearModel(w, b)


# ---------------------------------------------------------------------------
# one-class nu-SVM
# ---------------------------------------------------------------------------


def rbf_kernel(u: np.ndarray, v: np.ndarray, gamma: float) -> np.ndarray:
    """k(u, v) = exp(-gamma ||u - v||^2), row-wise between two matrices."""
    u = np.atleast_2d(u)
    v = np.atleast_2d(v)
    d2 = ((u[:, None, :] - v[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-gamma * d2)


def train_one_class_svm(
    train: Dataset, nu: float, gamma: float, tolerance: float = 1e-6
) -> OneClassModel:
    """Solve the one-class dual min 0.5 a'Ka, 0 <= a_i <= 1/(nu n), sum a = 1."""
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must be in (0, 1]")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = len(train)
    if n == 0:
        raise ValueError("empty training set")
    if nu * n < 1.0:
        raise ValueError(f"nu too small for dataset: nu*n = {nu * n:g} < 1")
    X = train.features
    upper = 1.0 / (nu * n)

    if n <= 4096:
        gram = rbf_kernel(X, X, gamma)
        columns = _ColumnCache(lambda i: gram[i], max_entries=n)
    else:
        columns = _ColumnCache(lambda i: np.exp(-gamma * ((X - X[i]) ** 2).sum(axis=1)))
    diag = np.ones(n)
    ones = np.ones(n)

    # standard feasible start: fill the box up to mass 1
    alpha = np.zeros(n)
    full = int(nu * n)
    alpha[:full] = upper
    if full < n:
        alpha[full] = 1.0 - full * upper
    grad = np.zeros(n)
    for i in np.flatnonzero(alpha > 0):
        grad += alpha[i] * columns[i]

    pair_eps = min(tolerance, 1e-6)
    gap = _smo_pair_loop(grad, alpha, upper, ones, columns, diag, pair_eps, max_iter=400 * max(n, 500))
    if gap > pair_eps:
        raise RuntimeError(f"one-class SMO did not converge (pair gap {gap:g})")

    free = (alpha > 1e-12 * upper) & (alpha < upper * (1 - 1e-12))
    if free.any():
        rho = float(grad[free].mean())
    else:
        # KKT brackets rho between the bound groups' kernel sums
        lo = grad[alpha >= upper * (1 - 1e-12)].max() if (alpha >= upper * (1 - 1e-12)).any() else -np.inf
        hi = grad[alpha <= 1e-12 * upper].min() if (alpha <= 1e-12 * upper).any() else np.inf
        if np.isfinite(lo) and np.isfinite(hi):
            rho = float((lo + hi) / 2.0)
        else:
            rho = float(lo) if np.isfinite(lo) else float(hi)

    sv = alpha > 1e-12 * upper
    return OneClassModel(
        support_vectors=X[sv].copy(),
        dual_coefficients=alpha[sv].copy(),
        offset=rho,
        kernel_gamma=gamma,
        nu=nu,
    )


# ---------------------------------------------------------------------------
# Gamma-product likelihood-ratio fusion
# ---------------------------------------------------------------------------

_ZERO_SHIFT = 1e-9


def fit_gamma_mle(values: np.ndarray) -> tuple[float, float]:
    """Maximum-likelihood Gamma (shape, scale) for positive observations.

    Newton iteration on the shape via digamma/trigamma, started from the
    log-moment approximation; the scale is closed-form given the shape.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2 or np.ptp(v) == 0.0:
        raise ValueError("degenerate score distribution: need >= 2 distinct values")
    if np.any(v < 0):
        raise ValueError("gamma fit requires nonnegative values")
    v = np.where(v == 0.0, _ZERO_SHIFT, v)
    mean = float(v.mean())
    s = float(np.log(mean) - np.log(v).mean())
    k = (3.0 - s + np.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    for _ in range(100):
        f = np.log(k) - digamma(k) - s
        if abs(f) < 1e-13:
            break
        step = f / (1.0 / k - trigamma(k))
        k_new = k - step
        if k_new <= 0:
            k_new = k / 2.0
        if abs(k_new - k) < 1e-14 * k:
            k = k_new
            break
        k = k_new
    return float(k), mean / float(k)


def fit_gamma_product(scores: Dataset, threshold: float = 1.0) -> FusionModel:
    """Fit per-class, per-feature Gamma densities to 2-D score pairs."""
    if scores.dimension != 2:
        raise ValueError("fusion expects 2-D score pairs")
    counts = scores.class_counts()
    if min(counts.values()) < 2:
        raise ValueError("both classes need at least two score pairs")
    shapes = np.zeros((2, 2))
    scales = np.zeros((2, 2))
    for c, lab in enumerate((Label.LEGITIMATE, Label.MALICIOUS)):
        sub = scores.restrict(label=lab)
        for f in range(2):
            shapes[c, f], scales[c, f] = fit_gamma_mle(sub.features[:, f])
    return FusionModel(shapes=shapes, scales=scales, threshold=threshold)


def llr_score(model: FusionModel, x: np.ndarray) -> Score:
    """-log of the genuine/impostor likelihood ratio (larger = more malicious)."""
    return float(_llr_scores(model, np.atleast_2d(x))[0])


def _llr_scores(model: FusionModel, X: np.ndarray) -> np.ndarray:
    log_l = model.class_log_density(Label.LEGITIMATE, X)
    log_m = model.class_log_density(Label.MALICIOUS, X)
    with np.errstate(invalid="ignore"):
        out = log_m - log_l
    both_zero = np.isneginf(log_l) & np.isneginf(log_m)
    if both_zero.any():
        warnings.warn(
            "both class densities underflowed for some inputs; deciding malicious",
            RuntimeWarning,
            stacklevel=3,
        )
        out = np.where(both_zero, np.inf, out)
    return out


def llr_decide(model: FusionModel, x: np.ndarray) -> Label:
    """Legitimate iff the likelihood ratio is >= the threshold (inclusive)."""
    s = llr_score(model, x)  # -log ratio; ratio >= t  <=>  s <= -log t
    if np.isposinf(s):
        return Label.MALICIOUS
    return Label.LEGITIMATE if s <= -np.log(model.threshold) else Label.MALICIOUS


# ---------------------------------------------------------------------------
# uniform scoring API
# ---------------------------------------------------------------------------


def decision_scores(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Batch scores for a matrix of row vectors; larger = more malicious."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dimension:
        raise ValueError(f"dimension mismatch: model expects {model.dimension}, got {X.shape[1]}")
    if isinstance(model, LinearModel):
        return X @ model.weights + model.bias
    if isinstance(model, OneClassModel):
        return model.offset - model.kernel_sum(X)
    if isinstance(model, FusionModel):
        return _llr_scores(model, X) + np.log(model.threshold)
    raise TypeError(f"unknown model family {type(model).__name__}")


def decision_score(model: TrainedModel, x: np.ndarray) -> Score:
    """Scalar decision score; thresholding at 0 reproduces the native rule."""
    return float(decision_scores(model, np.atleast_2d(x))[0])


# ---------------------------------------------------------------------------
# training dispatch and serialization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifierConfig:
    """Family tag plus keyword parameters for the matching trainer."""

    family: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}({inner})"


def train_classifier(config: ClassifierConfig, train: Dataset, seed: int = 0) -> TrainedModel:
    p = dict(config.params)
    if config.family == "linear_svm":
        return train_linear_svm(train, c_param=p.get("c", 1.0), tolerance=p.get("tolerance", 1e-6))
    if config.family == "logistic_regression":
        return train_logistic_regression(
            train,
            learning_rate_schedule=p.get("learning_rate", 0.1),
            epochs=p.get("epochs", 10),
            seed=seed,
        )
    if config.family == "one_class_svm":
        return train_one_class_svm(
            train, nu=p.get("nu", 0.1), gamma=p["gamma"], tolerance=p.get("tolerance", 1e-6)
        )
    if config.family == "gamma_fusion":
        return fit_gamma_product(train, threshold=p.get("threshold", 1.0))
    raise ValueError(f"unknown classifier family {config.family!r}")


_MODEL_FORMAT = "clfsec-model"
_MODEL_VERSION = 1


def _model_payload(model: TrainedModel) -> dict:
    if isinstance(model, LinearModel):
        return {
            "family": "linear",
            "dimension": model.dimension,
            "weights": model.weights.tolist(),
            "bias": model.bias,
        }
    if isinstance(model, OneClassModel):
        return {
            "family": "one_class_rbf",
            "dimension": model.dimension,
            "support_vectors": model.support_vectors.tolist(),
            "dual_coefficients": model.dual_coefficients.tolist(),
            "offset": model.offset,
            "kernel_gamma": model.kernel_gamma,
            "nu": model.nu,
        }
    if isinstance(model, FusionModel):
        return {
            "family": "gamma_fusion",
            "dimension": 2,
            "shapes": model.shapes.tolist(),
            "scales": model.scales.tolist(),
            "threshold": model.threshold,
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def save_model(model: TrainedModel, path) -> None:
    doc = {"format": _MODEL_FORMAT, "version": _MODEL_VERSION}
    doc.update(_model_payload(model))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != _MODEL_FORMAT or doc.get("version") != _MODEL_VERSION:
        raise ValueError(f"unrecognized model document in {path}")
    family = doc["family"]
    if family == "linear":
        return LinearModel(np.array(doc["weights"]), doc["bias"])
    if family == "one_class_rbf":
        return OneClassModel(
            support_vectors=np.array(doc["support_vectors"]),
            dual_coefficients=np.array(doc["dual_coefficients"]),
            offset=doc["offset"],
            kernel_gamma=doc["kernel_gamma"],
            nu=doc["nu"],
        )
    if family == "gamma_fusion":
        return FusionModel(
            shapes=np.array(doc["shapes"]), scales=np.array(doc["scales"]), threshold=doc["threshold"]
        )
    raise ValueError(f"unknown model family {family!r}")
