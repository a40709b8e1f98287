"""ROC metrics and security-evaluation sweeps.

A security evaluation measures a classifier's performance metric as a
function of attack strength, averaged over resampled (train, test) pairs.
Exploratory scenarios train once per fold and reuse the model across
strength values (training data does not depend on the strength there);
causative scenarios retrain at every strength.

ROC curves are exact step/trapezoid constructions: samples tied on the
score move as one block, which makes every derived quantity invariant
under strictly increasing score transforms.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np

from .attacks import AttackScenario, check_scenario_consistency, scenario_distribution_specs
from .classifiers import ClassifierConfig, decision_scores, train_classifier, train_linear_svm
from .data_model import (
    CrossValidation,
    Dataset,
    FoldSet,
    Label,
    build_scenario_pools,
    resample,
    sample_dataset,
)
from .rng import derive_subseed

__all__ = [
    "RocCurve",
    "FarAtGarResult",
    "SecurityCurve",
    "EvaluationReport",
    "Auc10",
    "FarAtGar",
    "roc",
    "auc10",
    "far_at_gar",
    "security_sweep",
    "select_svm_c",
    "SweepError",
]


@dataclass(frozen=True)
class RocCurve:
    """Ordered ROC points; ``fp`` nondecreasing, endpoints (0, tp0) and (1, 1).

    ``thresholds[i]`` is the score at which point ``i`` is reached when
    classifying ``score >= threshold`` as malicious (the first point pairs
    with +inf).  In biometric fusion the coordinates read (FAR, GAR).
    """

    fp: np.ndarray
    tp: np.ndarray
    thresholds: np.ndarray

    # biometric aliases
    @property
    def far(self) -> np.ndarray:
        return self.fp

    @property
    def gar(self) -> np.ndarray:
        return self.tp


class FarAtGarResult(NamedTuple):
    far: float
    reachable: bool


def _label_codes(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.dtype == object or arr.dtype.kind == "U":
        return np.array([1 if (l is Label.MALICIOUS or l == "M") else 0 for l in labels], dtype=np.uint8)
    return arr.astype(np.uint8)


def roc(scores, labels=None) -> RocCurve:
    """Exact ROC from scores oriented larger = more malicious.

    Accepts either ``roc(scores, labels)`` or an iterable of
    ``(score, label)`` pairs.  Tied scores are grouped, so the curve walks
    one diagonal segment per tie block.
    """
    if labels is None:
        pairs = list(scores)
        scores = np.array([p[0] for p in pairs], dtype=np.float64)
        labels = [p[1] for p in pairs]
    scores = np.asarray(scores, dtype=np.float64)
    codes = _label_codes(labels)
    n_m = int(codes.sum())
    n_l = int(len(codes) - n_m)
    if n_m == 0 or n_l == 0:
        raise ValueError("ROC needs at least one sample of each class")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    c = codes[order]
    # tie-block boundaries: last index of each run of equal scores
    block_end = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    cum_m = np.cumsum(c)[block_end]
    cum_l = (block_end + 1) - cum_m
    fp = np.r_[0.0, cum_l / n_l]
    tp = np.r_[0.0, cum_m / n_m]
    thresholds = np.r_[np.inf, s[block_end]]
    return RocCurve(fp=fp, tp=tp, thresholds=thresholds)


def auc10(curve: RocCurve) -> float:
    """Area under the ROC polyline for false-positive rates in [0, 0.1].

    Trapezoidal within tie blocks; the step segment containing FP = 0.1 is
    cut by linear interpolation.  The value lives in [0, 0.1].
    """
    limit = 0.1
    area = 0.0
    fp, tp = curve.fp, curve.tp
    for i in range(1, len(fp)):
        f0, f1, t0, t1 = fp[i - 1], fp[i], tp[i - 1], tp[i]
        if f1 <= limit:
            area += (f1 - f0) * (t0 + t1) / 2.0
            continue
        if f0 < limit:
            t_cut = t0 + (limit - f0) / (f1 - f0) * (t1 - t0)
            area += (limit - f0) * (t0 + t_cut) / 2.0
        break
    return float(area)


def far_at_gar(curve: RocCurve, gar: float) -> FarAtGarResult:
    """Smallest FAR on the curve whose GAR reaches the requested level."""
    if not 0.0 < gar <= 1.0:
        raise ValueError("gar must be in (0, 1]")
    fp, tp = curve.fp, curve.tp
    if tp[0] >= gar:
        return FarAtGarResult(float(fp[0]), True)
    for i in range(1, len(fp)):
        if tp[i] >= gar:
            if fp[i] == fp[i - 1] or tp[i] == tp[i - 1]:
                return FarAtGarResult(float(fp[i]), True)
            frac = (gar - tp[i - 1]) / (tp[i] - tp[i - 1])
            return FarAtGarResult(float(fp[i - 1] + frac * (fp[i] - fp[i - 1])), True)
    warnings.warn(f"GAR {gar} unreachable on this curve", RuntimeWarning, stacklevel=2)
    return FarAtGarResult(1.0, False)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Auc10:
    name = "auc10"
    # lower values mean a more successful attack
    worst = min

    def compute(self, scores: np.ndarray, label_codes: np.ndarray) -> float:
        return auc10(roc(scores, label_codes))


@dataclass(frozen=True)
class FarAtGar:
    gar: float
    worst = max

    @property
    def name(self) -> str:
        return f"far_at_gar_{self.gar:g}"

    def compute(self, scores: np.ndarray, label_codes: np.ndarray) -> float:
        return far_at_gar(roc(scores, label_codes), self.gar).far


Metric = Union[Auc10, FarAtGar]


# ---------------------------------------------------------------------------
# curves and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecurityCurve:
    """Metric mean/std over folds, indexed by attack-strength values."""

    strength_name: str
    strengths: tuple[float, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]
    k: int

    def to_csv_text(self) -> str:
        lines = ["strength,mean,std,k"]
        for s, m, sd in zip(self.strengths, self.means, self.stds):
            lines.append(f"{s!r},{m!r},{sd!r},{self.k}")
        return "\n".join(lines) + "\n"


@dataclass
class EvaluationReport:
    """Self-describing record of one security evaluation."""

    scenario: str
    classifier: str
    metric: str
    folds: int
    curve: SecurityCurve
    config: Mapping | None = None
    seed: int | None = None
    roc_curves: dict[str, RocCurve] = field(default_factory=dict)
    started_at: str = ""
    elapsed_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "format": "clfsec-report",
            "version": 1,
            "scenario": self.scenario,
            "classifier": self.classifier,
            "metric": self.metric,
            "folds": self.folds,
            "seed": self.seed,
            "config": dict(self.config) if self.config is not None else None,
            "curve": {
                "strength_name": self.curve.strength_name,
                "strengths": list(self.curve.strengths),
                "means": list(self.curve.means),
                "stds": list(self.curve.stds),
                "k": self.curve.k,
            },
            "roc_curves": {
                name: {"fp": c.fp.tolist(), "tp": c.tp.tolist(), "thresholds": c.thresholds.tolist()}
                for name, c in self.roc_curves.items()
            },
            "started_at": self.started_at,
            "elapsed_seconds": self.elapsed_seconds,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "EvaluationReport":
        if doc.get("format") != "clfsec-report" or doc.get("version") != 1:
            raise ValueError("unrecognized report document")
        cur = doc["curve"]
        return cls(
            scenario=doc["scenario"],
            classifier=doc["classifier"],
            metric=doc["metric"],
            folds=doc["folds"],
            seed=doc.get("seed"),
            config=doc.get("config"),
            curve=SecurityCurve(
                strength_name=cur["strength_name"],
                strengths=tuple(cur["strengths"]),
                means=tuple(cur["means"]),
                stds=tuple(cur["stds"]),
                k=cur["k"],
            ),
            roc_curves={
                name: RocCurve(
                    fp=np.array(c["fp"]), tp=np.array(c["tp"]), thresholds=np.array(c["thresholds"])
                )
                for name, c in doc.get("roc_curves", {}).items()
            },
            started_at=doc.get("started_at", ""),
            elapsed_seconds=doc.get("elapsed_seconds", 0.0),
        )


# ---------------------------------------------------------------------------
# the sweep
# ---------------------------------------------------------------------------


class SweepError(RuntimeError):
    pass


def _phase_clean_at(scenario: AttackScenario, phase: str, strength: float, source: Dataset) -> bool:
    """True when the attack leaves this phase untouched at this strength."""
    if not scenario.affects(phase):
        return True
    fractions = [
        scenario.attacked_fraction(phase, lab, strength)
        for lab in (Label.LEGITIMATE, Label.MALICIOUS)
    ]
    generator_noop = getattr(scenario.strategy.generator, "is_noop", lambda s: False)(strength)
    if not (all(f == 0.0 for f in fractions) or generator_noop):
        return False
    if phase == "train":
        override = scenario.prior_override(strength)
        if override is not None and override != source.empirical_prior_malicious():
            return False
    return True


def _resolve_classifier(config: ClassifierConfig, train: Dataset, seed: int) -> ClassifierConfig:
    """Replace a C grid with the cross-validated choice on this training set."""
    if config.family == "linear_svm" and "c_grid" in config.params:
        params = dict(config.params)
        grid = params.pop("c_grid")
        params["c"] = select_svm_c(train, grid, seed=seed, tolerance=params.get("tolerance", 1e-6))
        return ClassifierConfig(config.family, params)
    return config


def select_svm_c(
    train: Dataset,
    grid: Sequence[float],
    seed: int = 0,
    folds: int = 5,
    tolerance: float = 1e-6,
) -> float:
    """Pick the SVM C maximizing cross-validated partial AUC on the training set."""
    fold_set = resample(train, CrossValidation(folds), seed=derive_subseed(seed, "cgrid-folds"))
    metric = Auc10()
    best_c, best_v = None, -np.inf
    for c in grid:
        vals = []
        for tr, va in fold_set.pairs:
            model = train_linear_svm(tr, c_param=c, tolerance=tolerance)
            vals.append(metric.compute(decision_scores(model, va.features), va.label_codes))
        v = float(np.mean(vals))
        if v > best_v:
            best_c, best_v = c, v
    return float(best_c)


def security_sweep(
    folds: FoldSet,
    scenario: AttackScenario,
    classifier_config: ClassifierConfig,
    strengths: Sequence[float],
    metric: Metric,
    seed: int,
    repetitions: int = 1,
    jobs: int = 1,
    train_size: int | None = None,
    test_size: int | None = None,
    scale_train_with_prior: bool = True,
) -> SecurityCurve:
    """Measure the metric at each attack strength, averaged over folds.

    For every (fold, repetition) work item: build the training and testing
    sets that the scenario's data model prescribes at each strength, train,
    score the testing set and compute the metric.  A strength at which the
    attack is a no-op evaluates on the resampled sets directly, so the
    strength-0 entry coincides with classical performance evaluation.

    Work items are independent; ``jobs`` bounds concurrency and never
    changes the result (values land in a preallocated array and are
    aggregated in fixed order).
    """
    strengths = [float(s) for s in strengths]
    if not any(s == 0.0 for s in strengths):
        raise ValueError("strength values must include 0")
    lo, hi = scenario.strength.lo, scenario.strength.hi
    bad = [s for s in strengths if not lo <= s <= hi]
    if bad:
        raise ValueError(
            f"strength values {bad} outside the scenario's {scenario.strength.name} "
            f"range [{lo:g}, {hi:g}]"
        )
    issues = check_scenario_consistency(scenario)
    if issues:
        raise ValueError("inconsistent scenario: " + "; ".join(issues))
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")

    items = [(fi, rep) for fi in range(folds.k) for rep in range(repetitions)]
    values = np.zeros((len(items), len(strengths)))

    def run_item(item_index: int) -> None:
        fi, rep = items[item_index]
        d_tr, d_ts = folds.pairs[fi]
        n_tr = train_size if train_size is not None else len(d_tr)
        n_ts = test_size if test_size is not None else len(d_ts)
        tr_seed = derive_subseed(seed, "fold", fi, "rep", rep, "tr")
        ts_seed = derive_subseed(seed, "fold", fi, "rep", rep, "ts")
        pools_seed = derive_subseed(seed, "fold", fi, "rep", rep, "pools")
        train_seed = derive_subseed(seed, "fold", fi, "rep", rep, "train")

        model = None
        if not scenario.affects("train"):
            try:
                cfg = _resolve_classifier(classifier_config, d_tr, train_seed)
                model = train_classifier(cfg, d_tr, seed=train_seed)
            except Exception as exc:
                raise SweepError(f"fold {fi}, rep {rep}, training: {exc}") from exc

        for si, s in enumerate(strengths):
            try:
                if scenario.affects("train"):
                    if _phase_clean_at(scenario, "train", s, d_tr):
                        tr = d_tr
                    else:
                        pools = build_scenario_pools(
                            d_tr, d_ts, scenario, model=None, strength=s,
                            seed=pools_seed, phases=("train",),
                        )
                        tr_spec, _ = scenario_distribution_specs(
                            scenario, pools, s, d_tr, d_ts, phases=("train",)
                        )
                        n = n_tr
                        prior = scenario.prior_override(s)
                        if scale_train_with_prior and prior is not None and prior < 1.0:
                            n = int(round(n_tr / (1.0 - prior)))
                        tr = sample_dataset(tr_spec, n, tr_seed)
                    cfg = _resolve_classifier(classifier_config, tr, train_seed)
                    item_model = train_classifier(cfg, tr, seed=train_seed)
                else:
                    item_model = model

                if _phase_clean_at(scenario, "test", s, d_ts):
                    ts = d_ts
                else:
                    pools = build_scenario_pools(
                        d_tr, d_ts, scenario, model=item_model, strength=s,
                        seed=pools_seed, phases=("test",),
                    )
                    _, ts_spec = scenario_distribution_specs(
                        scenario, pools, s, d_tr, d_ts, phases=("test",)
                    )
                    ts = sample_dataset(ts_spec, n_ts, ts_seed)

                scores = decision_scores(item_model, ts.features)
                values[item_index, si] = metric.compute(scores, ts.label_codes)
            except Exception as exc:
                raise SweepError(f"fold {fi}, rep {rep}, strength {s:g}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(run_item, range(len(items))))
    else:
        for idx in range(len(items)):
            run_item(idx)

    means = values.mean(axis=0)
    stds = values.std(axis=0, ddof=1) if len(items) > 1 else np.zeros(len(strengths))
    return SecurityCurve(
        strength_name=scenario.strength.name,
        strengths=tuple(strengths),
        means=tuple(float(v) for v in means),
        stds=tuple(float(v) for v in stds),
        k=len(items),
    )


def scenario_roc(
    d_tr: Dataset,
    d_ts: Dataset,
    scenario: AttackScenario,
    classifier_config: ClassifierConfig,
    strength: float,
    seed: int,
) -> RocCurve:
    """ROC of one fold at one strength (used for plot-ready report data)."""
    train_seed = derive_subseed(seed, "fold", 0, "rep", 0, "train")
    ts_seed = derive_subseed(seed, "fold", 0, "rep", 0, "ts")
    pools_seed = derive_subseed(seed, "fold", 0, "rep", 0, "pools")
    cfg = _resolve_classifier(classifier_config, d_tr, train_seed)
    model = train_classifier(cfg, d_tr, seed=train_seed)
    if _phase_clean_at(scenario, "test", strength, d_ts):
        ts = d_ts
    else:
        pools = build_scenario_pools(
            d_tr, d_ts, scenario, model=model, strength=strength, seed=pools_seed, phases=("test",)
        )
        _, ts_spec = scenario_distribution_specs(
            scenario, pools, strength, d_tr, d_ts, phases=("test",)
        )
        ts = sample_dataset(ts_spec, len(d_ts), ts_seed)
    return roc(decision_scores(model, ts.features), ts.label_codes)
