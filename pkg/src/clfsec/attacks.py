"""Adversary model and attack-sample generators.

An :class:`AttackScenario` packages the taxonomy of an attack (influence,
security violation, specificity), the adversary's knowledge of the five
classifier components (k.i-k.v), her capability over training/testing data
(c.i-c.iv), and the resulting strategy: which priors change, what fraction
of each class is manipulated, and which generator produces the manipulated
feature vectors.  Scenarios are plain data; the sweep machinery turns them
into per-phase distribution specs at each attack-strength value.

Three generator families are implemented, one per application lane:

* greedy word insertion/obfuscation against a linear discriminant
  (:func:`gwi_bwo_attack`),
* biometric spoofing by substituting an impostor's matching score with a
  targeted genuine score (:func:`spoof_substitution`),
* anomaly-detector poisoning that injects the malicious testing pool into
  the training distribution (:func:`poison_training_spec`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .data_model import (
    AttackFlag,
    Dataset,
    DistributionSpec,
    EmpiricalPool,
    GenerationMode,
    Label,
)
from .classifiers import LinearModel
from .rng import derive_rng

__all__ = [
    "Influence",
    "Violation",
    "Trait",
    "TARGETED",
    "INDISCRIMINATE",
    "STRENGTH",
    "Knowledge",
    "Capability",
    "Strategy",
    "StrengthParam",
    "AttackScenario",
    "AttackBudget",
    "PoisonSpec",
    "gwi_bwo_attack",
    "gwi_bwo_pool",
    "spoof_substitution",
    "build_spoof_pool",
    "poison_training_spec",
    "check_scenario_consistency",
    "scenario_distribution_specs",
    "gwi_bwo_scenario",
    "spoof_scenario",
    "poison_scenario",
]


class Influence(enum.Enum):
    CAUSATIVE = "causative"
    EXPLORATORY = "exploratory"


class Violation(enum.Enum):
    INTEGRITY = "integrity"
    AVAILABILITY = "availability"
    PRIVACY = "privacy"


class Trait(enum.Enum):
    FINGERPRINT = "fingerprint"
    FACE = "face"


# attack specificity is a scale from indiscriminate (0) to targeted (1)
INDISCRIMINATE = 0.0
TARGETED = 1.0


class _Strength:
    """Sentinel: this strategy field takes the swept strength value."""

    def __repr__(self) -> str:
        return "STRENGTH"


STRENGTH = _Strength()

FractionLike = Union[float, _Strength]


def _resolve(value: FractionLike | None, strength: float | None) -> float | None:
    if isinstance(value, _Strength):
        if strength is None:
            raise ValueError("strength value required but not supplied")
        return float(strength)
    return value


@dataclass(frozen=True)
class Knowledge:
    """What the adversary knows about the classifier (k.i-k.v)."""

    training_data: bool = False
    feature_set: bool = False
    algorithm: bool = False
    parameters: bool = False
    feedback: bool = False


@dataclass(frozen=True)
class Capability:
    """What the adversary can touch (c.i-c.iv)."""

    affects_training: bool
    affects_testing: bool
    prior_change_allowed: bool
    controllable: Mapping[tuple[str, Label], float] = field(default_factory=dict)
    feature_constraints: str | None = None

    def controllable_fraction(self, phase: str, label: Label) -> float:
        return float(self.controllable.get((phase, label), 0.0))


@dataclass(frozen=True)
class Strategy:
    """How the attack modifies the data (a.i-a.iii)."""

    generator: "AttackGenerator"
    attacked_fraction: Mapping[tuple[str, Label], FractionLike] = field(default_factory=dict)
    prior_override: FractionLike | None = None  # training-phase p(Y=M)


@dataclass(frozen=True)
class StrengthParam:
    name: str
    lo: float
    hi: float


@dataclass(frozen=True)
class AttackScenario:
    name: str
    influence: Influence
    violation: Violation
    specificity: float
    knowledge: Knowledge
    capability: Capability
    strategy: Strategy
    strength: StrengthParam

    def attacked_fraction(self, phase: str, label: Label, strength: float | None) -> float:
        raw = self.strategy.attacked_fraction.get((phase, label), 0.0)
        return float(_resolve(raw, strength))

    def affects(self, phase: str) -> bool:
        allowed = self.capability.affects_training if phase == "train" else self.capability.affects_testing
        if not allowed:
            return False
        if phase == "train" and self.strategy.prior_override is not None:
            return True
        return any(
            (isinstance(v, _Strength) or v > 0.0)
            for (ph, _lab), v in self.strategy.attacked_fraction.items()
            if ph == phase
        )

    def prior_override(self, strength: float | None) -> float | None:
        return _resolve(self.strategy.prior_override, strength)


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttackBudget:
    """Maximum number of feature flips per sample."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be nonnegative")


@dataclass(frozen=True)
class PoisonSpec:
    """Fraction of the training set the adversary injects."""

    p_max: float

    def __post_init__(self):
        if not 0.0 <= self.p_max <= 0.5:
            raise ValueError(
                f"p_max must lie in [0, 0.5] (adversary cannot control a majority), got {self.p_max}"
            )


# ---------------------------------------------------------------------------
# greedy evasion of a linear discriminant
# ---------------------------------------------------------------------------


def gwi_bwo_attack(x: np.ndarray, model: LinearModel, budget: AttackBudget) -> np.ndarray:
    """Greedy good-word-insertion / bad-word-obfuscation feature flips.

    Scans features by decreasing |weight| (ties by ascending index), sets a
    feature to 1 when its weight is negative and it is 0, to 0 when its
    weight is positive and it is 1, and stops after ``n_max`` flips.  This
    minimizes the discriminant over the Hamming ball of radius ``n_max``;
    zero-weight features are never flipped.
    """
    x = np.asarray(x, dtype=np.float64)
    w = model.weights
    if x.shape != w.shape:
        raise ValueError(f"dimension mismatch: feature vector {x.shape}, model {w.shape}")
    if not np.all((x == 0.0) | (x == 1.0)):
        raise ValueError("gwi/bwo attack requires a binary feature vector")
    if budget.n_max > x.size:
        raise ValueError(f"n_max={budget.n_max} exceeds dimension {x.size}")
    out = x.copy()
    flips = 0
    for i in np.argsort(-np.abs(w), kind="stable"):
        if flips >= budget.n_max:
            break
        if w[i] < 0.0 and out[i] == 0.0:
            out[i] = 1.0
            flips += 1
        elif w[i] > 0.0 and out[i] == 1.0:
            out[i] = 0.0
            flips += 1
    return out


def gwi_bwo_pool(source: Dataset, model: LinearModel, n_max: int) -> Dataset:
    """Apply the greedy attack to every source sample (one output per input)."""
    X = source.features
    w = model.weights
    if X.shape[1] != w.shape[0]:
        raise ValueError("dimension mismatch between pool and model")
    if not source.is_binary():
        raise ValueError("gwi/bwo attack requires binary feature vectors")
    if n_max > X.shape[1]:
        raise ValueError(f"n_max={n_max} exceeds dimension {X.shape[1]}")
    order = np.argsort(-np.abs(w), kind="stable")
    Xo = X[:, order]
    wo = w[order]
    cand = ((wo < 0.0) & (Xo == 0.0)) | ((wo > 0.0) & (Xo == 1.0))
    flip = cand & (np.cumsum(cand, axis=1) <= n_max)
    attacked = Xo.copy()
    attacked[flip] = 1.0 - attacked[flip]
    restored = np.empty_like(attacked)
    restored[:, order] = attacked
    return Dataset(
        restored,
        source.label_codes.copy(),
        np.ones(len(source), dtype=np.uint8),
    )


# ---------------------------------------------------------------------------
# biometric score spoofing
# ---------------------------------------------------------------------------

_TRAIT_INDEX = {Trait.FINGERPRINT: 0, Trait.FACE: 1}


def spoof_substitution(impostor: np.ndarray, target_genuine: np.ndarray, trait: Trait) -> np.ndarray:
    """Replace one matching score of an impostor pair with the target's score.

    Simulates a perfect replica of the targeted trait; the untouched
    coordinate is returned bit-identical.
    """
    impostor = np.asarray(impostor, dtype=np.float64)
    target = np.asarray(target_genuine, dtype=np.float64)
    if impostor.shape != (2,) or target.shape != (2,):
        raise ValueError("score pairs must be 2-vectors (fingerprint, face)")
    if not (np.all(np.isfinite(impostor)) and np.all(np.isfinite(target))):
        raise ValueError("score pairs must be finite")
    out = impostor.copy()
    idx = _TRAIT_INDEX[trait]
    out[idx] = target[idx]
    return out


def build_spoof_pool(
    impostor_pool: Dataset,
    genuine_pool: Dataset,
    trait: Trait,
    seed: int | np.random.Generator,
) -> Dataset:
    """One spoofed sample per impostor, each targeting a uniformly drawn genuine user."""
    if len(genuine_pool) == 0:
        raise ValueError("empty genuine pool: no spoof targets available")
    if len(impostor_pool) == 0:
        raise ValueError("empty impostor pool")
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed, "spoof")
    targets = rng.integers(0, len(genuine_pool), size=len(impostor_pool))
    idx = _TRAIT_INDEX[trait]
    feats = impostor_pool.features.copy()
    feats[:, idx] = genuine_pool.features[targets, idx]
    return Dataset(
        feats,
        impostor_pool.label_codes.copy(),
        np.ones(len(impostor_pool), dtype=np.uint8),
    )


# ---------------------------------------------------------------------------
# anomaly-detector poisoning
# ---------------------------------------------------------------------------


def poison_training_spec(
    clean_training: Dataset, malicious_test_pool: Dataset, poison: PoisonSpec
) -> DistributionSpec:
    """Training distribution with the malicious testing pool injected.

    The injected fraction becomes the malicious prior (every malicious
    training sample is an attack sample); legitimate training samples keep
    the clean empirical distribution.
    """
    if poison.p_max > 0.0 and len(malicious_test_pool) == 0:
        raise ValueError("malicious test pool is empty but p_max > 0")
    legit = clean_training.restrict(label=Label.LEGITIMATE)
    components = {
        (Label.LEGITIMATE, AttackFlag.CLEAN): EmpiricalPool(legit),
        (Label.MALICIOUS, AttackFlag.ATTACKED): EmpiricalPool(malicious_test_pool),
    }
    return DistributionSpec(
        prior_malicious=poison.p_max,
        attack_prob={Label.MALICIOUS: 1.0, Label.LEGITIMATE: 0.0},
        components=components,
        generation_mode=GenerationMode.IID,
    )


# ---------------------------------------------------------------------------
# generators pluggable into pool construction
# ---------------------------------------------------------------------------


class AttackGenerator:
    """Produces the attacked pools for the phases a scenario touches."""

    name: str = "none"
    requires_model_params: bool = False

    def is_noop(self, strength: float) -> bool:
        """True when the attack leaves samples unchanged at this strength."""
        return False

    def attack_pools(
        self,
        phase: str,
        d_tr: Dataset,
        d_ts: Dataset,
        model=None,
        strength: float | None = None,
        rng: np.random.Generator | None = None,
    ) -> dict[Label, Dataset]:
        raise NotImplementedError


class GwiBwoGenerator(AttackGenerator):
    name = "gwi_bwo"
    requires_model_params = True

    def is_noop(self, strength):
        return strength == 0

    def attack_pools(self, phase, d_tr, d_ts, model=None, strength=None, rng=None):
        if phase != "test":
            return {}
        if model is None:
            raise ValueError("gwi_bwo generator needs the trained model parameters (k.iv)")
        n_max = int(round(strength if strength is not None else 0))
        source = d_ts.restrict(label=Label.MALICIOUS)
        return {Label.MALICIOUS: gwi_bwo_pool(source, model, n_max)}


class SpoofGenerator(AttackGenerator):
    requires_model_params = False

    def __init__(self, trait: Trait):
        self.trait = trait
        self.name = f"spoof_{trait.value}"

    def attack_pools(self, phase, d_tr, d_ts, model=None, strength=None, rng=None):
        if phase != "test":
            return {}
        impostors = d_ts.restrict(label=Label.MALICIOUS)
        genuine = d_ts.restrict(label=Label.LEGITIMATE)
        if rng is None:
            rng = derive_rng(0, "spoof")
        return {Label.MALICIOUS: build_spoof_pool(impostors, genuine, self.trait, rng)}


class PoisonGenerator(AttackGenerator):
    name = "poison_injection"
    requires_model_params = False

    def attack_pools(self, phase, d_tr, d_ts, model=None, strength=None, rng=None):
        if phase != "train":
            return {}
        pool = d_ts.restrict(label=Label.MALICIOUS)
        return {
            Label.MALICIOUS: Dataset(
                pool.features, pool.label_codes, np.ones(len(pool), dtype=np.uint8)
            )
        }


# ---------------------------------------------------------------------------
# consistency checking and spec assembly
# ---------------------------------------------------------------------------


def check_scenario_consistency(scenario: AttackScenario) -> list[str]:
    """Verify strategy fits capability and the taxonomy is coherent."""
    violations: list[str] = []
    cap = scenario.capability
    if scenario.influence is Influence.EXPLORATORY:
        touches_training = cap.affects_training or any(
            ph == "train" and (isinstance(v, _Strength) or v > 0)
            for (ph, _l), v in scenario.strategy.attacked_fraction.items()
        )
        if touches_training or scenario.strategy.prior_override is not None:
            violations.append("exploratory attacks affect only testing data")
    if not 0.0 <= scenario.specificity <= 1.0:
        violations.append(f"specificity out of range: {scenario.specificity}")
    if scenario.strategy.prior_override is not None and not cap.prior_change_allowed:
        violations.append("strategy overrides class priors but capability forbids it")
    for (phase, label), frac in scenario.strategy.attacked_fraction.items():
        upper = scenario.strength.hi if isinstance(frac, _Strength) else frac
        # fractions set from the strength parameter are capped by its range
        cap_frac = cap.controllable_fraction(phase, label)
        bound = min(float(upper), 1.0)
        if bound > cap_frac + 1e-12:
            violations.append(
                f"strategy attacks up to {bound:g} of {label.value} {phase} samples "
                f"but capability controls {cap_frac:g}"
            )
        if phase == "train" and not cap.affects_training and bound > 0:
            violations.append("strategy modifies training data without the capability")
        if phase == "test" and not cap.affects_testing and bound > 0:
            violations.append("strategy modifies testing data without the capability")
    if scenario.strategy.generator.requires_model_params and not scenario.knowledge.parameters:
        violations.append(
            f"generator {scenario.strategy.generator.name} requires parameter knowledge (k.iv)"
        )
    return violations


def scenario_distribution_specs(
    scenario: AttackScenario,
    pools: Mapping[tuple[str, Label, AttackFlag], Dataset],
    strength: float,
    d_tr: Dataset,
    d_ts: Dataset,
    phases: tuple[str, ...] = ("train", "test"),
) -> tuple[DistributionSpec | None, DistributionSpec | None]:
    """Per-phase distribution specs at one strength value.

    ``None`` for a phase means the attack leaves it untouched (or the phase
    was not requested) and the resampled set should be used directly.
    """
    sources = {"train": d_tr, "test": d_ts}
    out = []
    for phase in ("train", "test"):
        if phase not in phases or not scenario.affects(phase):
            out.append(None)
            continue
        prior = scenario.prior_override(strength) if phase == "train" else None
        if prior is None:
            prior = sources[phase].empirical_prior_malicious()
        attack_prob = {
            lab: scenario.attacked_fraction(phase, lab, strength)
            for lab in (Label.LEGITIMATE, Label.MALICIOUS)
        }
        components = {}
        for lab in (Label.LEGITIMATE, Label.MALICIOUS):
            for flag in (AttackFlag.CLEAN, AttackFlag.ATTACKED):
                pool = pools[(phase, lab, flag)]
                if len(pool) > 0:
                    components[(lab, flag)] = EmpiricalPool(pool)
        out.append(
            DistributionSpec(
                prior_malicious=float(prior),
                attack_prob=attack_prob,
                components=components,
            )
        )
    return out[0], out[1]


# ---------------------------------------------------------------------------
# the three canned scenarios
# ---------------------------------------------------------------------------


def gwi_bwo_scenario(n_max_limit: int) -> AttackScenario:
    """Indiscriminate exploratory integrity attack on a spam filter."""
    return AttackScenario(
        name="spam_gwi_bwo",
        influence=Influence.EXPLORATORY,
        violation=Violation.INTEGRITY,
        specificity=INDISCRIMINATE,
        knowledge=Knowledge(feature_set=True, algorithm=True, parameters=True),
        capability=Capability(
            affects_training=False,
            affects_testing=True,
            prior_change_allowed=False,
            controllable={("test", Label.MALICIOUS): 1.0},
            feature_constraints="binary features; at most n_max flips per sample",
        ),
        strategy=Strategy(
            generator=GwiBwoGenerator(),
            attacked_fraction={("test", Label.MALICIOUS): 1.0},
        ),
        strength=StrengthParam("n_max", 0.0, float(n_max_limit)),
    )


def spoof_scenario(trait: Trait) -> AttackScenario:
    """Targeted exploratory integrity attack on a score-fusion verifier."""
    return AttackScenario(
        name=f"bio_spoof_{trait.value}",
        influence=Influence.EXPLORATORY,
        violation=Violation.INTEGRITY,
        specificity=TARGETED,
        knowledge=Knowledge(training_data=True, feature_set=True),
        capability=Capability(
            affects_training=False,
            affects_testing=True,
            prior_change_allowed=False,
            controllable={("test", Label.MALICIOUS): 1.0},
            feature_constraints=f"replaces only the {trait.value} score",
        ),
        strategy=Strategy(
            generator=SpoofGenerator(trait),
            attacked_fraction={("test", Label.MALICIOUS): STRENGTH},
        ),
        strength=StrengthParam("spoof_fraction", 0.0, 1.0),
    )


def poison_scenario() -> AttackScenario:
    """Indiscriminate causative integrity attack on an anomaly detector."""
    return AttackScenario(
        name="ids_poison",
        influence=Influence.CAUSATIVE,
        violation=Violation.INTEGRITY,
        specificity=INDISCRIMINATE,
        knowledge=Knowledge(feature_set=True, algorithm=True),
        capability=Capability(
            affects_training=True,
            affects_testing=False,
            prior_change_allowed=True,
            controllable={("train", Label.MALICIOUS): 1.0},
            feature_constraints="full control of injected samples' features",
        ),
        strategy=Strategy(
            generator=PoisonGenerator(),
            attacked_fraction={("train", Label.MALICIOUS): 1.0},
            prior_override=STRENGTH,
        ),
        strength=StrengthParam("p_max", 0.0, 0.5),
    )
