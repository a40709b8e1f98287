"""Spoofing one trait of a two-matcher biometric verification system.

A fingerprint+face verifier fuses the two matching scores with a
likelihood-ratio rule over per-class Gamma-product densities.  A spoofing
impostor replaces one of her matching scores with a targeted genuine
user's score (a "perfect replica" of that trait).  Spoofing never touches
genuine attempts, so the genuine acceptance rate is unchanged; the false
acceptance rate is what grows.
"""

import numpy as np

from clfsec import resample
from clfsec.attacks import Trait, build_spoof_pool
from clfsec.classifiers import decision_scores, fit_gamma_product
from clfsec.data_model import CrossValidation, Label
from clfsec.evaluation import far_at_gar, roc
from clfsec.rng import derive_rng
from clfsec.synth import synthetic_score_table

L, M = Label.LEGITIMATE, Label.MALICIOUS

table = synthetic_score_table(seed=11)  # 400 genuine + 1600 impostor pairs
folds = resample(table, CrossValidation(5), seed=42)
d_tr, d_ts = folds.pairs[0]

fusion = fit_gamma_product(d_tr)
print("fitted Gamma (shape, scale) per class and matcher:")
for c, name in enumerate(("genuine ", "impostor")):
    row = ", ".join(
        f"{m}=({fusion.shapes[c, i]:.2f}, {fusion.scales[c, i]:.4f})"
        for i, m in enumerate(("fing", "face"))
    )
    print(f"  {name}: {row}")

genuine = d_ts.restrict(label=L)
impostor = d_ts.restrict(label=M)
s_genuine = decision_scores(fusion, genuine.features)
s_impostor = decision_scores(fusion, impostor.features)
clean = roc(np.r_[s_genuine, s_impostor], np.r_[genuine.label_codes, impostor.label_codes])

print(f"\noperating point comparison at GAR = 0.90 (FAR axis is what moves):")
print(f"  no attack           FAR = {far_at_gar(clean, 0.9).far:.4f}")
for trait in (Trait.FINGERPRINT, Trait.FACE):
    pool = build_spoof_pool(impostor, genuine, trait, derive_rng(7, "spoof", trait.value))
    s_spoofed = decision_scores(fusion, pool.features)
    attacked = roc(np.r_[s_genuine, s_spoofed], np.r_[genuine.label_codes, pool.label_codes])
    print(f"  {trait.value:<11} spoof   FAR = {far_at_gar(attacked, 0.9).far:.4f}")

print(
    "\nspoofing a single trait already multiplies the false accepts: the\n"
    "fused system is not automatically stronger than its best matcher."
)
