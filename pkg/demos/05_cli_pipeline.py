"""The four-step pipeline, driven through the command-line front end.

Every evaluation is declared by a config file: data + resampling,
classifier, a full adversary model (taxonomy, knowledge, capability,
strategy, strength range), and evaluation/output settings.  The canned
scenario configs ship inside the package; this script runs two of them and
merges the resulting reports into plot-ready figure data.
"""

import json
import tempfile
from pathlib import Path

from clfsec.cli import main

work = Path(tempfile.mkdtemp(prefix="clfsec-demo-"))
print(f"working under {work}\n")

print("$ clfsec validate --scenario spam_gwi_bwo")
assert main(["validate", "--scenario", "spam_gwi_bwo"]) == 0

print("\n$ clfsec prepare --scenario spam_gwi_bwo --out <dir>")
assert main(["prepare", "--scenario", "spam_gwi_bwo", "--out", str(work / "svm")]) == 0

reports = []
for scenario, sub in (("spam_gwi_bwo", "svm"), ("spam_gwi_bwo_lr", "lr")):
    print(f"\n$ clfsec evaluate --scenario {scenario} --out <dir> --seed 42")
    assert main(["evaluate", "--scenario", scenario, "--out", str(work / sub), "--seed", "42"]) == 0
    reports.extend(str(p) for p in (work / sub).glob("report_*.json"))

print("\n$ clfsec report <reports...> --out <figures>")
assert main(["report", *reports, "--out", str(work / "figures")]) == 0

merged = (work / "figures" / "security_curves.csv").read_text().strip().splitlines()
print("\nmerged figure data (first rows):")
for line in merged[:6]:
    print("  " + line)
hints = json.loads((work / "figures" / "figure_hints.json").read_text())
print(f"\naxis hints: {hints}")
print(f"\nartifacts left under {work}")
