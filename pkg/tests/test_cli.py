import json

import numpy as np
import pytest
import yaml

from clfsec.attacks import scenario_distribution_specs
from clfsec.cli import main
from clfsec.config import (
    canned_config,
    canned_scenario_names,
    dump_config,
    scenario_from_config,
    validate_config,
)
from clfsec.data_model import (
    AttackFlag,
    EmpiricalPool,
    Label,
    build_scenario_pools,
    resample,
    Chronological,
)
from clfsec.synth import synthetic_ids_traffic, synthetic_score_table, synthetic_spam_corpus

L, M = Label.LEGITIMATE, Label.MALICIOUS
F, T = AttackFlag.CLEAN, AttackFlag.ATTACKED


@pytest.fixture
def email_fixture(tmp_path):
    docs = {
        "m1.txt": ("spam", "buy cheap pills now limited offer"),
        "h1.txt": ("ham", "meeting notes from the standup today"),
        "m2.txt": ("spam", "cheap pills fast shipping offer"),
        "h2.txt": ("ham", "please review the attached report"),
        "m3.txt": ("spam", "win money fast lottery prize"),
        "h3.txt": ("ham", "lunch plans for friday team outing"),
        "m4.txt": ("spam", "claim your prize money now"),
        "h4.txt": ("ham", "quarterly report draft attached for review"),
        "m5.txt": ("spam", "cheap offer win lottery pills"),
        "h5.txt": ("ham", "agenda for the project meeting tomorrow"),
    }
    for name, (_lab, text) in docs.items():
        (tmp_path / name).write_text(text, encoding="utf-8")
    index = tmp_path / "index"
    index.write_text(
        "".join(f"{lab} {name}\n" for name, (lab, _) in docs.items()), encoding="utf-8"
    )
    config = {
        "version": 1,
        "data": {
            "source": "emails",
            "path": "index",
            "vocab_size": 1000,
            "resampling": {"method": "chronological", "split_index": 5},
        },
        "classifier": {"family": "linear_svm", "c": 1.0},
        "attack": canned_config("spam_gwi_bwo")["attack"],
        "evaluation": {"metric": "auc10", "seed": 1},
        "output": {"directory": str(tmp_path / "out")},
    }
    cfg_path = tmp_path / "spam.yaml"
    cfg_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return tmp_path, cfg_path


class TestPrepare:
    def test_email_fixture_dimension_bound(self, email_fixture, capsys):
        tmp_path, cfg_path = email_fixture
        assert main(["prepare", "--config", str(cfg_path)]) == 0
        out = dict(
            line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines()
        )
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        distinct_terms_in_train = manifest["vocabulary_size"]
        assert int(out["dimension"]) == min(1000, distinct_terms_in_train)
        assert int(out["samples"]) == 10

    def test_rerun_identical_hashes(self, email_fixture):
        tmp_path, cfg_path = email_fixture
        assert main(["prepare", "--config", str(cfg_path)]) == 0
        first = json.loads((tmp_path / "out" / "manifest.json").read_text())["files"]
        assert main(["prepare", "--config", str(cfg_path)]) == 0
        second = json.loads((tmp_path / "out" / "manifest.json").read_text())["files"]
        assert first == second

    def test_missing_index_exits_2(self, email_fixture, capsys, tmp_path):
        _, cfg_path = email_fixture
        cfg = yaml.safe_load(cfg_path.read_text())
        cfg["data"]["path"] = "nowhere/missing-index"
        bad = tmp_path / "bad.yaml"
        bad.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["prepare", "--config", str(bad)]) == 2
        assert "missing-index" in capsys.readouterr().err

    def test_synthetic_prepare(self, tmp_path):
        assert main(["prepare", "--scenario", "ids_poison", "--out", str(tmp_path / "o")]) == 0
        manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert manifest["dimension"] == 2
        assert (tmp_path / "o" / "dataset.csv").is_file()

    def test_scores_source_end_to_end(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = ["user_id,claimed_id,fing_score,face_score,label"]
        for i in range(60):
            rows.append(f"u{i},u0,{rng.gamma(18, 0.04):.6f},{rng.gamma(6, 0.07):.6f},genuine")
        for i in range(240):
            rows.append(f"v{i},u0,{rng.gamma(6, 0.05):.6f},{rng.gamma(3, 0.07):.6f},impostor")
        (tmp_path / "scores.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
        cfg = canned_config("bio_spoof_fingerprint")
        cfg["data"] = {
            "source": "scores",
            "path": "scores.csv",
            "resampling": {"method": "cross_validation", "k": 3},
        }
        cfg["evaluation"]["collect_roc"] = []
        cfg["output"]["directory"] = str(tmp_path / "out")
        (tmp_path / "c.yaml").write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["prepare", "--config", str(tmp_path / "c.yaml")]) == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["dimension"] == 2
        assert "normalization_bounds" in manifest
        # evaluate picks up the prepared dataset file
        assert main(["evaluate", "--config", str(tmp_path / "c.yaml")]) == 0
        csv = (tmp_path / "out" / "curve_bio_spoof_fingerprint_gamma_fusion.csv").read_text()
        rows = csv.strip().splitlines()
        assert len(rows) == 3  # header + strengths {0, 1}

    def test_payloads_source_prepare(self, tmp_path):
        rng = np.random.default_rng(1)
        lines = []
        for _ in range(20):
            payload = bytes(rng.integers(97, 110, size=rng.integers(4, 30)))
            lines.append(payload.hex() + ",L")
        for _ in range(5):
            payload = bytes(rng.integers(0, 256, size=rng.integers(4, 30)))
            lines.append(payload.hex() + ",M")
        (tmp_path / "pkts.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        cfg = canned_config("ids_poison")
        cfg["data"] = {
            "source": "payloads",
            "path": "pkts.txt",
            "resampling": {"method": "chronological", "split_index": 15},
        }
        cfg["output"]["directory"] = str(tmp_path / "out")
        (tmp_path / "c.yaml").write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["prepare", "--config", str(tmp_path / "c.yaml")]) == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["dimension"] == 256
        assert manifest["samples"] == 25

    def test_config_and_scenario_both_rejected(self, tmp_path, capsys):
        p = tmp_path / "c.yaml"
        p.write_text("version: 1\n", encoding="utf-8")
        assert main(["validate", "--config", str(p), "--scenario", "ids_poison"]) == 2
        assert "not both" in capsys.readouterr().err


class TestEvaluate:
    def test_canned_spam_curve_shape(self, tmp_path, capsys):
        assert main(["evaluate", "--scenario", "spam_gwi_bwo", "--out", str(tmp_path)]) == 0
        keys = dict(
            line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines()
        )
        csv_lines = (tmp_path / "curve_spam_gwi_bwo_linear_svm.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "strength,mean,std,k"
        assert len(csv_lines) == 12  # 11 strengths 0..10
        means = [float(l.split(",")[1]) for l in csv_lines[1:]]
        assert all(a >= b - 1e-15 for a, b in zip(means, means[1:]))
        assert float(keys["strength0"]) == means[0]

    def test_poison_with_only_zero_equals_plain(self, tmp_path, capsys):
        cfg = canned_config("ids_poison")
        cfg["attack"]["strength"]["values"] = [0]
        cfg["output"]["directory"] = str(tmp_path / "o")
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["evaluate", "--config", str(path)]) == 0
        keys = dict(
            line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines()
        )
        # attack-free reduction: mean equals plain evaluation of the same fold
        from clfsec.classifiers import ClassifierConfig, decision_scores, train_classifier
        from clfsec.evaluation import Auc10
        from clfsec.rng import derive_subseed

        traffic = synthetic_ids_traffic(seed=5)
        folds = resample(traffic, Chronological(300), seed=42)
        d_tr, d_ts = folds.pairs[0]
        model = train_classifier(
            ClassifierConfig("one_class_svm", {"nu": 0.01, "gamma": 0.5}),
            d_tr,
            seed=derive_subseed(42, "fold", 0, "rep", 0, "train"),
        )
        plain = Auc10().compute(decision_scores(model, d_ts.features), d_ts.label_codes)
        assert float(keys["strength0"]) == plain

    def test_byte_identical_reruns(self, tmp_path):
        out = tmp_path / "o"
        csv_name = "curve_ids_poison_one_class_svm.csv"
        report_name = "report_ids_poison_one_class_svm.json"
        snapshots = []
        for _ in range(2):
            assert main(["evaluate", "--scenario", "ids_poison", "--out", str(out), "--seed", "7"]) == 0
            doc = json.loads((out / report_name).read_text())
            doc.pop("started_at")
            doc.pop("elapsed_seconds")
            snapshots.append(((out / csv_name).read_bytes(), doc))
        assert snapshots[0][0] == snapshots[1][0]  # byte-identical CSV
        # the report reproduces bit-exactly apart from wall-clock metadata
        assert snapshots[0][1] == snapshots[1][1]

    def test_sweep_alias(self, tmp_path):
        cfg = canned_config("spam_gwi_bwo")
        cfg["attack"]["strength"]["values"] = [0, 5]
        cfg["output"]["directory"] = str(tmp_path / "o")
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["sweep", "--config", str(path)]) == 0

    def test_inconsistent_scenario_exits_2_before_training(self, tmp_path, capsys):
        cfg = canned_config("spam_gwi_bwo")
        cfg["attack"]["knowledge"]["parameters"] = False  # generator needs k.iv
        cfg["output"]["directory"] = str(tmp_path / "o")
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["evaluate", "--config", str(path)]) == 2
        assert "k.iv" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()


class TestValidateCommand:
    def test_canned_configs_valid(self):
        for name in canned_scenario_names():
            assert main(["validate", "--scenario", name]) == 0

    def test_bad_config_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("version: 99\n", encoding="utf-8")
        assert main(["validate", "--config", str(path)]) == 2
        assert "version" in capsys.readouterr().err

    def test_missing_config_exits_2(self):
        assert main(["validate", "--config", "/nonexistent/x.yaml"]) == 2

    def test_no_color_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("CLFSEC_NO_COLOR", "1")
        path = tmp_path / "bad.yaml"
        path.write_text("version: 99\n", encoding="utf-8")
        main(["validate", "--config", str(path)])
        assert "\x1b[" not in capsys.readouterr().err


class TestReportCommand:
    def _run_two(self, tmp_path):
        for scen, sub in (("spam_gwi_bwo", "a"), ("spam_gwi_bwo_lr", "b")):
            cfg = canned_config(scen)
            cfg["attack"]["strength"]["values"] = [0, 2, 4]
            cfg["output"]["directory"] = str(tmp_path / sub)
            p = tmp_path / f"{sub}.yaml"
            p.write_text(yaml.safe_dump(cfg), encoding="utf-8")
            assert main(["evaluate", "--config", str(p)]) == 0
        return (
            tmp_path / "a" / "report_spam_gwi_bwo_linear_svm.json",
            tmp_path / "b" / "report_spam_gwi_bwo_logistic_regression.json",
        )

    def test_two_series_merge(self, tmp_path):
        import csv

        r1, r2 = self._run_two(tmp_path)
        assert main(["report", str(r1), str(r2), "--out", str(tmp_path / "figs")]) == 0
        with open(tmp_path / "figs" / "security_curves.csv") as fh:
            rows = list(csv.reader(fh))
        assert len(rows[0]) == 3  # strength + two series columns
        assert len(rows) == 4
        assert (tmp_path / "figs" / "security_curves.svg").is_file()
        hints = json.loads((tmp_path / "figs" / "figure_hints.json").read_text())
        assert "security_curves" in hints

    def test_single_report_pass_through(self, tmp_path):
        import csv

        r1, _ = self._run_two(tmp_path)
        assert main(["report", str(r1), "--out", str(tmp_path / "figs1")]) == 0
        with open(tmp_path / "figs1" / "security_curves.csv") as fh:
            rows = list(csv.reader(fh))
        assert len(rows[0]) == 2

    def test_union_grid_with_gaps(self, tmp_path):
        r1, r2 = self._run_two(tmp_path)
        doc = json.loads(r2.read_text())
        doc["curve"]["strengths"] = [0.0, 2.0, 8.0]  # diverging grid
        r2.write_text(json.dumps(doc), encoding="utf-8")
        assert main(["report", str(r1), str(r2), "--out", str(tmp_path / "figs2")]) == 0
        lines = (tmp_path / "figs2" / "security_curves.csv").read_text().strip().splitlines()
        assert len(lines) == 5  # union grid {0, 2, 4, 8}
        row8 = lines[-1].split(",")
        assert row8[1] == ""  # series 1 has no value at strength 8

    def test_mismatched_metrics_error(self, tmp_path, capsys):
        r1, r2 = self._run_two(tmp_path)
        doc = json.loads(r2.read_text())
        doc["metric"] = "far_at_gar_0.9"
        r2.write_text(json.dumps(doc), encoding="utf-8")
        assert main(["report", str(r1), str(r2), "--out", str(tmp_path / "f")]) == 2
        err = capsys.readouterr().err
        assert "auc10" in err and "far_at_gar_0.9" in err

    def test_roc_bundle_with_log_hint(self, tmp_path):
        cfg = canned_config("bio_spoof_fingerprint")
        cfg["data"]["synth"] = {"seed": 11, "n_genuine": 120, "n_impostor": 400}
        cfg["data"]["resampling"] = {"method": "cross_validation", "k": 3}
        cfg["output"]["directory"] = str(tmp_path / "bio")
        p = tmp_path / "bio.yaml"
        p.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert main(["evaluate", "--config", str(p)]) == 0
        report = tmp_path / "bio" / "report_bio_spoof_fingerprint_gamma_fusion.json"
        assert main(["report", str(report), "--out", str(tmp_path / "figs3")]) == 0
        hints = json.loads((tmp_path / "figs3" / "figure_hints.json").read_text())
        assert hints["roc_curves"]["x_axis"] == "log"
        assert (tmp_path / "figs3" / "roc_curves.csv").is_file()


class TestConfigRoundTrip:
    def test_parse_dump_parse_equivalence(self):
        for name in canned_scenario_names():
            cfg = canned_config(name)
            assert yaml.safe_load(dump_config(cfg)) == cfg
            assert validate_config(cfg) == []


class TestTableOneInstantiation:
    """The three canned scenarios must reproduce the published data-model rows."""

    def test_spam_column(self):
        scen = scenario_from_config(canned_config("spam_gwi_bwo")["attack"])
        corpus = synthetic_spam_corpus(seed=7, n=400, d=60)
        folds = resample(corpus, Chronological(200), seed=1)
        d_tr, d_ts = folds.pairs[0]
        from clfsec.classifiers import train_linear_svm

        model = train_linear_svm(d_tr, 1.0)
        pools = build_scenario_pools(d_tr, d_ts, scen, model=model, strength=10, seed=0)
        tr_spec, ts_spec = scenario_distribution_specs(scen, pools, 10, d_tr, d_ts)
        # training untouched: p_tr = p_D
        assert tr_spec is None
        # p_ts(Y) = p_D(Y); p_ts(A=T|L) = 0; p_ts(A=T|M) = 1
        assert ts_spec.prior_malicious == d_ts.empirical_prior_malicious()
        assert ts_spec.attack_prob[L] == 0.0
        assert ts_spec.attack_prob[M] == 1.0
        # p_ts(X|y, F) = p_D(X|y) (empirical slices); attack component empirical
        assert ts_spec.components[(L, F)].pool == d_ts.restrict(label=L)
        assert ts_spec.components[(M, F)].pool == d_ts.restrict(label=M)
        assert isinstance(ts_spec.components[(M, T)], EmpiricalPool)
        assert len(ts_spec.components[(M, T)].pool) == len(d_ts.restrict(label=M))

    def test_biometric_column(self):
        scen = scenario_from_config(canned_config("bio_spoof_fingerprint")["attack"])
        table = synthetic_score_table(seed=11, n_genuine=100, n_impostor=300)
        folds = resample(table, Chronological(300), seed=1)
        d_tr, d_ts = folds.pairs[0]
        pools = build_scenario_pools(d_tr, d_ts, scen, strength=1.0, seed=0)
        tr_spec, ts_spec = scenario_distribution_specs(scen, pools, 1.0, d_tr, d_ts)
        assert tr_spec is None  # p_tr = p_D
        assert ts_spec.prior_malicious == d_ts.empirical_prior_malicious()
        assert ts_spec.attack_prob[L] == 0.0
        assert ts_spec.attack_prob[M] == 1.0
        assert ts_spec.components[(L, F)].pool == d_ts.restrict(label=L)
        assert isinstance(ts_spec.components[(M, T)], EmpiricalPool)

    def test_ids_column(self):
        scen = scenario_from_config(canned_config("ids_poison")["attack"])
        traffic = synthetic_ids_traffic(seed=5, n_train=100, n_test_legit=100, n_test_malicious=30)
        folds = resample(traffic, Chronological(100), seed=1)
        d_tr, d_ts = folds.pairs[0]
        pools = build_scenario_pools(d_tr, d_ts, scen, strength=0.4, seed=0)
        tr_spec, ts_spec = scenario_distribution_specs(scen, pools, 0.4, d_tr, d_ts)
        assert ts_spec is None  # testing untouched: p_ts = p_D
        # p_tr(M) = p_max; p_tr(A=T|L) = 0; p_tr(A=T|M) = 1
        assert tr_spec.prior_malicious == 0.4
        assert tr_spec.attack_prob[L] == 0.0
        assert tr_spec.attack_prob[M] == 1.0
        # p_tr(X|L,F) = p_D(X|L); attack pool equals the malicious testing pool
        assert tr_spec.components[(L, F)].pool == d_tr.restrict(label=L)
        attacked = tr_spec.components[(M, T)].pool
        np.testing.assert_array_equal(
            attacked.features, d_ts.restrict(label=M).features
        )
        # one-class training has no clean malicious mass
        assert (M, F) not in tr_spec.components
