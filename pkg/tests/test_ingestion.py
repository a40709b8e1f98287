import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clfsec.data_model import AttackFlag, Dataset, Label
from clfsec.ingestion import (
    MinMaxBounds,
    Vocabulary,
    information_gain_select,
    load_payloads,
    load_scores,
    load_tabular,
    payload_histogram,
    tokenize_emails,
    tokenize_text,
    vectorize,
    vectorize_corpus,
    write_dense_csv,
    write_sparse,
)

L, M = Label.LEGITIMATE, Label.MALICIOUS


class TestTokenizer:
    def test_presence_semantics(self):
        assert tokenize_text("buy viagra buy") == {"buy", "viagra"}

    def test_empty_document(self):
        assert tokenize_text("") == frozenset()

    def test_identical_documents_identical_sets(self):
        text = "Cheap Meds!! visit http://pills.example now"
        assert tokenize_text(text) == tokenize_text(text)

    def test_lowercase_split_and_length_filter(self):
        toks = tokenize_text("A BB " + "x" * 41 + " good-word under_score café")
        assert "a" not in toks  # too short
        assert "bb" in toks and "good" in toks and "word" in toks
        assert "x" * 41 not in toks  # too long
        assert "under" in toks and "score" in toks

    def test_corpus_index(self, tmp_path):
        (tmp_path / "a.txt").write_text("buy viagra now", encoding="utf-8")
        (tmp_path / "b.txt").write_text("meeting agenda attached", encoding="utf-8")
        (tmp_path / "c.txt").write_bytes(b"\xff\xfe invalid \xff utf8")
        index = tmp_path / "index"
        index.write_text("spam a.txt\nham b.txt\nspam c.txt\n", encoding="utf-8")
        with pytest.warns(UserWarning, match="skipping"):
            token_sets, labels, skipped = tokenize_emails(index)
        assert skipped == 1
        assert labels == [M, L]
        assert token_sets[0] == {"buy", "viagra", "now"}


class TestInformationGain:
    def _entropy(self, *counts):
        total = sum(counts)
        return -sum(c / total * math.log2(c / total) for c in counts if c)

    def test_perfect_term_has_full_entropy_gain(self):
        token_sets = [{"win"}, {"win"}, {"hello"}, {"hello"}]
        labels = [M, M, L, L]
        vocab = information_gain_select(token_sets, labels, 2)
        assert vocab.terms[0] in ("hello", "win")
        assert vocab.gains[0] == pytest.approx(self._entropy(2, 2), abs=1e-12)

    def test_constant_term_gains_nothing(self):
        token_sets = [{"the", "win"}, {"the"}, {"the"}, {"the", "x"}]
        labels = [M, M, L, L]
        vocab = information_gain_select(token_sets, labels, 10)
        gain = dict(zip(vocab.terms, vocab.gains))
        assert gain["the"] == pytest.approx(0.0, abs=1e-15)

    def test_four_document_hand_oracle(self):
        # docs: M:{a,b} M:{a} L:{b} L:{c}; hand entropy arithmetic in bits
        token_sets = [{"a", "b"}, {"a"}, {"b"}, {"c"}]
        labels = [M, M, L, L]
        vocab = information_gain_select(token_sets, labels, 3)
        gain = dict(zip(vocab.terms, vocab.gains))
        h_y = 1.0
        # a: present in 2 (both M), absent in 2 (both L) -> IG = 1 bit
        assert gain["a"] == pytest.approx(h_y, abs=1e-12)
        # b: present in 2 (one each), absent in 2 (one each) -> IG = 0
        assert gain["b"] == pytest.approx(0.0, abs=1e-12)
        # c: present in 1 (L), absent in 3 (2 M, 1 L)
        ig_c = h_y - (1 / 4) * 0.0 - (3 / 4) * self._entropy(2, 1)
        assert gain["c"] == pytest.approx(ig_c, abs=1e-12)

    def test_oversized_vocab_warns_and_keeps_all(self):
        token_sets = [{"a"}, {"b"}]
        with pytest.warns(UserWarning, match="distinct terms"):
            vocab = information_gain_select(token_sets, [M, L], 10)
        assert len(vocab) == 2

    def test_ordering_gain_then_lexicographic(self):
        token_sets = [{"zz", "aa", "mm"}, {"zz", "aa", "mm"}, set(), set()]
        labels = [M, M, L, L]
        vocab = information_gain_select(token_sets, labels, 3)
        assert list(vocab.terms) == ["aa", "mm", "zz"]  # equal gains, lexicographic

    def test_vocabulary_deterministic(self, rng):
        words = [f"w{i}" for i in range(25)]
        token_sets = [frozenset(w for w in words if rng.random() < 0.4) for _ in range(30)]
        labels = [M] * 15 + [L] * 15
        a = information_gain_select(token_sets, labels, 15)
        b = information_gain_select(list(token_sets), list(labels), 15)
        assert a == b

    def test_nonnegative_gains(self, rng):
        words = [f"w{i}" for i in range(30)]
        token_sets = [frozenset(w for w in words if rng.random() < 0.3) for _ in range(40)]
        labels = [M if rng.random() < 0.5 else L for _ in range(40)]
        if labels.count(M) in (0, 40):
            labels[0] = L if labels[0] is M else M
        vocab = information_gain_select(token_sets, labels, 30)
        assert all(g >= -1e-15 for g in vocab.gains)


class TestVectorize:
    VOCAB = Vocabulary(terms=("alpha", "beta", "gamma"), gains=(0.5, 0.3, 0.1))

    def test_empty_token_set(self):
        np.testing.assert_array_equal(vectorize(set(), self.VOCAB), [0, 0, 0])

    def test_superset_gives_ones(self):
        toks = {"alpha", "beta", "gamma", "delta"}
        np.testing.assert_array_equal(vectorize(toks, self.VOCAB), [1, 1, 1])

    def test_disjoint_gives_zeros(self):
        np.testing.assert_array_equal(vectorize({"x", "y"}, self.VOCAB), [0, 0, 0])

    def test_corpus_vectorization(self):
        ds = vectorize_corpus([frozenset({"alpha"}), frozenset({"beta", "zz"})], [M, L], self.VOCAB)
        assert ds.dimension == 3
        np.testing.assert_array_equal(ds.features, [[1, 0, 0], [0, 1, 0]])


class TestPayloadHistogram:
    def test_uniform_single_byte(self):
        h = payload_histogram(b"\x41\x41\x41\x41")
        assert h[65] == 1.0 and h.sum() == 1.0 and np.count_nonzero(h) == 1

    def test_two_bytes(self):
        h = payload_histogram(b"\x00\x01")
        assert h[0] == 0.5 and h[1] == 0.5

    @given(st.binary(min_size=1, max_size=300))
    def test_simplex(self, payload):
        h = payload_histogram(payload)
        assert h.shape == (256,)
        assert np.all(h >= 0)
        assert abs(h.sum() - 1.0) <= 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty payload"):
            payload_histogram(b"")

    def test_load_payload_file(self, tmp_path):
        p = tmp_path / "pcap.txt"
        p.write_text("41414141,L\n0001,M\n", encoding="utf-8")
        ds = load_payloads(p)
        assert ds.dimension == 256 and len(ds) == 2
        assert ds.features[0][65] == 1.0
        assert ds.label_codes.tolist() == [0, 1]


class TestScores:
    def test_min_max_normalization(self, tmp_path):
        p = tmp_path / "scores.csv"
        p.write_text(
            "user_id,claimed_id,fing_score,face_score,label\n"
            "u1,u1,2,10,genuine\n"
            "u2,u1,4,30,impostor\n"
            "u3,u1,6,20,impostor\n",
            encoding="utf-8",
        )
        table = load_scores(p)
        np.testing.assert_allclose(table.dataset.features[:, 0], [0.0, 0.5, 1.0])
        np.testing.assert_allclose(table.dataset.features[:, 1], [0.0, 1.0, 0.5])
        assert table.dataset.label_codes.tolist() == [0, 1, 1]
        assert table.user_ids == ("u1", "u2", "u3")

    def test_constant_matcher_rejected(self, tmp_path):
        p = tmp_path / "scores.csv"
        p.write_text(
            "user_id,claimed_id,fing_score,face_score,label\nu1,u1,2,5,L\n",
            encoding="utf-8",
        )
        with pytest.raises(ValueError, match="degenerate scores"):
            load_scores(p)

    def test_bounds_clip_out_of_range(self):
        b = MinMaxBounds(lo=(0.0, 0.0), hi=(1.0, 1.0))
        out = b.apply(np.array([[1.5, -0.5]]))
        np.testing.assert_array_equal(out, [[1.0, 0.0]])

    def test_normalization_idempotent_on_unit_bounds(self, rng):
        b = MinMaxBounds(lo=(0.0, 0.0), hi=(1.0, 1.0))
        X = rng.random((20, 2))
        np.testing.assert_array_equal(b.apply(X), X)


class TestTabularIO:
    def test_dense_file_order(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,f1,label\n1,2,L\n3,4,M\n", encoding="utf-8")
        ds = load_tabular(p)
        np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4]])
        assert ds.label_codes.tolist() == [0, 1]

    def test_sparse_triplet_line(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("3 1:1 7:1,M\n", encoding="utf-8")
        ds = load_tabular(p)
        assert np.flatnonzero(ds.features[0]).tolist() == [1, 7]
        assert ds[0].label is M

    def test_dense_round_trip(self, tmp_path):
        for seed in range(40):
            rng = np.random.default_rng(seed)
            scale = 10.0 ** rng.integers(-12, 12, (6, 4))
            X = np.where(
                rng.random((6, 4)) < 0.3,
                rng.normal(size=(6, 4)) * scale,
                rng.integers(-3, 4, (6, 4)).astype(float),
            )
            ds = Dataset.from_arrays(X, [M if v < 0.5 else L for v in rng.random(6)])
            path = tmp_path / f"rt{seed}.csv"
            write_dense_csv(ds, path)
            assert load_tabular(path) == ds

    def test_sparse_round_trip(self, rng, tmp_path):
        X = np.where(rng.random((8, 5)) < 0.4, rng.normal(size=(8, 5)), 0.0)
        ds = Dataset.from_arrays(X, [M if v < 0.5 else L for v in rng.random(8)])
        path = tmp_path / "rt.sparse"
        write_sparse(ds, path)
        assert load_tabular(path) == ds

    def test_ragged_dense_names_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("f0,f1,label\n1,2,L\n3,M\n", encoding="utf-8")
        with pytest.raises(ValueError, match="line 3"):
            load_tabular(p)

    def test_unknown_label_names_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("f0,label\n1,L\n2,Q\n", encoding="utf-8")
        with pytest.raises(ValueError, match=r"bad\.csv:3"):
            load_tabular(p)

    def test_flags_not_persisted(self, tmp_path):
        ds = Dataset.from_arrays(
            np.ones((2, 2)), [M, M], [AttackFlag.ATTACKED, AttackFlag.CLEAN]
        )
        path = tmp_path / "f.csv"
        write_dense_csv(ds, path)
        back = load_tabular(path)
        assert np.all(back.flag_codes == 0)  # provenance is in-process only
