import numpy as np

from clfsec.rng import derive_rng, derive_seed_words, derive_subseed


class TestStreamDerivation:
    def test_identical_tags_identical_stream(self):
        a = derive_rng(42, "fold", 3, "ts").random(16)
        b = derive_rng(42, "fold", 3, "ts").random(16)
        np.testing.assert_array_equal(a, b)

    def test_distinct_tags_distinct_streams(self):
        tags = [("labels",), ("features",), ("fold", 0), ("fold", 1), ("fold", 0, "rep", 1)]
        draws = {t: tuple(derive_rng(7, *t).random(4)) for t in tags}
        assert len(set(draws.values())) == len(tags)

    def test_seed_words_stable(self):
        # the derivation is part of the reproducibility contract
        assert derive_seed_words(5, "x", 2)[0] == 5
        assert derive_seed_words(5, "x", 2) == derive_seed_words(5, "x", 2)
        assert derive_seed_words(5, "x") != derive_seed_words(5, "y")

    def test_frozen_reference_draws(self):
        # canary values: a change here breaks every seeded experiment
        rng = derive_rng(1234, "labels")
        np.testing.assert_allclose(
            rng.random(3),
            [0.7188301441592381, 0.929043243032751, 0.6134451018164103],
            rtol=0,
            atol=0,
        )
        assert derive_subseed(1234, "fold", 0, "rep", 0, "train") == 8629582910209398811

    def test_subseed_range(self):
        for seed in range(20):
            v = derive_subseed(seed, "t")
            assert 0 <= v < 2**63
