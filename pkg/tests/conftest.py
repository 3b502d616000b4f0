"""Shared fixtures: one small planted-effect corpus, evaluated once per session.

The corpus is deliberately tiny (8 speakers, 3 phonemes, 12 instances each)
but large enough that the planted (B6, F) effect survives leave-one-speaker-out
evaluation and F clears the default selection gates.
"""

import numpy as np
import pytest

from phonograde import (
    FeatureConfig,
    PlantedEffect,
    RfConfig,
    RunMeta,
    SynthConfig,
    evaluate_grid,
    generate_corpus,
    load_ratings,
    load_segmentation,
)

SMALL_SEED = 11
SMALL_PHONEMES = ("F", "SIL", "V")
SMALL_TREES = 25


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("small_corpus")
    config = SynthConfig(n_speakers=8, instances_per_phoneme=12,
                         phonemes=SMALL_PHONEMES, seed=SMALL_SEED,
                         effects=(PlantedEffect("B6", "F", 1.0),))
    return generate_corpus(config, str(out))


@pytest.fixture(scope="session")
def small_segments(small_corpus):
    return load_segmentation(small_corpus.segmentation).records


@pytest.fixture(scope="session")
def small_ratings(small_corpus):
    return load_ratings(small_corpus.ratings)


@pytest.fixture(scope="session")
def small_meta():
    return RunMeta(seed=SMALL_SEED, feature_config=FeatureConfig(),
                   rf=RfConfig(n_trees=SMALL_TREES), min_instances=20,
                   symptoms=["B6"], phonemes=list(SMALL_PHONEMES),
                   r_threshold=0.2, p_select=0.001, p_category=0.0001)


@pytest.fixture(scope="session")
def small_results(small_corpus, small_segments, small_ratings, small_meta):
    return evaluate_grid(small_segments, small_corpus.audio_dir, small_ratings,
                         small_meta.symptoms, small_meta.phonemes,
                         small_meta.feature_config, rf=small_meta.rf,
                         seed=small_meta.seed,
                         min_instances=small_meta.min_instances)


@pytest.fixture(scope="session")
def cli_eval_dir(small_corpus, tmp_path_factory):
    """`evaluate` subcommand output over the planted small corpus."""
    from phonograde.cli import main as cli_main

    out = str(tmp_path_factory.mktemp("cli") / "eval")
    rc = cli_main(["evaluate",
                   "--audio", small_corpus.audio_dir,
                   "--seg", small_corpus.segmentation,
                   "--ratings", small_corpus.ratings,
                   "--out", out,
                   "--symptoms", "B6", "--phonemes", ",".join(SMALL_PHONEMES),
                   "--trees", str(SMALL_TREES), "--seed", str(SMALL_SEED)])
    assert rc == 0
    return out


@pytest.fixture()
def rng():
    return np.random.default_rng(20260817)
