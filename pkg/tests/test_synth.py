"""Synthetic corpus generation: reproducibility, layout, and the invariance
that makes phoneme-restricted corpora trustworthy stand-ins for full ones."""

import filecmp
import json
import os

import numpy as np
import pytest

from phonograde import (
    AudioStore,
    PlantedEffect,
    SynthConfig,
    generate_corpus,
    load_ratings,
    load_segmentation,
    slice_segment,
    symptom_spec,
)
from phonograde.synth import SynthError


def _config(**kw):
    base = dict(n_speakers=3, instances_per_phoneme=4, phonemes=("F", "V"), seed=5)
    base.update(kw)
    return SynthConfig(**base)


def test_generation_is_byte_identical(tmp_path):
    a = generate_corpus(_config(), str(tmp_path / "a"))
    b = generate_corpus(_config(), str(tmp_path / "b"))
    for name in ("segmentation", "ratings", "manifest"):
        assert filecmp.cmp(getattr(a, name), getattr(b, name), shallow=False)
    wavs = sorted(os.listdir(a.audio_dir))
    assert wavs == sorted(os.listdir(b.audio_dir))
    for wav in wavs:
        assert filecmp.cmp(os.path.join(a.audio_dir, wav),
                           os.path.join(b.audio_dir, wav), shallow=False)


def test_layout_and_manifest(tmp_path):
    paths = generate_corpus(_config(effects=(PlantedEffect("B6", "F", 0.5),)),
                            str(tmp_path / "c"))
    assert os.path.isdir(paths.audio_dir)
    seg = load_segmentation(paths.segmentation)
    assert seg.skipped == {}
    # 3 speakers x 2 phonemes x 4 instances
    assert len(seg.records) == 24
    manifest = json.load(open(paths.manifest))
    assert manifest["n_speakers"] == 3
    assert manifest["phonemes"] == ["F", "V"]
    assert manifest["planted"] == [{"symptom": "B6", "phoneme": "F", "strength": 0.5}]
    assert set(manifest["templates"]) == {"F", "V"}


def test_every_speaker_rated_on_every_symptom(tmp_path):
    paths = generate_corpus(_config(), str(tmp_path / "c"))
    ratings = load_ratings(paths.ratings)
    rows = list(ratings.items())
    assert len(rows) == 3 * 66
    for (speaker, code), value in rows:
        spec = symptom_spec(code)
        assert spec.min_rating <= value <= spec.max_rating


def test_segment_durations_and_rate(tmp_path):
    config = _config(min_dur_s=0.05, max_dur_s=0.08)
    paths = generate_corpus(config, str(tmp_path / "c"))
    seg = load_segmentation(paths.segmentation)
    for r in seg.records:
        assert 0.05 - 1e-9 <= r.dur_s <= 0.08 + 1e-9
    store = AudioStore(paths.audio_dir, config.rate)
    buf = store.get(seg.records[0].recording_id)
    assert buf.rate == 16000


def test_restricting_phonemes_keeps_identical_segments(tmp_path):
    """Dropping phonemes from the inventory must not change the audio of the
    phonemes kept — segment synthesis is keyed by (speaker, phoneme, index),
    not by position in the recording."""
    full = generate_corpus(_config(phonemes=("F", "S", "V")), str(tmp_path / "full"))
    only_f = generate_corpus(_config(phonemes=("F",)), str(tmp_path / "f"))

    def f_segments(paths):
        segs = [r for r in load_segmentation(paths.segmentation).records
                if r.label == "F"]
        store = AudioStore(paths.audio_dir, 16000)
        return {(r.speaker_id, round(r.dur_s, 6)):
                slice_segment(store.get(r.recording_id), r.start_s, r.dur_s)
                for r in segs}

    a, b = f_segments(full), f_segments(only_f)
    assert a.keys() == b.keys()
    for key in a:
        np.testing.assert_array_equal(a[key], b[key])


def test_planted_effect_only_touches_its_phoneme(tmp_path):
    """An effect on (B6, F) must leave every non-F segment byte-identical to
    the null corpus — otherwise "unplanted" pairs are not a true null."""
    effect = generate_corpus(_config(phonemes=("F", "V"),
                                     effects=(PlantedEffect("B6", "F", 1.0),)),
                             str(tmp_path / "eff"))
    null = generate_corpus(_config(phonemes=("F", "V")), str(tmp_path / "null"))

    def by_key(paths, label):
        segs = [r for r in load_segmentation(paths.segmentation).records
                if r.label == label]
        store = AudioStore(paths.audio_dir, 16000)
        return {(r.speaker_id, round(r.dur_s, 6)):
                slice_segment(store.get(r.recording_id), r.start_s, r.dur_s)
                for r in segs}

    v_eff, v_null = by_key(effect, "V"), by_key(null, "V")
    assert v_eff.keys() == v_null.keys()
    for key in v_eff:
        np.testing.assert_array_equal(v_eff[key], v_null[key])

    # and the planted phoneme itself must actually move
    f_eff, f_null = by_key(effect, "F"), by_key(null, "F")
    changed = sum(not np.array_equal(f_eff[k], f_null[k]) for k in f_eff)
    assert changed > len(f_eff) // 2


def test_effect_strength_bounds():
    with pytest.raises(SynthError, match=r"effect strength must be in \[0, 1\], got 1.5"):
        PlantedEffect("B6", "F", 1.5)
    with pytest.raises(SynthError, match="effect strength"):
        PlantedEffect("B6", "F", -0.1)
    assert PlantedEffect("B6", "F", 0.0).strength == 0.0


def test_config_validation():
    with pytest.raises(SynthError, match="need >= 2 speakers"):
        _config(n_speakers=1)
    with pytest.raises(SynthError, match="need >= 1 instance"):
        _config(instances_per_phoneme=0)
    with pytest.raises(SynthError, match="bad duration range"):
        _config(min_dur_s=0.1, max_dur_s=0.05)
    with pytest.raises(ValueError, match="unknown symptom code"):
        _config(effects=(PlantedEffect("ZZ9", "F"),))
    with pytest.raises(ValueError, match="unknown phoneme label"):
        _config(effects=(PlantedEffect("B6", "QX"),))
    with pytest.raises(ValueError, match="unknown phoneme label"):
        _config(phonemes=("F", "QX"))


def test_zero_strength_equals_no_effect(tmp_path):
    """A strength-0 effect is the null corpus: byte-identical to no effect."""
    a = generate_corpus(_config(effects=(PlantedEffect("B6", "F", 0.0),)),
                        str(tmp_path / "zero"))
    b = generate_corpus(_config(), str(tmp_path / "none"))
    for wav in sorted(os.listdir(a.audio_dir)):
        assert filecmp.cmp(os.path.join(a.audio_dir, wav),
                           os.path.join(b.audio_dir, wav), shallow=False)
