"""Segmentation files, per-phoneme feature extraction, and dataset assembly."""

import numpy as np
import pytest

from phonograde import (
    AudioStore,
    FeatureConfig,
    SegmentRecord,
    assemble_dataset,
    dataset_from_features,
    extract_phoneme_features,
    load_segmentation,
    write_segmentation,
    write_wav,
)
from phonograde.corpus import CorpusError
from phonograde.scales import RatingTable

HEADER = "recording_id\tspeaker_id\tstart_s\tdur_s\tlabel\n"


def _write_seg(tmp_path, rows, name="segments.tsv"):
    path = tmp_path / name
    path.write_text(HEADER + "".join(r + "\n" for r in rows))
    return str(path)


@pytest.fixture()
def noise_store(tmp_path):
    """One 2-second noise recording per speaker, at 16 kHz."""
    rng = np.random.default_rng(0)
    audio = tmp_path / "audio"
    audio.mkdir()
    for rec in ("R01", "R02"):
        write_wav(str(audio / f"{rec}.wav"), 0.3 * rng.normal(size=32000), 16000)
    return AudioStore(str(audio), 16000)


def test_segmentation_round_trip(tmp_path):
    records = [
        SegmentRecord("R01", "S01", 0.5, 0.06, "F"),
        SegmentRecord("R01", "S01", 1.0, 0.05, "V"),
        SegmentRecord("R02", "S02", 0.25, 0.07, "SIL"),
    ]
    path = tmp_path / "seg.tsv"
    write_segmentation(str(path), records)
    back = load_segmentation(str(path))
    assert back.records == records
    assert back.skipped == {}


def test_strict_mode_raises_with_line_numbers(tmp_path):
    path = _write_seg(tmp_path, ["R01\tS01\t0.5\t0.06\tF", "R01\tS01\tx\t0.06\tF"])
    with pytest.raises(CorpusError, match="line 3: non-numeric start/duration"):
        load_segmentation(path)


@pytest.mark.parametrize("row,reason", [
    ("R01\tS01\t0.5\t0.06", "bad_fields"),
    ("R01\tS01\tnope\t0.06\tF", "bad_number"),
    ("R01\tS01\t-1.0\t0.06\tF", "bad_number"),
    ("R01\tS01\t0.5\t0.0\tF", "non_positive_duration"),
    ("R01\tS01\t0.5\t-0.06\tF", "non_positive_duration"),
    ("R01\tS01\t0.5\t0.06\tQX", "unknown_label"),
])
def test_lenient_mode_tallies_each_reason(tmp_path, row, reason):
    path = _write_seg(tmp_path, ["R01\tS01\t0.5\t0.06\tF", row])
    result = load_segmentation(path, strict=False)
    assert len(result.records) == 1
    assert result.skipped == {reason: 1}


def test_labels_are_upcased_blank_lines_ignored(tmp_path):
    path = _write_seg(tmp_path, ["R01\tS01\t0.5\t0.06\tf", "", "R01\tS01\t1.0\t0.06\tsil"])
    result = load_segmentation(path)
    assert [r.label for r in result.records] == ["F", "SIL"]


def test_header_must_match(tmp_path):
    path = tmp_path / "seg.tsv"
    path.write_text("a\tb\tc\td\te\nR01\tS01\t0.5\t0.06\tF\n")
    with pytest.raises(CorpusError, match="expected header"):
        load_segmentation(str(path))


def test_extract_features_canonical_order_is_input_order_independent(noise_store, tmp_path):
    segs = [
        SegmentRecord("R02", "S02", 0.2, 0.06, "F"),
        SegmentRecord("R01", "S01", 0.8, 0.06, "F"),
        SegmentRecord("R01", "S01", 0.2, 0.06, "F"),
        SegmentRecord("R01", "S01", 0.2, 0.06, "V"),  # other phoneme: ignored
    ]
    config = FeatureConfig()
    pf = extract_phoneme_features(segs, noise_store, "F", config)
    assert pf.phoneme == "F"
    assert pf.n_instances == 3
    assert [(r.speaker_id, r.start_s) for r in pf.records] == \
        [("S01", 0.2), ("S01", 0.8), ("S02", 0.2)]
    shuffled = extract_phoneme_features(segs[::-1], noise_store, "F", config)
    np.testing.assert_array_equal(pf.X, shuffled.X)


def test_extract_features_skips_short_and_silent_segments(noise_store, tmp_path):
    # 0.01 s * 16 kHz = 160 samples, below the 258-sample AR minimum
    segs = [
        SegmentRecord("R01", "S01", 0.2, 0.06, "F"),
        SegmentRecord("R01", "S01", 0.5, 0.01, "F"),
    ]
    pf = extract_phoneme_features(segs, noise_store, "F", FeatureConfig())
    assert pf.n_instances == 1
    assert pf.skipped == {"too_short": 1}


def test_extract_features_skips_zero_energy(tmp_path):
    audio = tmp_path / "audio"
    audio.mkdir()
    x = np.zeros(16000)
    x[:4000] = 0.2 * np.random.default_rng(1).normal(size=4000)
    write_wav(str(audio / "R01.wav"), x, 16000)
    store = AudioStore(str(audio), 16000)
    segs = [
        SegmentRecord("R01", "S01", 0.05, 0.06, "F"),
        SegmentRecord("R01", "S01", 0.5, 0.06, "F"),  # all zeros
    ]
    pf = extract_phoneme_features(segs, store, "F", FeatureConfig())
    assert pf.n_instances == 1
    assert pf.skipped == {"zero_energy": 1}


def test_missing_recording_is_fatal(noise_store):
    segs = [SegmentRecord("R99", "S01", 0.2, 0.06, "F")]
    with pytest.raises(CorpusError, match="missing audio for recording 'R99'"):
        extract_phoneme_features(segs, noise_store, "F", FeatureConfig())


def test_dataset_joins_ratings_and_drops_unrated(noise_store):
    segs = [
        SegmentRecord("R01", "S01", 0.2, 0.06, "F"),
        SegmentRecord("R01", "S01", 0.6, 0.06, "F"),
        SegmentRecord("R02", "S02", 0.2, 0.06, "F"),
        SegmentRecord("R02", "S03", 0.6, 0.06, "F"),  # S03 never rated
    ]
    ratings = RatingTable({("S01", "B6"): 3, ("S02", "B6"): 5})
    data = assemble_dataset(segs, noise_store, ratings, "B6", "F", FeatureConfig())
    assert data.symptom == "B6" and data.phoneme == "F"
    assert data.n_instances == 3 and data.n_speakers == 2
    assert data.y.tolist() == [3.0, 3.0, 5.0]
    assert data.skipped == {"unrated_speaker": 1}


def test_empty_join_reports_why(noise_store):
    segs = [SegmentRecord("R01", "S01", 0.5, 0.01, "F")] * 12
    pf = extract_phoneme_features(segs, noise_store, "F", FeatureConfig())
    ratings = RatingTable({("S01", "B6"): 3})
    with pytest.raises(CorpusError,
                       match=r"B6/F: 0 usable instances \(12 skipped: too short\)"):
        dataset_from_features(pf, ratings, "B6")


def test_single_speaker_join_is_not_viable(noise_store):
    segs = [
        SegmentRecord("R01", "S01", 0.2, 0.06, "F"),
        SegmentRecord("R02", "S02", 0.2, 0.06, "F"),
    ]
    ratings = RatingTable({("S01", "B6"): 3})  # only one rated speaker
    with pytest.raises(CorpusError, match="needs >= 2 speakers, got 1"):
        assemble_dataset(segs, noise_store, ratings, "B6", "F", FeatureConfig())
    pf = extract_phoneme_features(segs, noise_store, "F", FeatureConfig())
    data = dataset_from_features(pf, ratings, "B6", require_viable=False)
    assert data.n_instances == 1


def test_store_loads_and_caches_recordings(noise_store):
    segs = [SegmentRecord("R01", "S01", 0.25, 0.0625, "F")]
    pf = extract_phoneme_features(segs, noise_store, "F", FeatureConfig())
    assert pf.X.shape == (1, 64)
    buf = noise_store.get("R01")
    assert buf.rate == 16000
    assert noise_store.get("R01") is buf
