"""Corpus plumbing: segmentation files, audio access, dataset assembly.

A corpus is (audio recordings, a phoneme segmentation, per-speaker ratings).
Assembly joins the three into per-(symptom, phoneme) regression datasets:
one row per usable segment, features from `features`, target = the segment
speaker's rating. Rows are kept in a canonical order — sorted by (speaker,
recording, start, duration) — so downstream results never depend on file
order or scheduling.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureConfig, FeatureError, FeatureRecord, segment_features
from .phonetics import is_known
from .scales import RatingTable, symptom_spec
from .signal import AudioBuffer, load_audio, slice_segment

log = logging.getLogger(__name__)

SEGMENTATION_COLUMNS = ("recording_id", "speaker_id", "start_s", "dur_s", "label")


class CorpusError(ValueError):
    """Malformed segmentation data or a dataset that cannot be assembled."""


@dataclass(frozen=True)
class SegmentRecord:
    recording_id: str
    speaker_id: str
    start_s: float
    dur_s: float
    label: str


@dataclass
class SegmentationResult:
    records: list[SegmentRecord]
    skipped: dict[str, int] = field(default_factory=dict)


def load_segmentation(path: str, strict: bool = True) -> SegmentationResult:
    """Read a segmentation TSV (header + one row per segment).

    Strict mode raises on the first malformed row; lenient mode skips bad rows
    and tallies them by reason ("bad_fields", "bad_number",
    "non_positive_duration", "unknown_label").
    """
    records: list[SegmentRecord] = []
    skipped = {"bad_fields": 0, "bad_number": 0, "non_positive_duration": 0,
               "unknown_label": 0}

    def bad(lineno: int, reason: str, detail: str):
        if strict:
            raise CorpusError(f"{path}: line {lineno}: {detail}")
        skipped[reason] += 1

    with open(path, "r", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != list(SEGMENTATION_COLUMNS):
            raise CorpusError(f"{path}: expected header "
                              + "\\t".join(SEGMENTATION_COLUMNS))
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                bad(lineno, "bad_fields", f"expected 5 fields, got {len(parts)}")
                continue
            rec_id, speaker, raw_start, raw_dur, label = parts
            try:
                start_s = float(raw_start)
                dur_s = float(raw_dur)
            except ValueError:
                bad(lineno, "bad_number", f"non-numeric start/duration {raw_start!r}/{raw_dur!r}")
                continue
            if not np.isfinite(start_s) or not np.isfinite(dur_s) or start_s < 0:
                bad(lineno, "bad_number", f"bad start/duration {start_s}/{dur_s}")
                continue
            if dur_s <= 0:
                word = "negative" if dur_s < 0 else "zero"
                bad(lineno, "non_positive_duration", f"{word} duration {dur_s}")
                continue
            label = label.strip().upper()
            if not is_known(label):
                bad(lineno, "unknown_label", f"unknown phoneme label {label!r}")
                continue
            records.append(SegmentRecord(rec_id, speaker, start_s, dur_s, label))
    return SegmentationResult(records, {k: v for k, v in skipped.items() if v})


def write_segmentation(path: str, records: list[SegmentRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("\t".join(SEGMENTATION_COLUMNS) + "\n")
        for r in records:
            fh.write(f"{r.recording_id}\t{r.speaker_id}\t{r.start_s:.9g}\t"
                     f"{r.dur_s:.9g}\t{r.label}\n")


class AudioStore:
    """Lazy, caching access to recordings as `<root>/<recording_id>.wav`,
    resampled to the analysis rate on load."""

    def __init__(self, root: str, rate: int):
        self.root = str(root)
        self.rate = int(rate)
        self._cache: dict[str, AudioBuffer] = {}

    def path_for(self, recording_id: str) -> str:
        return os.path.join(self.root, f"{recording_id}.wav")

    def get(self, recording_id: str) -> AudioBuffer:
        buf = self._cache.get(recording_id)
        if buf is None:
            path = self.path_for(recording_id)
            if not os.path.exists(path):
                raise CorpusError(f"missing audio for recording {recording_id!r}: {path}")
            buf = load_audio(path, target_rate=self.rate)
            self._cache[recording_id] = buf
        return buf


def _canonical(records: list[SegmentRecord]) -> list[SegmentRecord]:
    return sorted(records, key=lambda r: (r.speaker_id, r.recording_id,
                                          r.start_s, r.dur_s))


@dataclass
class PhonemeFeatures:
    """All usable feature rows for one phoneme, in canonical order."""

    phoneme: str
    records: list[FeatureRecord]
    X: np.ndarray  # (n, n_points)
    speakers: np.ndarray  # (n,) object
    skipped: dict[str, int] = field(default_factory=dict)

    @property
    def n_instances(self) -> int:
        return len(self.records)


def extract_phoneme_features(segments: list[SegmentRecord], store: AudioStore,
                             phoneme: str, config: FeatureConfig) -> PhonemeFeatures:
    """Feature rows for every usable segment of one phoneme.

    Segments shorter than the AR minimum (2 * (order + 1) samples) and
    zero-energy segments are skipped and counted, not fatal: real
    segmentations always contain a few clipped fragments.
    """
    phoneme = phoneme.upper()
    chosen = _canonical([s for s in segments if s.label == phoneme])
    records: list[FeatureRecord] = []
    rows: list[np.ndarray] = []
    skipped = {"too_short": 0, "zero_energy": 0}
    for seg in chosen:
        buf = store.get(seg.recording_id)
        samples = slice_segment(buf, seg.start_s, seg.dur_s)
        if samples.size < config.min_samples:
            skipped["too_short"] += 1
            continue
        try:
            values = segment_features(samples, config)
        except FeatureError as exc:
            if "zero-energy" in str(exc) or "degenerate" in str(exc):
                skipped["zero_energy"] += 1
                continue
            raise
        records.append(FeatureRecord(seg.recording_id, seg.speaker_id, phoneme,
                                     seg.start_s, seg.dur_s, values))
        rows.append(values)
    X = np.vstack(rows) if rows else np.empty((0, config.n_points))
    speakers = np.array([r.speaker_id for r in records], dtype=object)
    return PhonemeFeatures(phoneme, records, X, speakers,
                           {k: v for k, v in skipped.items() if v})


@dataclass
class Dataset:
    """One (symptom, phoneme) regression problem in canonical row order."""

    symptom: str
    phoneme: str
    X: np.ndarray  # (n, n_points) float64
    y: np.ndarray  # (n,) float64 integer-valued ratings
    speakers: np.ndarray  # (n,) object
    skipped: dict[str, int] = field(default_factory=dict)

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_speakers(self) -> int:
        return len(set(self.speakers.tolist()))


def dataset_from_features(pf: PhonemeFeatures, ratings: RatingTable, symptom: str,
                          require_viable: bool = True) -> Dataset:
    """Join feature rows with per-speaker ratings for one symptom.

    Rows from speakers missing a rating for the symptom are dropped with a
    warning. With require_viable, an empty join or a single-speaker join is an
    error (leave-one-speaker-out needs at least two speakers); pass False to
    get the dataset anyway and let the caller decide how to report it.
    """
    code = symptom_spec(symptom).code
    rated = ratings.for_symptom(code)
    keep = [i for i, r in enumerate(pf.records) if r.speaker_id in rated]
    dropped = len(pf.records) - len(keep)
    if dropped:
        log.warning("%s/%s: dropped %d instances from speakers without a %s rating",
                    code, pf.phoneme, dropped, code)
    X = pf.X[keep] if keep else np.empty((0, pf.X.shape[1] if pf.X.ndim == 2 else 0))
    y = np.array([float(rated[pf.records[i].speaker_id]) for i in keep])
    speakers = np.array([pf.records[i].speaker_id for i in keep], dtype=object)
    skipped = dict(pf.skipped)
    if dropped:
        skipped["unrated_speaker"] = dropped
    data = Dataset(code, pf.phoneme, X, y, speakers, skipped)
    if require_viable:
        if data.n_instances == 0:
            detail = "; ".join(f"{v} skipped: {k.replace('_', ' ')}"
                               for k, v in skipped.items())
            raise CorpusError(f"{code}/{pf.phoneme}: 0 usable instances"
                              + (f" ({detail})" if detail else ""))
        if data.n_speakers < 2:
            raise CorpusError(f"{code}/{pf.phoneme}: needs >= 2 speakers, "
                              f"got {data.n_speakers}")
    return data


def assemble_dataset(segments: list[SegmentRecord], store: AudioStore,
                     ratings: RatingTable, symptom: str, phoneme: str,
                     config: FeatureConfig) -> Dataset:
    """Extract features for one phoneme and join one symptom's ratings."""
    pf = extract_phoneme_features(segments, store, phoneme, config)
    return dataset_from_features(pf, ratings, symptom)
