"""Leave-one-speaker-out evaluation of (symptom, phoneme) pairs.

For each pair: hold out one speaker at a time, fit a forest on the remaining
speakers' segments, predict the held-out segments, and correlate the pooled
out-of-fold predictions with the true ratings (Pearson r, two-sided t-test).
The pooled per-instance correlation is primary; a per-speaker correlation
over speaker-mean predictions is always computed alongside it, because pooled
instances from the same speaker share one rating and the pooled p-value does
not account for that grouping.

Pairs with fewer than `min_instances` usable segments (default 20) or fewer
than two rated speakers are reported as "insufficient-data"; pairs whose
pooled correlation is undefined (zero variance) as "degenerate".
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import (AudioStore, Dataset, PhonemeFeatures, SegmentRecord,
                     dataset_from_features, extract_phoneme_features)
from .features import FeatureConfig
from .model import RatingForestRegressor, RfConfig
from .scales import RatingTable, registry_index, symptom_spec
from .stats import DegenerateError, StatsError, correlation_stats, pearson_r

log = logging.getLogger(__name__)

DEFAULT_MIN_INSTANCES = 20

STATUS_EVALUATED = "evaluated"
STATUS_INSUFFICIENT = "insufficient-data"
STATUS_DEGENERATE = "degenerate"


class EvalError(ValueError):
    """Evaluation cannot proceed on the given inputs."""


def loso_folds(speakers: np.ndarray) -> list[tuple[str, np.ndarray]]:
    """(held-out speaker, test mask) per fold, in lexicographic speaker order.

    The masks partition the instances: each instance is tested exactly once, and
    a fold's training set is everything outside its mask.
    """
    unique = sorted(set(speakers.tolist()))
    if len(unique) < 2:
        raise EvalError(f"LOSO requires >= 2 speakers, got {len(unique)}")
    return [(spk, speakers == spk) for spk in unique]


def run_loso(data: Dataset, forest: RatingForestRegressor) -> np.ndarray:
    """Out-of-fold predictions for every instance, one fold per speaker.

    Each fold refits a forest with the same seed and stream label (tree seeds
    do not depend on the fold), so the full prediction vector is a pure
    function of (data, forest params).
    """
    preds = np.empty(data.n_instances)
    for _, test in loso_folds(data.speakers):
        fold_forest = RatingForestRegressor(**forest.get_params())
        fold_forest.fit(data.X[~test], data.y[~test])
        preds[test] = fold_forest.predict(data.X[test])
    return preds


@dataclass
class PairResult:
    """Evaluation outcome for one (symptom, phoneme) pair.

    r/p/per_speaker_r are None unless status is "evaluated". Speaker-level
    arrays (fold order) are carried for category aggregation and the
    speaker-means CSV; they are present whenever predictions were computed.
    """

    symptom: str
    phoneme: str
    n: int
    r: float | None
    p: float | None
    per_speaker_r: float | None
    status: str
    speaker_ids: tuple[str, ...] = ()
    speaker_mean_pred: np.ndarray | None = field(default=None, repr=False)
    speaker_ratings: np.ndarray | None = field(default=None, repr=False)
    speaker_counts: np.ndarray | None = field(default=None, repr=False)


def _speaker_means(data: Dataset, preds: np.ndarray):
    speakers = sorted(set(data.speakers.tolist()))
    mean_pred = np.empty(len(speakers))
    ratings = np.empty(len(speakers))
    counts = np.empty(len(speakers), dtype=np.int64)
    for i, spk in enumerate(speakers):
        mask = data.speakers == spk
        mean_pred[i] = preds[mask].mean()
        ratings[i] = data.y[mask][0]
        counts[i] = int(mask.sum())
    return tuple(speakers), mean_pred, ratings, counts


def evaluate_dataset(data: Dataset, rf: RfConfig = RfConfig(), seed: int = 0,
                     min_instances: int = DEFAULT_MIN_INSTANCES) -> PairResult:
    """LOSO-evaluate one assembled dataset into a PairResult."""
    n = data.n_instances
    if n < min_instances or data.n_speakers < 2:
        return PairResult(data.symptom, data.phoneme, n, None, None, None,
                          STATUS_INSUFFICIENT)
    forest = rf.make_estimator(seed, f"{data.symptom}|{data.phoneme}")
    preds = run_loso(data, forest)
    speaker_ids, mean_pred, sp_ratings, counts = _speaker_means(data, preds)
    try:
        pooled = correlation_stats(preds, data.y)
    except DegenerateError:
        return PairResult(data.symptom, data.phoneme, n, None, None, None,
                          STATUS_DEGENERATE, speaker_ids, mean_pred,
                          sp_ratings, counts)
    per_speaker_r = None
    if len(speaker_ids) >= 3:
        try:
            per_speaker_r = pearson_r(mean_pred, sp_ratings)
        except StatsError:
            per_speaker_r = None
    return PairResult(data.symptom, data.phoneme, n, pooled.r, pooled.p,
                      per_speaker_r, STATUS_EVALUATED, speaker_ids, mean_pred,
                      sp_ratings, counts)


def evaluate_pair(symptom: str, phoneme: str, segments: list[SegmentRecord],
                  store: AudioStore, ratings: RatingTable,
                  feature_config: FeatureConfig, rf: RfConfig = RfConfig(),
                  seed: int = 0,
                  min_instances: int = DEFAULT_MIN_INSTANCES) -> PairResult:
    """Assemble and evaluate a single (symptom, phoneme) pair from corpus inputs."""
    pf = extract_phoneme_features(segments, store, phoneme, feature_config)
    data = dataset_from_features(pf, ratings, symptom, require_viable=False)
    return evaluate_dataset(data, rf, seed, min_instances)


def _grid_order(symptoms, phonemes):
    symptoms = [symptom_spec(s).code for s in symptoms]
    symptoms.sort(key=registry_index)
    phonemes = sorted(p.upper() for p in phonemes)
    return symptoms, phonemes


def _eval_phoneme(phoneme: str, segments, audio_root, rate, ratings, symptoms,
                  feature_config, rf, seed, min_instances) -> list[PairResult]:
    store = AudioStore(audio_root, rate)
    pf = extract_phoneme_features(segments, store, phoneme, feature_config)
    out = []
    for symptom in symptoms:
        data = dataset_from_features(pf, ratings, symptom, require_viable=False)
        out.append(evaluate_dataset(data, rf, seed, min_instances))
    return out


def evaluate_grid(segments: list[SegmentRecord], audio_root: str,
                  ratings: RatingTable, symptoms: list[str],
                  phonemes: list[str], feature_config: FeatureConfig,
                  rf: RfConfig = RfConfig(), seed: int = 0,
                  min_instances: int = DEFAULT_MIN_INSTANCES,
                  jobs: int = 1) -> list[PairResult]:
    """Evaluate every (symptom, phoneme) pair in the grid.

    Results come back in canonical order — symptoms in registry order,
    phonemes alphabetical — independent of `jobs`, which only controls how
    many worker processes share the per-phoneme work.
    """
    symptoms, phonemes = _grid_order(symptoms, phonemes)
    by_phoneme: dict[str, list[PairResult]] = {}
    if jobs <= 1 or len(phonemes) <= 1:
        for phoneme in phonemes:
            by_phoneme[phoneme] = _eval_phoneme(
                phoneme, segments, audio_root, feature_config.rate, ratings,
                symptoms, feature_config, rf, seed, min_instances)
            log.info("evaluated %s (%d symptoms)", phoneme, len(symptoms))
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(phonemes))) as pool:
            futures = {
                phoneme: pool.submit(
                    _eval_phoneme, phoneme, segments, audio_root,
                    feature_config.rate, ratings, symptoms, feature_config,
                    rf, seed, min_instances)
                for phoneme in phonemes
            }
            for phoneme in phonemes:
                by_phoneme[phoneme] = futures[phoneme].result()
                log.info("evaluated %s (%d symptoms)", phoneme, len(symptoms))
    results = []
    for si in range(len(symptoms)):
        for phoneme in phonemes:
            results.append(by_phoneme[phoneme][si])
    return results


# ---------------------------------------------------------------- CSV I/O
#
# pairs.csv is the flat result table; speaker_means.csv carries the
# speaker-level aggregates needed to rebuild category scores without
# re-running the forests. Floats are written with repr so a read-back is
# bit-exact and file-driven selection matches in-memory selection.

PAIRS_HEADER = "symptom,phoneme,n,r,p,per_speaker_r,status"
SPEAKER_MEANS_HEADER = "symptom,phoneme,speaker_id,n_instances,mean_prediction,rating"


def _opt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_pairs_csv(path: str, results: list[PairResult]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(PAIRS_HEADER + "\n")
        for res in results:
            fh.write(f"{res.symptom},{res.phoneme},{res.n},{_opt(res.r)},"
                     f"{_opt(res.p)},{_opt(res.per_speaker_r)},{res.status}\n")


def read_pairs_csv(path: str) -> list[PairResult]:
    results = []
    with open(path, "r", newline="") as fh:
        if fh.readline().rstrip("\n") != PAIRS_HEADER:
            raise EvalError(f"{path}: expected header {PAIRS_HEADER}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != 7:
                raise EvalError(f"{path}: line {lineno}: expected 7 fields, got {len(parts)}")
            symptom, phoneme, n, r, p, psr, status = parts
            if status not in (STATUS_EVALUATED, STATUS_INSUFFICIENT, STATUS_DEGENERATE):
                raise EvalError(f"{path}: line {lineno}: unknown status {status!r}")
            results.append(PairResult(
                symptom, phoneme, int(n),
                float(r) if r else None, float(p) if p else None,
                float(psr) if psr else None, status))
    return results


def write_speaker_means_csv(path: str, results: list[PairResult]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SPEAKER_MEANS_HEADER + "\n")
        for res in results:
            if res.speaker_mean_pred is None:
                continue
            for i, spk in enumerate(res.speaker_ids):
                fh.write(f"{res.symptom},{res.phoneme},{spk},"
                         f"{res.speaker_counts[i]},"
                         f"{repr(float(res.speaker_mean_pred[i]))},"
                         f"{int(res.speaker_ratings[i])}\n")


def read_speaker_means_csv(path: str) -> dict[tuple[str, str], dict]:
    """(symptom, phoneme) -> {speaker_ids, mean_pred, ratings, counts}."""
    rows: dict[tuple[str, str], list] = {}
    with open(path, "r", newline="") as fh:
        if fh.readline().rstrip("\n") != SPEAKER_MEANS_HEADER:
            raise EvalError(f"{path}: expected header {SPEAKER_MEANS_HEADER}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != 6:
                raise EvalError(f"{path}: line {lineno}: expected 6 fields, got {len(parts)}")
            symptom, phoneme, spk, n_i, mean_pred, rating = parts
            rows.setdefault((symptom, phoneme), []).append(
                (spk, int(n_i), float(mean_pred), int(rating)))
    out = {}
    for key, entries in rows.items():
        out[key] = {
            "speaker_ids": tuple(e[0] for e in entries),
            "counts": np.array([e[1] for e in entries], dtype=np.int64),
            "mean_pred": np.array([e[2] for e in entries]),
            "ratings": np.array([e[3] for e in entries], dtype=np.float64),
        }
    return out


def load_results(pairs_path: str, speaker_means_path: str | None = None
                 ) -> list[PairResult]:
    """Rebuild PairResults from CSVs, reattaching speaker-level aggregates."""
    results = read_pairs_csv(pairs_path)
    if speaker_means_path is not None and os.path.exists(speaker_means_path):
        means = read_speaker_means_csv(speaker_means_path)
        for i, res in enumerate(results):
            extra = means.get((res.symptom, res.phoneme))
            if extra is not None:
                results[i] = replace(
                    res, speaker_ids=extra["speaker_ids"],
                    speaker_mean_pred=extra["mean_pred"],
                    speaker_ratings=extra["ratings"],
                    speaker_counts=extra["counts"])
    return results
