"""Phoneme selection and articulatory-category aggregation.

A phoneme is selected for a symptom when its pooled LOSO correlation clears
both gates: r strictly above the r threshold (default 0.2) and p at or below
the selection threshold (default 0.001). Category scores then aggregate the
most reliable members: for each articulatory category (one value on one of
the manner/place/voicing axes), the member consonants passing the tighter
category gate (default p <= 0.0001) contribute their per-speaker mean
predictions, which are averaged per speaker and correlated with the true
ratings across speakers — n becomes the speaker count, which is the honest
sample size at that level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import STATUS_EVALUATED, PairResult
from .phonetics import AXES, axis_values, classify_phoneme, members_of_category
from .stats import StatsError, correlation_stats

DEFAULT_R_THRESHOLD = 0.2
DEFAULT_P_SELECT = 0.001
DEFAULT_P_CATEGORY = 0.0001


class SelectError(ValueError):
    """Selection or aggregation cannot be carried out on the given results."""


@dataclass(frozen=True)
class SelectedPhoneme:
    phoneme: str
    r: float
    p: float
    n: int


@dataclass(frozen=True)
class CategoryScore:
    """Aggregate correlation of one articulatory category for one symptom.

    `members` are the gate-passing consonants actually aggregated; r/p are
    None when the aggregate is not computable (fewer than 3 speakers, or
    degenerate variance) even though members exist.
    """

    axis: str
    value: str
    members: tuple[str, ...]
    n_speakers: int
    r: float | None
    p: float | None


@dataclass
class SelectionReport:
    symptom: str
    r_threshold: float
    p_select: float
    p_category: float
    selected: list[SelectedPhoneme]
    categories: dict[str, list[CategoryScore]]
    run_id: str | None = None  # ties the selection to the evaluation it came from


def _passes(res: PairResult, r_threshold: float, p_threshold: float) -> bool:
    return (res.status == STATUS_EVALUATED
            and res.r is not None and res.r > r_threshold
            and res.p is not None and res.p <= p_threshold)


def _one_symptom(results: list[PairResult]) -> str:
    symptoms = {res.symptom for res in results}
    if len(symptoms) != 1:
        raise SelectError(f"results span {len(symptoms)} symptoms, expected exactly 1: "
                          f"{sorted(symptoms)}")
    return symptoms.pop()


def select_phonemes(results: list[PairResult],
                    r_threshold: float = DEFAULT_R_THRESHOLD,
                    p_threshold: float = DEFAULT_P_SELECT) -> list[SelectedPhoneme]:
    """Gate-passing phonemes for one symptom, best r first.

    Tightening either threshold can only shrink the returned set.
    """
    _one_symptom(results)
    chosen = [SelectedPhoneme(res.phoneme, res.r, res.p, res.n)
              for res in results if _passes(res, r_threshold, p_threshold)]
    chosen.sort(key=lambda s: (-s.r, s.phoneme))
    return chosen


def aggregate_category(results_by_phoneme: dict[str, PairResult], axis: str,
                       value: str, members: list[str]) -> CategoryScore:
    """Correlate per-speaker means, averaged over member phonemes, with ratings.

    `members` must be non-empty consonants of the category; each contributes
    its speaker-mean LOSO predictions. A speaker's aggregate is the mean over
    the members that cover that speaker. Raises if the category has no
    members here (it is not dominant for this symptom) or if fewer than 3
    speakers are covered — too few for a correlation worth reporting.
    """
    members = sorted(m.upper() for m in members)
    if not members:
        raise SelectError(f"category not dominant: no members for {axis}={value}")
    category = set(members_of_category(axis, value))
    per_speaker: dict[str, list[float]] = {}
    ratings: dict[str, float] = {}
    for member in members:
        if member not in category:
            raise SelectError(f"{member} is not a {axis}={value} consonant")
        res = results_by_phoneme.get(member)
        if res is None or res.speaker_mean_pred is None:
            raise SelectError(f"no speaker-level predictions for member {member}")
        for i, spk in enumerate(res.speaker_ids):
            per_speaker.setdefault(spk, []).append(float(res.speaker_mean_pred[i]))
            ratings[spk] = float(res.speaker_ratings[i])
    speakers = sorted(per_speaker)
    agg = np.array([np.mean(per_speaker[s]) for s in speakers])
    truth = np.array([ratings[s] for s in speakers])
    if len(speakers) < 3:
        raise SelectError(f"too few speakers for {axis}={value}: "
                          f"have {len(speakers)}, need >= 3")
    try:
        cs = correlation_stats(agg, truth)
    except StatsError:
        return CategoryScore(axis, value, tuple(members), len(speakers), None, None)
    return CategoryScore(axis, value, tuple(members), cs.n, cs.r, cs.p)


def build_selection_report(results: list[PairResult],
                           r_threshold: float = DEFAULT_R_THRESHOLD,
                           p_select: float = DEFAULT_P_SELECT,
                           p_category: float = DEFAULT_P_CATEGORY,
                           run_id: str | None = None) -> SelectionReport:
    """Selection plus per-axis category rankings for one symptom's results.

    Category membership uses the tighter gate (r threshold and p_category);
    categories with no passing members are omitted. Rankings are sorted by
    aggregate r descending, non-computable aggregates last (an aggregate
    covering fewer than 3 speakers is kept but left unscored).
    """
    symptom = _one_symptom(results)
    selected = select_phonemes(results, r_threshold, p_select)
    by_phoneme = {res.phoneme: res for res in results}
    strong = [res.phoneme for res in results
              if _passes(res, r_threshold, p_category)
              and classify_phoneme(res.phoneme).kind == "consonant"]
    categories: dict[str, list[CategoryScore]] = {}
    for axis in AXES:
        scores = []
        for value in axis_values(axis):
            members = [ph for ph in strong
                       if getattr(classify_phoneme(ph), axis) == value]
            if not members:
                continue
            try:
                scores.append(aggregate_category(by_phoneme, axis, value, members))
            except SelectError as exc:
                if "too few speakers" not in str(exc):
                    raise
                covered = {spk for ph in members
                           for spk in by_phoneme[ph].speaker_ids}
                scores.append(CategoryScore(axis, value, tuple(sorted(members)),
                                            len(covered), None, None))
        scores.sort(key=lambda c: (c.r is None, -(c.r if c.r is not None else 0.0),
                                   c.value))
        categories[axis] = scores
    return SelectionReport(symptom=symptom, r_threshold=r_threshold,
                           p_select=p_select, p_category=p_category,
                           selected=selected, categories=categories,
                           run_id=run_id)
