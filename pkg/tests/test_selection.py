"""Selection gates and articulatory-category aggregation."""

import numpy as np
import pytest

from phonograde import (
    aggregate_category,
    build_selection_report,
    select_phonemes,
)
from phonograde.evaluation import PairResult
from phonograde.selection import SelectError


def _pair(phoneme, r, p, n=48, symptom="B6", status="evaluated",
          speakers=None, preds=None, ratings=None):
    ids = tuple(speakers) if speakers else ()
    return PairResult(symptom, phoneme, n, r, p, None, status, ids,
                      None if preds is None else np.asarray(preds, dtype=float),
                      None if ratings is None else np.asarray(ratings, dtype=float),
                      None if not ids else np.full(len(ids), n // len(ids)))


def test_gate_boundaries():
    results = [
        _pair("F", 0.25, 0.0005),   # both gates pass
        _pair("V", 0.25, 0.002),    # p too large
        _pair("S", 0.15, 1e-6),     # r too small
        _pair("Z", 0.2, 1e-6),      # r must be strictly above the threshold
        _pair("TH", 0.21, 0.001),   # p at the threshold still passes
    ]
    chosen = select_phonemes(results, r_threshold=0.2, p_threshold=0.001)
    assert [s.phoneme for s in chosen] == ["F", "TH"]


def test_selection_sorted_by_r_descending_then_label():
    results = [
        _pair("V", 0.5, 1e-5), _pair("F", 0.9, 1e-5),
        _pair("S", 0.5, 1e-6), _pair("Z", 0.7, 1e-5),
    ]
    chosen = select_phonemes(results)
    assert [s.phoneme for s in chosen] == ["F", "Z", "S", "V"]


def test_non_evaluated_results_never_selected():
    results = [
        _pair("F", None, None, status="insufficient-data"),
        _pair("V", None, None, status="degenerate"),
        _pair("S", 0.6, 1e-8),
    ]
    assert [s.phoneme for s in select_phonemes(results)] == ["S"]


def test_tightening_thresholds_shrinks_selection():
    rng = np.random.default_rng(0)
    phonemes = ["F", "V", "S", "Z", "TH", "DH", "P", "B", "M", "N"]
    results = [_pair(ph, float(rng.uniform(-0.5, 0.9)),
                     float(10 ** rng.uniform(-8, -0.5))) for ph in phonemes]
    loose = {s.phoneme for s in select_phonemes(results, 0.2, 1e-3)}
    tight = {s.phoneme for s in select_phonemes(results, 0.2, 1e-4)}
    assert tight <= loose
    higher_r = {s.phoneme for s in select_phonemes(results, 0.4, 1e-3)}
    assert higher_r <= loose


def test_mixed_symptoms_rejected():
    with pytest.raises(SelectError, match="results span 2 symptoms"):
        select_phonemes([_pair("F", 0.5, 1e-4, symptom="B6"),
                         _pair("V", 0.5, 1e-4, symptom="M1")])


def _speaker_results():
    ratings = [1.0, 3.0, 5.0, 7.0]
    speakers = ["S01", "S02", "S03", "S04"]
    f = _pair("F", 0.8, 1e-6, speakers=speakers,
              preds=[1.5, 3.5, 5.5, 7.5], ratings=ratings)
    v = _pair("V", 0.7, 1e-5, speakers=speakers,
              preds=[1.0, 2.0, 4.0, 6.0], ratings=ratings)
    return {"F": f, "V": v}


def test_aggregate_category_means_speaker_predictions():
    by_phoneme = _speaker_results()
    score = aggregate_category(by_phoneme, "place", "labiodental", ["F", "V"])
    assert score.members == ("F", "V")
    assert score.n_speakers == 4
    agg = np.mean([[1.5, 3.5, 5.5, 7.5], [1.0, 2.0, 4.0, 6.0]], axis=0)
    expected_r = np.corrcoef(agg, [1.0, 3.0, 5.0, 7.0])[0, 1]
    assert score.r == pytest.approx(expected_r, abs=1e-12)
    assert 0.0 < score.p < 0.05


def test_aggregate_single_member():
    by_phoneme = _speaker_results()
    score = aggregate_category(by_phoneme, "manner", "fricative", ["F"])
    assert score.members == ("F",)
    assert score.r == pytest.approx(1.0)


def test_aggregate_category_errors():
    by_phoneme = _speaker_results()
    with pytest.raises(SelectError, match="category not dominant: no members for place=velar"):
        aggregate_category(by_phoneme, "place", "velar", [])
    with pytest.raises(SelectError, match="F is not a place=alveolar consonant"):
        aggregate_category(by_phoneme, "place", "alveolar", ["F"])
    with pytest.raises(SelectError, match="no speaker-level predictions for member TH"):
        aggregate_category(by_phoneme, "place", "interdental", ["TH"])


def test_aggregate_needs_three_speakers():
    ratings = [1.0, 7.0]
    f = _pair("F", 0.9, 1e-6, speakers=["S01", "S02"],
              preds=[2.0, 6.0], ratings=ratings)
    with pytest.raises(SelectError,
                       match="too few speakers for place=labiodental: have 2, need >= 3"):
        aggregate_category({"F": f}, "place", "labiodental", ["F"])


def test_build_selection_report_shapes_and_ranking():
    speakers = ["S01", "S02", "S03", "S04"]
    ratings = [1.0, 3.0, 5.0, 7.0]
    results = [
        _pair("F", 0.9, 1e-7, speakers=speakers, preds=[1.2, 3.1, 5.2, 7.1],
              ratings=ratings),
        _pair("V", 0.8, 1e-6, speakers=speakers, preds=[1.0, 3.4, 4.8, 7.3],
              ratings=ratings),
        _pair("S", 0.6, 1e-5, speakers=speakers, preds=[7.0, 5.0, 3.0, 1.2],
              ratings=ratings),  # passes p_select but not p_category
        _pair("UM", 0.7, 1e-9, speakers=speakers, preds=[1.0, 3.0, 5.0, 7.0],
              ratings=ratings),  # filler: selected, but no category
    ]
    report = build_selection_report(results, r_threshold=0.2, p_select=1e-3,
                                    p_category=1e-6, run_id="abc123")
    assert report.symptom == "B6"
    assert report.run_id == "abc123"
    assert [s.phoneme for s in report.selected] == ["F", "V", "UM", "S"]
    # only F and V clear the category gate; UM has no articulatory axes
    manner = report.categories["manner"]
    assert [c.value for c in manner] == ["fricative"]
    assert set(manner[0].members) == {"F", "V"}
    place = report.categories["place"]
    assert [c.value for c in place] == ["labiodental"]
    voicing = {c.value: c for c in report.categories["voicing"]}
    assert set(voicing) == {"voiced", "unvoiced"}
    # rankings are sorted by aggregate r, best first
    for axis_scores in report.categories.values():
        rs = [c.r for c in axis_scores if c.r is not None]
        assert rs == sorted(rs, reverse=True)


def test_build_selection_report_keeps_unscorable_categories():
    # two speakers only: aggregation cannot score, but the row must survive
    results = [_pair("F", 0.9, 1e-8, speakers=["S01", "S02"],
                     preds=[2.0, 6.0], ratings=[1.0, 7.0])]
    report = build_selection_report(results, p_category=1e-6)
    place = report.categories["place"]
    assert len(place) == 1
    assert place[0].value == "labiodental"
    assert place[0].n_speakers == 2
    assert place[0].r is None and place[0].p is None
