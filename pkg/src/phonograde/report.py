"""Run reports: canonical JSON, human-readable markdown, chart data.

The JSON report is byte-deterministic: keys sorted, floats rounded to six
significant digits before serialization, no timestamps or host details. The
same inputs produce the same bytes on any machine at any parallelism, which
is what makes report diffs meaningful. A short run id — a hash of the seed
and the evaluation-affecting configuration — ties all artifacts of one run
together; selection thresholds are deliberately excluded from it, since
re-filtering existing results must be indistinguishable from a fresh run with
tighter thresholds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .evaluation import STATUS_EVALUATED, PairResult
from .features import FeatureConfig
from .model import RfConfig
from .phonetics import CONSONANTS, classify_phoneme
from .selection import SelectionReport

SCHEMA = "phonograde/1"


class ReportError(ValueError):
    """Inconsistent inputs for a report."""


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    """Deterministic serialization: sorted keys, 6-significant-digit floats."""
    return json.dumps(_round_floats(obj), sort_keys=True,
                      separators=(",", ":"), allow_nan=False) + "\n"


@dataclass
class RunMeta:
    """Everything that determines evaluation output, plus selection thresholds."""

    seed: int
    feature_config: FeatureConfig
    rf: RfConfig
    min_instances: int
    symptoms: list[str]
    phonemes: list[str]
    r_threshold: float
    p_select: float
    p_category: float

    def eval_config_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rate": self.feature_config.rate,
            "order": self.feature_config.order,
            "f_lo": self.feature_config.f_lo,
            "f_hi": self.feature_config.f_hi,
            "n_points": self.feature_config.n_points,
            "rf": self.rf.to_dict(),
            "min_instances": self.min_instances,
            "symptoms": list(self.symptoms),
            "phonemes": list(self.phonemes),
        }

    def run_id(self) -> str:
        digest = hashlib.sha256(canonical_json(self.eval_config_dict()).encode())
        return digest.hexdigest()[:12]

    def thresholds_dict(self) -> dict:
        return {"r_threshold": self.r_threshold, "p_select": self.p_select,
                "p_category": self.p_category}


def write_run_meta(path: str, meta: RunMeta) -> None:
    doc = {"schema": SCHEMA, "run_id": meta.run_id(),
           "config": meta.eval_config_dict(),
           "thresholds": meta.thresholds_dict()}
    with open(path, "w") as fh:
        fh.write(canonical_json(doc))


def read_run_meta(path: str) -> RunMeta:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != SCHEMA:
        raise ReportError(f"{path}: unexpected schema {doc.get('schema')!r}")
    cfg = doc["config"]
    thr = doc["thresholds"]
    meta = RunMeta(
        seed=cfg["seed"],
        feature_config=FeatureConfig(rate=cfg["rate"], order=cfg["order"],
                                     f_lo=cfg["f_lo"], f_hi=cfg["f_hi"],
                                     n_points=cfg["n_points"]),
        rf=RfConfig(**cfg["rf"]),
        min_instances=cfg["min_instances"],
        symptoms=list(cfg["symptoms"]), phonemes=list(cfg["phonemes"]),
        r_threshold=thr["r_threshold"], p_select=thr["p_select"],
        p_category=thr["p_category"])
    if meta.run_id() != doc["run_id"]:
        raise ReportError(f"{path}: run id {doc['run_id']} does not match config "
                          f"(expected {meta.run_id()})")
    return meta


def _pair_row(res: PairResult) -> dict:
    return {"symptom": res.symptom, "phoneme": res.phoneme, "n": res.n,
            "r": res.r, "p": res.p, "per_speaker_r": res.per_speaker_r,
            "status": res.status}


def _selection_block(sel: SelectionReport) -> dict:
    return {
        "selected": [{"phoneme": s.phoneme, "r": s.r, "p": s.p, "n": s.n}
                     for s in sel.selected],
        "categories": {
            axis: [{"value": c.value, "members": list(c.members),
                    "n_speakers": c.n_speakers, "r": c.r, "p": c.p}
                   for c in scores]
            for axis, scores in sel.categories.items()
        },
    }


def build_report(results: list[PairResult], selections: list[SelectionReport],
                 meta: RunMeta) -> dict:
    """Assemble the full report document (plain data, ready to serialize).

    Results and selections must be consistent: same thresholds as the run
    meta, and — for selections stamped with a run id — the same run id.
    """
    run_id = meta.run_id()
    for sel in selections:
        if (sel.r_threshold, sel.p_select, sel.p_category) != \
                (meta.r_threshold, meta.p_select, meta.p_category):
            raise ReportError(f"selection thresholds for {sel.symptom} do not "
                              f"match the run thresholds")
        if sel.run_id is not None and sel.run_id != run_id:
            raise ReportError(f"inconsistent run ids: selection for "
                              f"{sel.symptom} is from run {sel.run_id}, "
                              f"results are from run {run_id}")
    n_eval = sum(1 for r in results if r.status == STATUS_EVALUATED)
    sel_map = {sel.symptom: sel for sel in selections}
    return {
        "schema": SCHEMA,
        "run_id": run_id,
        "config": meta.eval_config_dict(),
        "thresholds": meta.thresholds_dict(),
        "pairs": [_pair_row(r) for r in results],
        "selections": {code: _selection_block(sel)
                       for code, sel in sorted(sel_map.items())},
        "summary": {
            "n_pairs": len(results),
            "n_evaluated": n_eval,
            "n_selected_total": sum(len(s.selected) for s in selections),
            "symptoms_with_selections": sorted(
                s.symptom for s in selections if s.selected),
        },
    }


def write_report_json(path: str, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(report))


def _fmt_r(x: float | None) -> str:
    return "-" if x is None else f"{x:.3f}"


def _fmt_p(x: float | None) -> str:
    return "-" if x is None else f"{x:.2e}"


def write_report_md(path: str, report: dict) -> None:
    """Human-readable companion to the JSON report (same content, no extras)."""
    lines = []
    thr = report["thresholds"]
    lines.append("# Phoneme predictiveness report")
    lines.append("")
    lines.append(f"Run `{report['run_id']}`, seed {report['config']['seed']}; "
                 f"gates: r > {thr['r_threshold']:g}, "
                 f"p <= {thr['p_select']:g} (selection), "
                 f"p <= {thr['p_category']:g} (category membership).")
    lines.append("")
    summary = report["summary"]
    lines.append(f"{summary['n_evaluated']} of {summary['n_pairs']} "
                 f"(symptom, phoneme) pairs evaluated; "
                 f"{summary['n_selected_total']} selections across "
                 f"{len(summary['symptoms_with_selections'])} symptoms.")
    lines.append("")
    overview = []
    for code, block in report["selections"].items():
        places = [c for c in block["categories"].get("place", ())
                  if c["p"] is not None and c["p"] <= thr["p_select"]]
        if places:  # already sorted by decreasing aggregate r
            overview.append((code, places))
    if overview:
        lines.append("## Predictive place categories")
        lines.append("")
        lines.append("| symptom | place categories (aggregate r) |")
        lines.append("|---|---|")
        for code, places in overview:
            ranked = ", ".join(f"{c['value']} ({_fmt_r(c['r'])})"
                               for c in places)
            lines.append(f"| {code} | {ranked} |")
        lines.append("")
    for code, block in report["selections"].items():
        lines.append(f"## {code}")
        lines.append("")
        if not block["selected"]:
            lines.append("No predictive phonemes at these thresholds.")
            lines.append("")
        else:
            lines.append("| phoneme | r | p | n |")
            lines.append("|---|---|---|---|")
            for s in block["selected"]:
                lines.append(f"| {s['phoneme']} | {_fmt_r(s['r'])} | "
                             f"{_fmt_p(s['p'])} | {s['n']} |")
            lines.append("")
        for axis, scores in block["categories"].items():
            if not scores:
                continue
            lines.append(f"### {axis} categories")
            lines.append("")
            lines.append("| category | members | speakers | r | p |")
            lines.append("|---|---|---|---|---|")
            for c in scores:
                lines.append(f"| {c['value']} | {' '.join(c['members'])} | "
                             f"{c['n_speakers']} | {_fmt_r(c['r'])} | "
                             f"{_fmt_p(c['p'])} |")
            lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines).rstrip("\n") + "\n")


def chart_data(selections: list[SelectionReport]) -> dict:
    """Articulatory-grid chart data, one cell per (manner, place, voicing).

    Every consonant of the inventory appears under its cell, mapped to the
    symptom codes it predicts — first at the selection threshold, then at
    the tighter category threshold. Both lists are drawn straight from the
    selections, so every (symptom, consonant) listed here is selected in the
    corresponding report; consonants predicting nothing keep empty lists.
    """
    cells: dict[str, dict[str, dict]] = {}
    by_consonant: dict[str, dict] = {}
    for label in CONSONANTS:
        info = classify_phoneme(label)
        key = f"{info.manner}|{info.place}|{info.voicing}"
        entry = {"at_p_select": [], "at_p_category": []}
        cells.setdefault(key, {})[label] = entry
        by_consonant[label] = entry
    for sel in sorted(selections, key=lambda s: s.symptom):
        for s in sel.selected:
            entry = by_consonant.get(s.phoneme)
            if entry is None:  # vowels and fillers have no cell
                continue
            entry["at_p_select"].append(sel.symptom)
            if s.p <= sel.p_category:
                entry["at_p_category"].append(sel.symptom)
    return {"schema": SCHEMA, "cells": cells}


def write_chart_json(path: str, chart: dict) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(chart))


def emit_report(results: list[PairResult], selections: list[SelectionReport],
                meta: RunMeta, format: str = "json",
                out: str = "report.json") -> dict:
    """Build the report and write it to `out` as "json" or "markdown"."""
    report = build_report(results, selections, meta)
    if format == "json":
        write_report_json(out, report)
    elif format == "markdown":
        write_report_md(out, report)
    else:
        raise ReportError(f"unknown report format {format!r}")
    return report
