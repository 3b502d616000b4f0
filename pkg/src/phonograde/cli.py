"""Command-line interface.

Subcommands mirror the pipeline stages: `synth` builds a validation corpus,
`features` extracts per-segment spectra, `evaluate` runs the LOSO grid,
`select` and `report` post-process an evaluation directory, and `run` chains
evaluate + select + report. Exit codes: 0 success, 1 usage or configuration
error (reported before any work), 2 data error.

Option precedence: explicit flag > --config file entry > environment
(PHONOGRADE_JOBS for --jobs) > built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from .corpus import load_segmentation
from .evaluation import (DEFAULT_MIN_INSTANCES, STATUS_DEGENERATE,
                         STATUS_EVALUATED, STATUS_INSUFFICIENT, evaluate_grid,
                         load_results, write_pairs_csv, write_speaker_means_csv)
from .features import DEFAULT_ORDER, FeatureConfig, write_features_csv
from .corpus import AudioStore, extract_phoneme_features
from .model import RfConfig
from .phonetics import classify_phoneme, default_inventory
from .report import (RunMeta, build_report, chart_data, read_run_meta,
                     write_chart_json, write_report_json, write_report_md,
                     write_run_meta)
from .scales import all_codes, load_ratings, symptom_spec
from .selection import (DEFAULT_P_CATEGORY, DEFAULT_P_SELECT,
                        DEFAULT_R_THRESHOLD, build_selection_report)
from .signal import DEFAULT_RATE
from .synth import PlantedEffect, SynthConfig, generate_corpus

log = logging.getLogger(__name__)

JOBS_ENV = "PHONOGRADE_JOBS"

_CONFIG_KEYS = {
    "rate", "order", "trees", "r_threshold", "p_select", "p_category",
    "min_instances", "jobs", "seed", "phonemes", "symptoms", "include_vowels",
    "speakers", "instances", "effects",
}


class UsageError(Exception):
    """Bad flags or configuration, detected before any work starts."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="phonograde",
                     description="Per-phoneme acoustic grading of symptom ratings")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")

    def add_feature_flags(p):
        p.add_argument("--rate", type=int, default=None,
                       help=f"analysis sample rate in Hz (default {DEFAULT_RATE})")
        p.add_argument("--order", type=int, default=None,
                       help=f"AR model order (default {DEFAULT_ORDER})")

    def add_inventory_flags(p):
        p.add_argument("--phonemes", default=None,
                       help="comma-separated phoneme labels (default: consonants + fillers)")
        p.add_argument("--include-vowels", action="store_true", default=None,
                       dest="include_vowels",
                       help="add vowels to the default phoneme inventory")

    def add_eval_flags(p):
        p.add_argument("--trees", type=int, default=None,
                       help="trees per forest (default 100)")
        p.add_argument("--min-instances", type=int, default=None, dest="min_instances",
                       help=f"minimum usable segments per pair (default {DEFAULT_MIN_INSTANCES})")
        p.add_argument("--jobs", type=int, default=None,
                       help=f"worker processes (default ${JOBS_ENV} or 1)")
        p.add_argument("--symptoms", default=None,
                       help="comma-separated symptom codes (default: all)")

    def add_threshold_flags(p):
        p.add_argument("--r-threshold", type=float, default=None, dest="r_threshold",
                       help=f"selection requires r strictly above this (default {DEFAULT_R_THRESHOLD})")
        p.add_argument("--p-select", type=float, default=None, dest="p_select",
                       help=f"selection requires p at or below this (default {DEFAULT_P_SELECT})")
        p.add_argument("--p-category", type=float, default=None, dest="p_category",
                       help=f"category membership p gate (default {DEFAULT_P_CATEGORY})")

    def add_corpus_inputs(p, ratings: bool):
        p.add_argument("--audio", required=True, help="directory of <recording_id>.wav files")
        p.add_argument("--seg", required=True, help="segmentation TSV")
        if ratings:
            p.add_argument("--ratings", required=True, help="ratings CSV")

    p_synth = sub.add_parser("synth", help="generate a synthetic validation corpus")
    add_common(p_synth)
    add_inventory_flags(p_synth)
    p_synth.add_argument("--out", required=True, help="corpus output directory")
    p_synth.add_argument("--rate", type=int, default=None)
    p_synth.add_argument("--speakers", type=int, default=None,
                         help="number of speakers (default 16)")
    p_synth.add_argument("--instances", type=int, default=None,
                         help="segments per (speaker, phoneme) (default 40)")
    p_synth.add_argument("--plant", action="append", default=None,
                         metavar="SYMPTOM:PH1,PH2[:STRENGTH]",
                         help="plant a rating-dependent spectral effect on one or "
                              "more phonemes (repeatable)")
    p_synth.set_defaults(func=cmd_synth)

    p_feat = sub.add_parser("features", help="extract per-segment spectral features")
    add_common(p_feat)
    add_feature_flags(p_feat)
    add_inventory_flags(p_feat)
    add_corpus_inputs(p_feat, ratings=False)
    p_feat.add_argument("--out", required=True, help="output features CSV path")
    p_feat.set_defaults(func=cmd_features)

    p_eval = sub.add_parser("evaluate", help="run the LOSO evaluation grid")
    add_common(p_eval)
    add_feature_flags(p_eval)
    add_inventory_flags(p_eval)
    add_eval_flags(p_eval)
    add_corpus_inputs(p_eval, ratings=True)
    p_eval.add_argument("--out", required=True, help="evaluation output directory")
    p_eval.set_defaults(func=cmd_evaluate)

    p_sel = sub.add_parser("select", help="list gate-passing phonemes from an evaluation")
    add_common(p_sel)
    add_threshold_flags(p_sel)
    p_sel.add_argument("eval_dir", help="directory written by `evaluate` or `run`")
    p_sel.add_argument("--symptom", default=None, help="restrict to one symptom code")
    p_sel.set_defaults(func=cmd_select)

    p_rep = sub.add_parser("report", help="emit report files from an evaluation")
    add_common(p_rep)
    add_threshold_flags(p_rep)
    p_rep.add_argument("eval_dir", help="directory written by `evaluate` or `run`")
    p_rep.add_argument("--out", required=True, help="report output directory")
    p_rep.set_defaults(func=cmd_report)

    p_run = sub.add_parser("run", help="evaluate, select, and report in one pass")
    add_common(p_run)
    add_feature_flags(p_run)
    add_inventory_flags(p_run)
    add_eval_flags(p_run)
    add_threshold_flags(p_run)
    add_corpus_inputs(p_run, ratings=True)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    return parser


# ------------------------------------------------------------- option merge

def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config file {path} must contain a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {sorted(unknown)}")
    return cfg


def _opt(args, cfg: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg:
        return cfg[name]
    return default


def _jobs(args, cfg: dict) -> int:
    value = _opt(args, cfg, "jobs", None)
    if value is None:
        raw = os.environ.get(JOBS_ENV)
        if raw is not None:
            try:
                value = int(raw)
            except ValueError:
                raise UsageError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    jobs = int(value) if value is not None else 1
    if jobs < 1:
        raise UsageError(f"jobs must be >= 1, got {jobs}")
    return jobs


def _phoneme_filter(args, cfg: dict) -> list[str]:
    raw = _opt(args, cfg, "phonemes", None)
    include_vowels = bool(_opt(args, cfg, "include_vowels", False))
    if raw is None:
        return list(default_inventory(include_vowels))
    labels = raw.split(",") if isinstance(raw, str) else list(raw)
    labels = [lbl.strip().upper() for lbl in labels if lbl.strip()]
    if not labels:
        raise UsageError("empty phoneme list")
    for lbl in labels:
        try:
            classify_phoneme(lbl)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return sorted(set(labels))


def _symptom_filter(args, cfg: dict) -> list[str]:
    raw = _opt(args, cfg, "symptoms", None)
    if raw is None:
        return list(all_codes())
    codes = raw.split(",") if isinstance(raw, str) else list(raw)
    codes = [c.strip() for c in codes if c.strip()]
    if not codes:
        raise UsageError("empty symptom list")
    try:
        return [symptom_spec(c).code for c in codes]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _feature_config(args, cfg: dict) -> FeatureConfig:
    rate = int(_opt(args, cfg, "rate", DEFAULT_RATE))
    order = int(_opt(args, cfg, "order", DEFAULT_ORDER))
    try:
        return FeatureConfig(rate=rate, order=order)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _validate_thresholds(r_thr: float, p_sel: float,
                         p_cat: float) -> tuple[float, float, float]:
    if not 0.0 < r_thr <= 1.0:
        raise UsageError(f"r threshold must be in (0, 1], got {r_thr}")
    for name, p in (("p-select", p_sel), ("p-category", p_cat)):
        if not 0.0 < p < 1.0:
            raise UsageError(f"{name} must be in (0, 1), got {p}")
    return r_thr, p_sel, p_cat


def _thresholds(args, cfg: dict) -> tuple[float, float, float]:
    return _validate_thresholds(
        float(_opt(args, cfg, "r_threshold", DEFAULT_R_THRESHOLD)),
        float(_opt(args, cfg, "p_select", DEFAULT_P_SELECT)),
        float(_opt(args, cfg, "p_category", DEFAULT_P_CATEGORY)))


def _seed(args, cfg: dict) -> int:
    seed = int(_opt(args, cfg, "seed", 0))
    if not 0 <= seed < 2 ** 64:
        raise UsageError(f"seed must fit in 64 bits, got {seed}")
    return seed


def _require_inputs(*paths: str) -> None:
    for path in paths:
        if not os.path.exists(path):
            raise UsageError(f"input not found: {path}")


def _positive(name: str, value: int) -> int:
    if value < 1:
        raise UsageError(f"{name} must be >= 1, got {value}")
    return value


# ---------------------------------------------------------------- commands

def _parse_effects(args, cfg: dict) -> tuple[PlantedEffect, ...]:
    effects = []
    for entry in cfg.get("effects", []):
        effects.append(PlantedEffect(entry["symptom"], entry["phoneme"],
                                     float(entry.get("strength", 1.0))))
    for raw in getattr(args, "plant", None) or []:
        parts = raw.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad --plant {raw!r}, want SYMPTOM:PH1,PH2[:STRENGTH]")
        try:
            strength = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise UsageError(f"bad --plant strength {parts[2]!r}") from None
        phonemes = [ph.strip() for ph in parts[1].split(",") if ph.strip()]
        if not phonemes:
            raise UsageError(f"bad --plant {raw!r}: no phonemes")
        for ph in phonemes:
            effects.append(PlantedEffect(parts[0], ph, strength))
    return tuple(effects)


def cmd_synth(args, cfg: dict) -> int:
    phonemes = None
    if _opt(args, cfg, "phonemes", None) is not None or _opt(args, cfg, "include_vowels", None):
        phonemes = tuple(_phoneme_filter(args, cfg))
    try:
        synth_cfg = SynthConfig(
            n_speakers=_positive("speakers", int(_opt(args, cfg, "speakers", 16))),
            instances_per_phoneme=_positive("instances", int(_opt(args, cfg, "instances", 40))),
            phonemes=phonemes,
            rate=int(_opt(args, cfg, "rate", DEFAULT_RATE)),
            seed=_seed(args, cfg),
            effects=_parse_effects(args, cfg),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    paths = generate_corpus(synth_cfg, args.out)
    n_segments = (synth_cfg.n_speakers * synth_cfg.instances_per_phoneme
                  * len(synth_cfg.phoneme_list()))
    print(f"wrote synthetic corpus: {synth_cfg.n_speakers} speakers, "
          f"{len(synth_cfg.phoneme_list())} phonemes, {n_segments} segments "
          f"-> {paths.root}")
    return 0


def cmd_features(args, cfg: dict) -> int:
    _require_inputs(args.audio, args.seg)
    fc = _feature_config(args, cfg)
    phonemes = _phoneme_filter(args, cfg)
    seg_result = load_segmentation(args.seg, strict=False)
    for reason, count in sorted(seg_result.skipped.items()):
        log.warning("segmentation: skipped %d rows (%s)", count, reason)
    store = AudioStore(args.audio, fc.rate)
    records = []
    skipped: dict[str, int] = {}
    for phoneme in phonemes:
        pf = extract_phoneme_features(seg_result.records, store, phoneme, fc)
        records.extend(pf.records)
        for k, v in pf.skipped.items():
            skipped[k] = skipped.get(k, 0) + v
    for reason, count in sorted(skipped.items()):
        log.warning("features: skipped %d segments (%s)", count, reason)
    write_features_csv(args.out, records, n_points=fc.n_points)
    print(f"wrote {len(records)} feature rows -> {args.out}")
    return 0


def _run_grid(args, cfg: dict):
    _require_inputs(args.audio, args.seg, args.ratings)
    fc = _feature_config(args, cfg)
    phonemes = _phoneme_filter(args, cfg)
    symptoms = _symptom_filter(args, cfg)
    rf = RfConfig(n_trees=_positive("trees", int(_opt(args, cfg, "trees", 100))))
    seed = _seed(args, cfg)
    min_instances = int(_opt(args, cfg, "min_instances", DEFAULT_MIN_INSTANCES))
    if min_instances < 1:
        raise UsageError(f"min-instances must be >= 1, got {min_instances}")
    jobs = _jobs(args, cfg)
    r_thr, p_sel, p_cat = _thresholds(args, cfg)

    seg_result = load_segmentation(args.seg, strict=False)
    for reason, count in sorted(seg_result.skipped.items()):
        log.warning("segmentation: skipped %d rows (%s)", count, reason)
    ratings = load_ratings(args.ratings)
    results = evaluate_grid(seg_result.records, args.audio, ratings, symptoms,
                            phonemes, fc, rf, seed, min_instances, jobs)
    meta = RunMeta(seed=seed, feature_config=fc, rf=rf,
                   min_instances=min_instances, symptoms=symptoms,
                   phonemes=phonemes, r_threshold=r_thr, p_select=p_sel,
                   p_category=p_cat)
    return results, meta


def _write_eval_dir(out_dir: str, results, meta: RunMeta) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_pairs_csv(os.path.join(out_dir, "pairs.csv"), results)
    write_speaker_means_csv(os.path.join(out_dir, "speaker_means.csv"), results)
    write_run_meta(os.path.join(out_dir, "run_meta.json"), meta)


def _status_summary(results) -> str:
    n_eval = sum(1 for r in results if r.status == STATUS_EVALUATED)
    n_insuf = sum(1 for r in results if r.status == STATUS_INSUFFICIENT)
    n_degen = sum(1 for r in results if r.status == STATUS_DEGENERATE)
    return (f"{len(results)} pairs: {n_eval} evaluated, "
            f"{n_insuf} insufficient-data, {n_degen} degenerate")


def cmd_evaluate(args, cfg: dict) -> int:
    results, meta = _run_grid(args, cfg)
    _write_eval_dir(args.out, results, meta)
    print(f"{_status_summary(results)} -> {args.out}")
    return 0


def _selections_from_results(results, r_thr, p_sel, p_cat, run_id=None):
    by_symptom: dict[str, list] = {}
    for res in results:
        by_symptom.setdefault(res.symptom, []).append(res)
    return [build_selection_report(group, r_thr, p_sel, p_cat, run_id=run_id)
            for group in by_symptom.values()]


def _load_eval_dir(eval_dir: str):
    pairs = os.path.join(eval_dir, "pairs.csv")
    means = os.path.join(eval_dir, "speaker_means.csv")
    meta_path = os.path.join(eval_dir, "run_meta.json")
    _require_inputs(eval_dir, pairs, meta_path)
    return load_results(pairs, means), read_run_meta(meta_path)


def cmd_select(args, cfg: dict) -> int:
    results, meta = _load_eval_dir(args.eval_dir)
    r_thr, p_sel, p_cat = _validate_thresholds(
        float(_opt(args, cfg, "r_threshold", meta.r_threshold)),
        float(_opt(args, cfg, "p_select", meta.p_select)),
        float(_opt(args, cfg, "p_category", meta.p_category)))
    if args.symptom is not None:
        code = symptom_spec(args.symptom).code
        results = [r for r in results if r.symptom == code]
        if not results:
            raise UsageError(f"no results for symptom {code} in {args.eval_dir}")
    for sel in _selections_from_results(results, r_thr, p_sel, p_cat):
        if sel.selected:
            parts = ", ".join(f"{s.phoneme} r={s.r:.3f} p={s.p:.2e}"
                              for s in sel.selected)
            print(f"{sel.symptom}: {parts}")
        else:
            print(f"{sel.symptom}: (none)")
    return 0


def _write_report_dir(out_dir: str, results, meta: RunMeta) -> list:
    selections = _selections_from_results(results, meta.r_threshold,
                                          meta.p_select, meta.p_category,
                                          run_id=meta.run_id())
    report = build_report(results, selections, meta)
    os.makedirs(out_dir, exist_ok=True)
    write_report_json(os.path.join(out_dir, "report.json"), report)
    write_report_md(os.path.join(out_dir, "report.md"), report)
    write_chart_json(os.path.join(out_dir, "chart.json"),
                     chart_data(selections))
    write_pairs_csv(os.path.join(out_dir, "pairs.csv"), results)
    return selections


def cmd_report(args, cfg: dict) -> int:
    results, meta = _load_eval_dir(args.eval_dir)
    overrides = {}
    for name in ("r_threshold", "p_select", "p_category"):
        value = _opt(args, cfg, name, None)
        if value is not None:
            overrides[name] = float(value)
    if overrides:
        meta = replace(meta, **overrides)
        _validate_thresholds(meta.r_threshold, meta.p_select, meta.p_category)
    _write_report_dir(args.out, results, meta)
    print(f"wrote report files -> {args.out}")
    return 0


def cmd_run(args, cfg: dict) -> int:
    results, meta = _run_grid(args, cfg)
    _write_eval_dir(args.out, results, meta)
    selections = _write_report_dir(args.out, results, meta)
    by_code = {sel.symptom: sel for sel in selections}
    for code in meta.symptoms:
        sel = by_code.get(code)
        if sel is None or not sel.selected:
            print(f"{code}: none selected")
        else:
            top = sel.selected[0]
            print(f"{code}: {len(sel.selected)} selected "
                  f"(top {top.phoneme} r={top.r:.3f})")
    log.info("%s", _status_summary(results))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config_file(args.config)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
