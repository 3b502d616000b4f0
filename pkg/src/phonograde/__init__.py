"""Per-phoneme acoustic grading of psychiatric symptom ratings.

Pipeline: segment audio per phoneme, fit high-order Burg AR spectra as
features, predict per-speaker ratings with deterministic random forests under
leave-one-speaker-out cross-validation, gate (symptom, phoneme) pairs on
correlation strength and significance, and aggregate survivors into
articulatory-category scores.
"""

from .corpus import (AudioStore, CorpusError, Dataset, SegmentRecord,
                     assemble_dataset, dataset_from_features,
                     extract_phoneme_features, load_segmentation,
                     write_segmentation)
from .evaluation import (EvalError, PairResult, evaluate_dataset,
                         evaluate_grid, evaluate_pair, load_results,
                         loso_folds, read_pairs_csv, run_loso,
                         write_pairs_csv, write_speaker_means_csv)
from .features import (ArModel, BurgSpectrumExtractor, FeatureConfig,
                       FeatureError, FeatureRecord, fit_burg, log_spectrum,
                       read_features_csv, segment_features, spectral_grid,
                       write_features_csv)
from .model import RatingForestRegressor, RfConfig
from .phonetics import (CONSONANTS, FILLERS, VOWELS, PhonemeInfo,
                        PhoneticsError, classify_phoneme, default_inventory,
                        members_of_category)
from .report import (ReportError, RunMeta, build_report, canonical_json,
                     chart_data, emit_report, read_run_meta, write_chart_json,
                     write_report_json, write_report_md, write_run_meta)
from .rng import SplitMix64Stream, derive_seed, fnv1a64, mix64
from .scales import (SYMPTOMS, RatingTable, ScaleError, SymptomSpec,
                     all_codes, load_ratings, load_scale_registry,
                     symptom_spec, validate_rating, write_ratings_csv)
from .selection import (CategoryScore, SelectedPhoneme, SelectError,
                        SelectionReport, aggregate_category,
                        build_selection_report, select_phonemes)
from .signal import (AudioBuffer, AudioError, load_audio, resample,
                     slice_segment, write_wav)
from .stats import (CorrelationStats, DegenerateError, StatsError,
                    correlation_stats, incomplete_beta, pearson_r,
                    student_t_two_sided_p)
from .synth import PlantedEffect, SynthConfig, SynthError, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer", "AudioError", "AudioStore", "ArModel",
    "BurgSpectrumExtractor", "CategoryScore", "CorpusError",
    "CorrelationStats", "Dataset", "DegenerateError", "EvalError",
    "FeatureConfig", "FeatureError", "FeatureRecord", "PairResult",
    "PhonemeInfo", "PhoneticsError", "PlantedEffect", "RatingForestRegressor",
    "RatingTable",
    "ReportError", "RfConfig", "RunMeta", "ScaleError", "SegmentRecord",
    "SelectError", "SelectedPhoneme", "SelectionReport", "SplitMix64Stream",
    "SymptomSpec", "SynthConfig", "SynthError", "StatsError", "SYMPTOMS",
    "CONSONANTS", "FILLERS", "VOWELS",
    "aggregate_category", "all_codes", "assemble_dataset", "build_report",
    "build_selection_report", "canonical_json", "chart_data",
    "classify_phoneme", "correlation_stats", "dataset_from_features",
    "default_inventory", "derive_seed", "emit_report", "evaluate_dataset",
    "evaluate_grid", "evaluate_pair", "extract_phoneme_features", "fit_burg",
    "fnv1a64", "generate_corpus", "incomplete_beta", "load_audio",
    "load_ratings", "load_results", "load_scale_registry",
    "load_segmentation", "log_spectrum", "loso_folds",
    "members_of_category", "mix64", "pearson_r",
    "read_features_csv", "read_pairs_csv", "read_run_meta", "resample",
    "run_loso", "segment_features", "select_phonemes", "slice_segment",
    "spectral_grid", "student_t_two_sided_p", "symptom_spec",
    "validate_rating", "write_chart_json", "write_features_csv",
    "write_pairs_csv", "write_ratings_csv", "write_report_json",
    "write_report_md", "write_run_meta", "write_segmentation",
    "write_speaker_means_csv", "write_wav",
]
