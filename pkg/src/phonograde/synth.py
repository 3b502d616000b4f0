"""Synthetic validation corpora with planted rating-dependent effects.

Each phoneme label gets a procedural three-resonance template (hashed from the
label, so it never changes between runs). Each synthetic segment is excitation
noise — plus a pulse train when the phoneme is voiced — passed through the
template's resonator cascade. A planted effect ties a (symptom, phoneme) pair
to the speaker's rating: all three resonance centers move together by
`strength * (rating - scale midpoint) * shift_hz_per_step`, while per-instance
center jitter (default 10 Hz) is the only other source of spectral variation.
Crucially there are no per-speaker voice offsets: with effect strength 0 the
features carry no speaker signature, so the null distribution of pooled
correlations is exactly what the t-test assumes, and false-positive rates can
be read off directly.

Everything is derived from splitmix64 streams keyed by the master seed, the
speaker, the phoneme, and the instance index — corpora are bit-reproducible
and restricting `phonemes` does not change the segments of the phonemes kept.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .corpus import SegmentRecord, write_segmentation
from .phonetics import classify_phoneme, default_inventory
from .rng import SplitMix64Stream, derive_seed, fnv1a64
from .scales import RatingTable, SYMPTOMS, symptom_spec, write_ratings_csv
from .signal import write_wav


class SynthError(ValueError):
    """Unusable synthesis configuration."""


@dataclass(frozen=True)
class PlantedEffect:
    """Ties one (symptom, phoneme) pair to the audio: resonance centers shift
    by strength * (rating - midpoint) * shift_hz_per_step Hz."""

    symptom: str
    phoneme: str
    strength: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise SynthError(f"effect strength must be in [0, 1], "
                             f"got {self.strength}")


@dataclass
class SynthConfig:
    n_speakers: int = 16
    instances_per_phoneme: int = 40  # per speaker
    phonemes: tuple[str, ...] | None = None  # None = consonants + fillers
    rate: int = 16000
    seed: int = 0
    effects: tuple[PlantedEffect, ...] = ()
    shift_hz_per_step: float = 40.0
    jitter_hz: float = 10.0
    min_dur_s: float = 0.05
    max_dur_s: float = 0.08
    gap_s: float = 0.01
    amplitude: float = 0.25

    def __post_init__(self):
        if self.n_speakers < 2:
            raise SynthError(f"need >= 2 speakers, got {self.n_speakers}")
        if self.instances_per_phoneme < 1:
            raise SynthError("need >= 1 instance per (speaker, phoneme)")
        if not 0 < self.min_dur_s <= self.max_dur_s:
            raise SynthError(f"bad duration range [{self.min_dur_s}, {self.max_dur_s}]")
        for eff in self.effects:
            symptom_spec(eff.symptom)   # raises on unknown code
            classify_phoneme(eff.phoneme)
        if self.phonemes is not None:
            self.phonemes = tuple(sorted(p.upper() for p in self.phonemes))
            for ph in self.phonemes:
                classify_phoneme(ph)

    def phoneme_list(self) -> tuple[str, ...]:
        return self.phonemes if self.phonemes is not None else default_inventory()


@dataclass
class CorpusPaths:
    root: str
    audio_dir: str
    segmentation: str
    ratings: str
    manifest: str


def _template(label: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-label resonance template: 3 centers (Hz) and bandwidths, hashed
    from the label alone."""
    stream = SplitMix64Stream(fnv1a64(f"template|{label}"))
    centers = np.sort(np.array([
        300.0 + stream.randint(0, 499),
        900.0 + stream.randint(0, 1399),
        2500.0 + stream.randint(0, 2499),
    ]))
    bandwidths = np.array([120.0 + stream.randint(0, 179) for _ in range(3)])
    return centers, bandwidths


def _speaker_ratings(seed: int, speaker_id: str) -> dict[str, int]:
    stream = SplitMix64Stream(derive_seed(seed, f"ratings|{speaker_id}"))
    return {spec.code: stream.randint(spec.min_rating, spec.max_rating)
            for spec in SYMPTOMS}


def _resonator_cascade(x: np.ndarray, centers: np.ndarray,
                       bandwidths: np.ndarray, rate: int) -> np.ndarray:
    for fc, bw in zip(centers, bandwidths):
        r = np.exp(-np.pi * bw / rate)
        theta = 2.0 * np.pi * fc / rate
        x = lfilter([1.0], [1.0, -2.0 * r * np.cos(theta), r * r], x)
    return x


def _synth_segment(config: SynthConfig, speaker_id: str, phoneme: str,
                   index: int, shift_hz: float,
                   centers: np.ndarray, bandwidths: np.ndarray) -> np.ndarray:
    stream = SplitMix64Stream(derive_seed(config.seed,
                                          f"seg|{speaker_id}|{phoneme}|{index}"))
    lo = int(round(config.min_dur_s * config.rate))
    hi = int(round(config.max_dur_s * config.rate))
    n = stream.randint(lo, hi)
    info = classify_phoneme(phoneme)
    voiced = (info.kind == "vowel"
              or (info.kind == "consonant" and info.voicing == "voiced"))
    f0 = stream.randint(90, 220)
    noise = stream.normals(n)
    jitter = stream.normals(len(centers)) * config.jitter_hz
    if voiced:
        period = max(2, int(round(config.rate / f0)))
        pulses = np.zeros(n)
        pulses[::period] = 1.0
        x = 0.7 * pulses + 0.3 * noise
    else:
        x = noise
    shifted = np.clip(centers + shift_hz + jitter, 150.0, 0.45 * config.rate)
    x = _resonator_cascade(x, shifted, bandwidths, config.rate)
    peak = np.max(np.abs(x))
    level = config.amplitude * (0.6 + 0.8 * stream.uniforms(1)[0])
    return x * (level / peak)


def generate_corpus(config: SynthConfig, out_dir: str) -> CorpusPaths:
    """Write a complete synthetic corpus under out_dir.

    Layout: audio/<recording>.wav (16-bit PCM, one recording per speaker),
    segments.tsv, ratings.csv (every registry symptom rated for every
    speaker), manifest.json echoing the configuration and planted effects.
    """
    audio_dir = os.path.join(out_dir, "audio")
    os.makedirs(audio_dir, exist_ok=True)
    phonemes = config.phoneme_list()
    gap = int(round(config.gap_s * config.rate))
    templates = {ph: _template(ph) for ph in phonemes}

    effects_by_phoneme: dict[str, list[PlantedEffect]] = {}
    for eff in config.effects:
        effects_by_phoneme.setdefault(eff.phoneme.upper(), []).append(eff)

    entries: dict[tuple[str, str], int] = {}
    segments: list[SegmentRecord] = []
    recordings = []
    for si in range(config.n_speakers):
        speaker_id = f"S{si + 1:02d}"
        recording_id = f"R{si + 1:02d}"
        recordings.append(recording_id)
        ratings = _speaker_ratings(config.seed, speaker_id)
        for code, value in ratings.items():
            entries[(speaker_id, code)] = value
        chunks = [np.zeros(gap)]
        cursor = gap
        for phoneme in phonemes:
            centers, bandwidths = templates[phoneme]
            shift = 0.0
            for eff in effects_by_phoneme.get(phoneme, ()):
                spec = symptom_spec(eff.symptom)
                shift += (eff.strength * (ratings[spec.code] - spec.midpoint)
                          * config.shift_hz_per_step)
            for idx in range(config.instances_per_phoneme):
                seg = _synth_segment(config, speaker_id, phoneme, idx, shift,
                                     centers, bandwidths)
                segments.append(SegmentRecord(
                    recording_id, speaker_id, cursor / config.rate,
                    seg.size / config.rate, phoneme))
                chunks.append(seg)
                chunks.append(np.zeros(gap))
                cursor += seg.size + gap
        write_wav(os.path.join(audio_dir, f"{recording_id}.wav"),
                  np.concatenate(chunks), config.rate)

    seg_path = os.path.join(out_dir, "segments.tsv")
    write_segmentation(seg_path, segments)
    ratings_path = os.path.join(out_dir, "ratings.csv")
    write_ratings_csv(ratings_path, RatingTable(entries))

    manifest = {
        "kind": "synthetic-corpus",
        "seed": config.seed,
        "rate": config.rate,
        "n_speakers": config.n_speakers,
        "instances_per_phoneme": config.instances_per_phoneme,
        "phonemes": list(phonemes),
        "shift_hz_per_step": config.shift_hz_per_step,
        "jitter_hz": config.jitter_hz,
        "planted": [
            {"symptom": e.symptom, "phoneme": e.phoneme, "strength": e.strength}
            for e in config.effects
        ],
        "recordings": recordings,
        "templates": {
            ph: {"centers": templates[ph][0].tolist(),
                 "bandwidths": templates[ph][1].tolist()}
            for ph in phonemes
        },
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return CorpusPaths(root=out_dir, audio_dir=audio_dir, segmentation=seg_path,
                       ratings=ratings_path, manifest=manifest_path)
