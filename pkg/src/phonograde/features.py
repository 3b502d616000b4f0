"""Per-segment acoustic features: Burg AR spectra on a fixed frequency grid.

One phoneme segment maps to one 64-point feature vector: a high-order
(default 128) autoregressive model is fit to the raw samples by Burg's
maximum-entropy method and its power spectrum is evaluated in natural log at
64 equally spaced frequencies from 20 to 6400 Hz, endpoints included. The
log-spectral values are the regression features everywhere downstream; the
fixed grid is what makes feature index k comparable across segments,
recordings, and speakers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import _kernels
from .signal import DEFAULT_RATE

F_LO = 20.0
F_HI = 6400.0
N_POINTS = 64
DEFAULT_ORDER = 128


class FeatureError(ValueError):
    """Segment unsuitable for AR fitting, or malformed feature data."""


@dataclass
class ArModel:
    """All-pole model x[t] ~ -sum_k coefficients[k] * x[t-k-1].

    `gain` is the prediction-error power after the final stage; the power
    spectrum at frequency f is gain / |A(e^{-i 2 pi f / rate})|^2 with
    A(z) = 1 + sum_k coefficients[k] z^{-k}. Order 0 (no coefficients) is a
    flat white-noise model.
    """

    order: int
    coefficients: np.ndarray
    gain: float
    rate: float


def spectral_grid(f_lo: float = F_LO, f_hi: float = F_HI,
                  n_points: int = N_POINTS) -> np.ndarray:
    """The analysis frequencies: n_points equally spaced, endpoints included."""
    if n_points < 2:
        raise FeatureError(f"grid needs at least 2 points, got {n_points}")
    if not 0 <= f_lo < f_hi:
        raise FeatureError(f"bad grid bounds [{f_lo}, {f_hi}]")
    return f_lo + np.arange(n_points) * ((f_hi - f_lo) / (n_points - 1))


def fit_burg(samples: np.ndarray, order: int, rate: float) -> ArModel:
    """Fit an AR(order) model by Burg's method.

    Requires at least 2 * (order + 1) samples, all finite, not identically
    zero. Reflection coefficients are bounded by 1 in magnitude, so the
    resulting filter is stable and gain is non-negative.
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if order < 1:
        raise FeatureError(f"order must be >= 1, got {order}")
    need = 2 * (order + 1)
    if x.size < need:
        raise FeatureError(f"segment too short: need >={need} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise FeatureError("non-finite sample in segment")
    if not np.any(x):
        raise FeatureError("zero-energy input")
    a, gain = _kernels.burg(x, order)
    return ArModel(order=order, coefficients=a, gain=float(gain), rate=float(rate))


def log_spectrum(model: ArModel, freqs: np.ndarray) -> np.ndarray:
    """Natural-log power spectrum of an AR model at the given frequencies.

    Frequencies must lie strictly below Nyquist. Output is finite whenever the
    model has positive gain.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    nyquist = model.rate / 2.0
    if np.any(freqs < 0) or np.any(freqs >= nyquist):
        bad = freqs[(freqs < 0) | (freqs >= nyquist)][0]
        raise FeatureError(f"frequency {bad} Hz outside [0, Nyquist {nyquist}) ")
    if model.gain <= 0:
        raise FeatureError("degenerate segment: zero prediction-error power")
    w = 2.0 * np.pi * freqs / model.rate
    if model.order:
        phases = np.exp(-1j * np.outer(w, np.arange(1, model.order + 1)))
        a_of_z = 1.0 + phases @ model.coefficients
    else:
        a_of_z = np.ones_like(w, dtype=np.complex128)
    return np.log(model.gain) - 2.0 * np.log(np.abs(a_of_z))


@dataclass
class FeatureConfig:
    """Acoustic analysis settings: sample rate, AR order, spectral grid."""

    rate: int = DEFAULT_RATE
    order: int = DEFAULT_ORDER
    f_lo: float = F_LO
    f_hi: float = F_HI
    n_points: int = N_POINTS

    def __post_init__(self):
        if self.rate <= 0:
            raise FeatureError(f"non-positive rate: {self.rate}")
        if self.order < 1:
            raise FeatureError(f"order must be >= 1, got {self.order}")
        if self.f_hi >= self.rate / 2.0:
            raise FeatureError(
                f"grid upper bound {self.f_hi} Hz not below Nyquist ({self.rate / 2.0})"
            )
        if self.n_points < 2:
            raise FeatureError(f"grid needs at least 2 points, got {self.n_points}")

    @property
    def min_samples(self) -> int:
        return 2 * (self.order + 1)

    def grid(self) -> np.ndarray:
        return spectral_grid(self.f_lo, self.f_hi, self.n_points)


def segment_features(samples: np.ndarray, config: FeatureConfig) -> np.ndarray:
    """Feature vector of one segment: Burg fit, then log spectrum on the grid."""
    model = fit_burg(samples, config.order, config.rate)
    return log_spectrum(model, config.grid())


class BurgSpectrumExtractor(TransformerMixin, BaseEstimator):
    """Transformer from raw sample arrays to log-spectral feature rows.

    Stateless (fit only validates parameters); transform takes an iterable of
    1-D sample arrays, already at `rate`, and returns an (n, n_points) matrix.
    """

    def __init__(self, rate: int = DEFAULT_RATE, order: int = DEFAULT_ORDER,
                 f_lo: float = F_LO, f_hi: float = F_HI, n_points: int = N_POINTS):
        self.rate = rate
        self.order = order
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.n_points = n_points

    def _config(self) -> FeatureConfig:
        return FeatureConfig(rate=self.rate, order=self.order, f_lo=self.f_lo,
                             f_hi=self.f_hi, n_points=self.n_points)

    def fit(self, X=None, y=None):
        self._config()
        return self

    def transform(self, X) -> np.ndarray:
        config = self._config()
        rows = [segment_features(np.asarray(seg), config) for seg in X]
        if not rows:
            return np.empty((0, config.n_points))
        return np.vstack(rows)


@dataclass
class FeatureRecord:
    """One extracted segment: provenance fields plus the feature vector."""

    recording_id: str
    speaker_id: str
    phoneme: str
    start_s: float
    dur_s: float
    values: np.ndarray = field(repr=False)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_features_csv(path: str, records: list[FeatureRecord],
                       n_points: int = N_POINTS) -> None:
    """Write feature records with the fixed header; floats at 9 significant digits."""
    cols = [f"f{i:02d}" for i in range(n_points)]
    with open(path, "w", newline="") as fh:
        fh.write("recording_id,speaker_id,phoneme,start_s,dur_s," + ",".join(cols) + "\n")
        for rec in records:
            if rec.values.size != n_points:
                raise FeatureError(
                    f"feature vector has {rec.values.size} values, expected {n_points}"
                )
            vals = ",".join(_fmt(v) for v in rec.values)
            fh.write(f"{rec.recording_id},{rec.speaker_id},{rec.phoneme},"
                     f"{_fmt(rec.start_s)},{_fmt(rec.dur_s)},{vals}\n")


def read_features_csv(path: str) -> list[FeatureRecord]:
    """Read back a features CSV, validating the header shape."""
    with open(path, "r", newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header[:5] != ["recording_id", "speaker_id", "phoneme", "start_s", "dur_s"]:
            raise FeatureError(f"{path}: unexpected feature CSV header")
        for i, name in enumerate(header[5:]):
            if not re.fullmatch(rf"f{i:02d}", name):
                raise FeatureError(f"{path}: unexpected feature column {name!r}")
        n_points = len(header) - 5
        if n_points < 1:
            raise FeatureError(f"{path}: no feature columns")
        records = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(header):
                raise FeatureError(f"{path}: line {lineno}: expected {len(header)} fields, "
                                   f"got {len(parts)}")
            records.append(FeatureRecord(
                recording_id=parts[0], speaker_id=parts[1], phoneme=parts[2],
                start_s=float(parts[3]), dur_s=float(parts[4]),
                values=np.array([float(v) for v in parts[5:]]),
            ))
    return records
