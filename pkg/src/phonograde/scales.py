"""Clinical rating-scale registry: BPRS, MADRS, and PANSS items.

Each symptom code carries its scale, prose description, legal rating range,
and the maximum rating actually observed in the reference cohort (useful when
interpreting synthetic ranges). The two PANSS composites (general and
positive scale totals) are range-validated like any other item — no attempt
is made to recompute them from their members. Registry order is the canonical
order for grids and reports: B1-B24, M1-M10, P1-P7, N1-N7, G1-G16, P01, P02.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass


class ScaleError(ValueError):
    """Unknown symptom code or malformed ratings data."""


@dataclass(frozen=True)
class SymptomSpec:
    code: str
    scale: str  # "BPRS" | "MADRS" | "PANSS"
    description: str
    min_rating: int
    max_rating: int
    max_observed: int
    is_total: bool = False

    @property
    def midpoint(self) -> float:
        return (self.min_rating + self.max_rating) / 2.0


# (code, description, max observed rating in the reference cohort)
_BPRS = [
    ("B1", "Somatic concerns", 2), ("B2", "Anxiety", 5), ("B3", "Depression", 6),
    ("B4", "Suicidality", 5), ("B5", "Guilt", 5), ("B6", "Hostility", 3),
    ("B7", "Elated Mood", 6), ("B8", "Grandiosity", 6), ("B9", "Suspiciousness", 5),
    ("B10", "Hallucinations", 6), ("B11", "Unusual thought content", 6),
    ("B12", "Bizarre behavior", 5), ("B13", "Self-neglect", 3),
    ("B14", "Disorientation", 2), ("B15", "Conceptual disorganization", 4),
    ("B16", "Blunted affect", 3), ("B17", "Emotional withdrawal", 4),
    ("B18", "Motor retardation", 3), ("B19", "Tension", 4),
    ("B20", "Uncooperativeness", 4), ("B21", "Excitement", 6),
    ("B22", "Distractability", 4), ("B23", "Motor hyperactivity", 6),
    ("B24", "Mannerisms and posturing", 3),
]
_MADRS = [
    ("M1", "Apparent sadness", 6), ("M2", "Reported sadness", 5),
    ("M3", "Inner tension", 4), ("M4", "Reduced sleep", 4),
    ("M5", "Reduced appetite", 2), ("M6", "Concentration difficulties", 4),
    ("M7", "Lassitude", 4), ("M8", "Inability to feel", 4),
    ("M9", "Pessimistic thoughts", 5), ("M10", "Suicidal thoughts", 5),
]
_PANSS = [
    ("P1", "Delusions", 3), ("P2", "Conceptual disorganization", 4),
    ("P3", "Hallucinatory behavior", 6), ("P4", "Excitement", 6),
    ("P5", "Grandiosity", 7), ("P6", "Suspiciousness/persecution", 5),
    ("P7", "Hostility", 5),
    ("N1", "Blunted affect", 5), ("N2", "Emotional withdrawal", 5),
    ("N3", "Poor rapport", 3), ("N4", "Passive/apathetic social withdrawal", 4),
    ("N5", "Difficulty in abstract thinking", 3),
    ("N6", "Lack of spontaneity and flow of conversation", 4),
    ("N7", "Stereotyped thinking", 5),
    ("G1", "Somatic concern", 3), ("G2", "Anxiety", 5), ("G3", "Guilt feelings", 5),
    ("G4", "Tension", 5), ("G5", "Mannerisms and posturing", 3),
    ("G6", "Depression", 6), ("G7", "Motor retardation", 4),
    ("G8", "Uncooperativeness", 3), ("G9", "Unusual thought content", 6),
    ("G10", "Disorientation", 3), ("G11", "Poor attention", 4),
    ("G12", "Lack of judgment and insight", 2), ("G13", "Disturbance of volition", 3),
    ("G14", "Poor impulse control", 2), ("G15", "Preoccupation", 4),
    ("G16", "Active social avoidance", 4),
]

SYMPTOMS: tuple[SymptomSpec, ...] = tuple(
    [SymptomSpec(c, "BPRS", d, 1, 7, mx) for c, d, mx in _BPRS]
    + [SymptomSpec(c, "MADRS", d, 0, 6, mx) for c, d, mx in _MADRS]
    + [SymptomSpec(c, "PANSS", d, 1, 7, mx) for c, d, mx in _PANSS]
    + [
        SymptomSpec("P01", "PANSS", "General scale total", 16, 112, 44, is_total=True),
        SymptomSpec("P02", "PANSS", "Positive scale total", 7, 49, 21, is_total=True),
    ]
)

_BY_CODE = {spec.code: spec for spec in SYMPTOMS}
_INDEX = {spec.code: i for i, spec in enumerate(SYMPTOMS)}

assert len(SYMPTOMS) == 66


def all_codes() -> tuple[str, ...]:
    return tuple(spec.code for spec in SYMPTOMS)


def load_scale_registry() -> dict[str, SymptomSpec]:
    """The full 66-symptom registry as an ordered code -> spec mapping."""
    return dict(_BY_CODE)


def symptom_spec(code: str) -> SymptomSpec:
    spec = _BY_CODE.get(code.upper())
    if spec is None:
        raise ScaleError(f"unknown symptom code: {code!r}")
    return spec


def registry_index(code: str) -> int:
    """Position of the code in canonical registry order."""
    return _INDEX[symptom_spec(code).code]


@dataclass(frozen=True)
class RatingViolation:
    """A rating outside its scale range — not an exception; callers decide severity."""

    code: str
    value: int
    min_rating: int
    max_rating: int

    @property
    def message(self) -> str:
        return (f"rating {self.value} out of range "
                f"{self.min_rating}-{self.max_rating} for {self.code}")


def validate_rating(code: str, value: int) -> RatingViolation | None:
    spec = symptom_spec(code)
    if spec.min_rating <= value <= spec.max_rating:
        return None
    return RatingViolation(spec.code, value, spec.min_rating, spec.max_rating)


class RatingTable:
    """Per-speaker integer ratings keyed by (speaker_id, symptom code)."""

    def __init__(self, entries: dict[tuple[str, str], int]):
        self._entries = dict(entries)
        self.speakers: tuple[str, ...] = tuple(sorted({s for s, _ in self._entries}))

    def __len__(self) -> int:
        return len(self._entries)

    def has(self, speaker_id: str, code: str) -> bool:
        return (speaker_id, code) in self._entries

    def get(self, speaker_id: str, code: str) -> int:
        try:
            return self._entries[(speaker_id, code)]
        except KeyError:
            raise ScaleError(f"no rating for speaker {speaker_id!r}, symptom {code!r}") from None

    def for_symptom(self, code: str) -> dict[str, int]:
        """speaker -> rating, restricted to speakers rated on that symptom."""
        code = symptom_spec(code).code
        return {s: v for (s, c), v in self._entries.items() if c == code}

    def items(self):
        return self._entries.items()


def load_ratings(path: str) -> RatingTable:
    """Read a ratings CSV (header speaker_id,symptom_code,rating).

    Unknown codes, non-integer or out-of-range ratings, and duplicate
    (speaker, symptom) pairs are all hard errors, reported with line numbers.
    """
    entries: dict[tuple[str, str], int] = {}
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["speaker_id", "symptom_code", "rating"]:
            raise ScaleError(f"{path}: expected header speaker_id,symptom_code,rating")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ScaleError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
            speaker, code, raw = (v.strip() for v in row)
            spec = _BY_CODE.get(code.upper())
            if spec is None:
                raise ScaleError(f"{path}: line {lineno}: unknown symptom code {code!r}")
            try:
                value = int(raw)
            except ValueError:
                raise ScaleError(f"{path}: line {lineno}: non-integer rating {raw!r}") from None
            violation = validate_rating(spec.code, value)
            if violation is not None:
                raise ScaleError(f"{path}: line {lineno}: {violation.message}")
            key = (speaker, spec.code)
            if key in entries:
                raise ScaleError(f"{path}: line {lineno}: duplicate rating "
                                 f"for ({speaker}, {spec.code})")
            entries[key] = value
    return RatingTable(entries)


def write_ratings_csv(path: str, table: RatingTable) -> None:
    rows = sorted(table.items(), key=lambda kv: (kv[0][0], registry_index(kv[0][1])))
    with open(path, "w", newline="") as fh:
        fh.write("speaker_id,symptom_code,rating\n")
        for (speaker, code), value in rows:
            fh.write(f"{speaker},{code},{value}\n")


def registry_to_json() -> list[dict]:
    return [
        {
            "code": s.code, "scale": s.scale, "description": s.description,
            "min_rating": s.min_rating, "max_rating": s.max_rating,
            "max_observed": s.max_observed, "is_total": s.is_total,
        }
        for s in SYMPTOMS
    ]
