"""Phoneme inventory and articulatory classification.

Labels follow ARPAbet plus a set of non-speech filler tokens that show up in
interview segmentations (breaths, hesitations, coughs, silence). Consonants
carry a three-axis articulatory classification — manner, place, voicing —
used to aggregate per-phoneme results into category-level scores. Lookups are
case-insensitive; the canonical spelling is upper-case.
"""

from __future__ import annotations

from dataclasses import dataclass


class PhoneticsError(ValueError):
    """Unknown phoneme label, axis, or category value."""


@dataclass(frozen=True)
class PhonemeInfo:
    label: str
    kind: str  # "consonant" | "filler" | "vowel"
    manner: str | None = None
    place: str | None = None
    voicing: str | None = None


# label: (manner, place, voicing). R files under alveolar and W under
# bilabial — single-place bookkeeping forces a primary-constriction call.
_CONSONANTS = {
    "P":  ("plosive", "bilabial", "unvoiced"),
    "B":  ("plosive", "bilabial", "voiced"),
    "T":  ("plosive", "alveolar", "unvoiced"),
    "D":  ("plosive", "alveolar", "voiced"),
    "K":  ("plosive", "velar", "unvoiced"),
    "G":  ("plosive", "velar", "voiced"),
    "CH": ("affricate", "palatal", "unvoiced"),
    "JH": ("affricate", "palatal", "voiced"),
    "F":  ("fricative", "labiodental", "unvoiced"),
    "V":  ("fricative", "labiodental", "voiced"),
    "TH": ("fricative", "interdental", "unvoiced"),
    "DH": ("fricative", "interdental", "voiced"),
    "S":  ("fricative", "alveolar", "unvoiced"),
    "Z":  ("fricative", "alveolar", "voiced"),
    "SH": ("fricative", "palatal", "unvoiced"),
    "ZH": ("fricative", "palatal", "voiced"),
    "HH": ("fricative", "glottal", "unvoiced"),
    "M":  ("nasal", "bilabial", "voiced"),
    "N":  ("nasal", "alveolar", "voiced"),
    "NG": ("nasal", "velar", "voiced"),
    "L":  ("liquid", "alveolar", "voiced"),
    "R":  ("liquid", "alveolar", "voiced"),
    "W":  ("glide", "bilabial", "voiced"),
    "Y":  ("glide", "palatal", "voiced"),
}

_FILLERS = ("BR", "COUGH", "LAUGH", "NOISE", "SIGH", "SIL",
            "SMACK", "THROATCLEAR", "UH", "UM")

_VOWELS = ("AA", "AE", "AH", "AO", "AW", "AX", "AY", "EH", "ER", "EY",
           "IH", "IX", "IY", "OW", "OY", "UW")

_REGISTRY: dict[str, PhonemeInfo] = {}
for _label, (_m, _p, _v) in _CONSONANTS.items():
    _REGISTRY[_label] = PhonemeInfo(_label, "consonant", _m, _p, _v)
for _label in _FILLERS:
    _REGISTRY[_label] = PhonemeInfo(_label, "filler")
for _label in _VOWELS:
    _REGISTRY[_label] = PhonemeInfo(_label, "vowel")

CONSONANTS = tuple(sorted(_CONSONANTS))
FILLERS = tuple(sorted(_FILLERS))
VOWELS = tuple(sorted(_VOWELS))
ALL_PHONEMES = tuple(sorted(_REGISTRY))

AXES = ("manner", "place", "voicing")
MANNER_VALUES = tuple(sorted({m for m, _, _ in _CONSONANTS.values()}))
PLACE_VALUES = tuple(sorted({p for _, p, _ in _CONSONANTS.values()}))
VOICING_VALUES = tuple(sorted({v for _, _, v in _CONSONANTS.values()}))
_AXIS_VALUES = {"manner": MANNER_VALUES, "place": PLACE_VALUES,
                "voicing": VOICING_VALUES}


def classify_phoneme(label: str) -> PhonemeInfo:
    """Registry entry for a label, case-insensitively.

    Consonants carry manner/place/voicing; fillers and vowels leave all three
    None.
    """
    info = _REGISTRY.get(label.upper())
    if info is None:
        raise PhoneticsError(f"unknown phoneme label: {label}")
    return info


def is_known(label: str) -> bool:
    return label.upper() in _REGISTRY


def axis_values(axis: str) -> tuple[str, ...]:
    values = _AXIS_VALUES.get(axis)
    if values is None:
        raise PhoneticsError(f"unknown articulatory axis: {axis!r} (want one of {AXES})")
    return values


def members_of_category(axis: str, value: str) -> tuple[str, ...]:
    """Consonant labels in one articulatory category, sorted."""
    if value not in axis_values(axis):
        raise PhoneticsError(f"unknown category: {axis}={value}")
    return tuple(lbl for lbl in CONSONANTS
                 if getattr(_REGISTRY[lbl], axis) == value)


def default_inventory(include_vowels: bool = False) -> tuple[str, ...]:
    """Phonemes evaluated by default: consonants and fillers; vowels opt-in."""
    labels = CONSONANTS + FILLERS + (VOWELS if include_vowels else ())
    return tuple(sorted(labels))


def registry_to_json() -> dict:
    """Registry as plain data, for the report and for external tools."""
    def entry(info: PhonemeInfo) -> dict:
        out = {"label": info.label, "kind": info.kind}
        if info.kind == "consonant":
            out.update(manner=info.manner, place=info.place, voicing=info.voicing)
        return out

    return {
        "consonants": [entry(_REGISTRY[lbl]) for lbl in CONSONANTS],
        "fillers": [entry(_REGISTRY[lbl]) for lbl in FILLERS],
        "vowels": [entry(_REGISTRY[lbl]) for lbl in VOWELS],
        "axes": {axis: list(_AXIS_VALUES[axis]) for axis in AXES},
    }
