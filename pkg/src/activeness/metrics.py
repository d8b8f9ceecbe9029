"""Closed-form readiness metrics.

Component activeness quotient (CAQ) for one component lookup, and the
organizational quotients RQ, MQ and AQ with their interpretation bands.
Everything here is a pure function over plain numbers.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import ValidationError

TIME_FLOOR = 1e-6  # seconds
EQUALITY_TOLERANCE = 1e-9


class PersonSkills(NamedTuple):
    person_id: str
    skills_available: int
    skills_required: int


class ReadinessClass(str, Enum):
    NOT_READY = "NOT_READY"
    LESS_THAN_READY = "LESS_THAN_READY"
    EXACTLY_READY = "EXACTLY_READY"
    MORE_THAN_READY = "MORE_THAN_READY"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def rank(self) -> int:
        return _RANKS[self]


_LABELS = {
    ReadinessClass.MORE_THAN_READY: "MORE THAN READY",
    ReadinessClass.EXACTLY_READY: "EXACTLY READY",
    ReadinessClass.LESS_THAN_READY: "LESS THAN READY – NEED MORE RESOURCES AND/OR MANPOWER",
    ReadinessClass.NOT_READY: "NOT READY",
}
_RANKS = {cls: i for i, cls in enumerate(ReadinessClass)}

# (band shown in the interpretation table, class)
INTERPRETATION_BANDS = (
    ("AQ > 1", ReadinessClass.MORE_THAN_READY),
    ("AQ = 1", ReadinessClass.EXACTLY_READY),
    ("0 < AQ < 1", ReadinessClass.LESS_THAN_READY),
    ("AQ = 0", ReadinessClass.NOT_READY),
)


def _finite(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{what} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{what} must be finite, got {value!r}")
    return float(value)


def _count(value, what):
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValidationError(f"{what} must be a non-negative integer, got {value!r}")
    return value


def check_availability(a_c) -> int:
    if isinstance(a_c, bool):
        return int(a_c)
    if a_c not in (0, 1) or not isinstance(a_c, int):
        raise ValidationError(f"availability must be 0 or 1, got {a_c!r}")
    return a_c


def check_weight(r_l) -> float:
    r_l = _finite(r_l, "organizedness weight")
    if r_l <= 0:
        raise ValidationError(f"organizedness weight must be > 0, got {r_l!r}")
    return r_l


def check_access_time(t) -> float:
    t = _finite(t, "access time")
    if t < TIME_FLOOR:
        raise ValidationError(f"access time must be >= {TIME_FLOOR:g} s, got {t!r}")
    return t


def clamp_time(seconds: float) -> float:
    """Raise a measured duration to the clock-resolution floor."""
    return max(float(seconds), TIME_FLOOR)


def compute_caq(a_c: int, r_l: float, t: float) -> float:
    """CAQ = availability * organizedness / access time, in 1/s."""
    a_c = check_availability(a_c)
    r_l = check_weight(r_l)
    t = check_access_time(t)
    if a_c == 0:
        return 0.0
    return a_c * r_l / t


def compute_rq(hs_available: int, hs_needed: int) -> float:
    """Resources quotient. Nothing needed counts as fully resourced (1.0)."""
    hs_available = _count(hs_available, "hs_available")
    hs_needed = _count(hs_needed, "hs_needed")
    if hs_needed == 0:
        return 1.0
    return hs_available / hs_needed


def person_ratio(person: PersonSkills) -> float:
    available = _count(person.skills_available, f"{person.person_id}: skills_available")
    required = _count(person.skills_required, f"{person.person_id}: skills_required")
    if required == 0:
        return 1.0
    return available / required


def compute_mq(persons: Iterable[PersonSkills]) -> float:
    """Manpower quotient: mean of per-person available/required skill ratios."""
    ratios = [person_ratio(PersonSkills(*p)) for p in persons]
    if not ratios:
        raise ValidationError("manpower quotient needs at least one person")
    return math.fsum(ratios) / len(ratios)


def compute_aq(rq: float, mq: float) -> float:
    rq = _finite(rq, "RQ")
    mq = _finite(mq, "MQ")
    if rq < 0 or mq < 0:
        raise ValidationError(f"quotients must be non-negative, got RQ={rq!r}, MQ={mq!r}")
    return rq * mq


def interpret_aq(aq: float) -> ReadinessClass:
    aq = _finite(aq, "AQ")
    if aq < 0:
        raise ValidationError(f"AQ must be non-negative, got {aq!r}")
    if abs(aq - 1.0) <= EQUALITY_TOLERANCE:
        return ReadinessClass.EXACTLY_READY
    if aq > 1.0:
        return ReadinessClass.MORE_THAN_READY
    if aq > 0.0:
        return ReadinessClass.LESS_THAN_READY
    return ReadinessClass.NOT_READY


def to_percent(q: float) -> float:
    q = _finite(q, "quotient")
    if q < 0:
        raise ValidationError(f"quotient must be non-negative, got {q!r}")
    return q * 100.0
