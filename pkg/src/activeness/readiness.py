"""Project readiness manifests and the RQ / MQ / AQ evaluation over them."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple

from . import metrics
from .errors import ValidationError
from .metrics import PersonSkills, ReadinessClass


class Category(str, Enum):
    HARDWARE = "hardware"
    SOFTWARE = "software"


def normalize_skill(skill: str) -> str:
    return skill.strip().casefold()


@dataclass(frozen=True)
class RequirementEntry:
    name: str
    category: Category
    needed: bool
    available: bool

    @property
    def surplus(self) -> bool:
        return self.available and not self.needed


@dataclass(frozen=True)
class PersonEntry:
    person_id: str
    skills_required: frozenset
    skills_possessed: frozenset


@dataclass(frozen=True)
class ReadinessManifest:
    project_id: str
    requirements: tuple
    persons: tuple


class Counts(NamedTuple):
    hs_available: int
    hs_needed: int
    persons: list


@dataclass(frozen=True)
class AqResult:
    project_id: str
    hs_available: int
    hs_needed: int
    rq: float
    mq: float
    aq: float
    aq_percent: float
    classification: ReadinessClass
    per_person_ratios: dict
    surplus: tuple = ()


_TOP_FIELDS = {"project_id", "requirements", "persons"}
_REQ_FIELDS = {"name", "category", "needed", "available"}
_PERSON_FIELDS = {"person_id", "skills_required", "skills_possessed"}


def _fields(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ValidationError(f"{where}: unknown field {key!r}")
    for key in sorted(allowed):
        if key not in obj:
            raise ValidationError(f"{where}: missing field {key!r}")
    return obj


def _ident(value, where):
    if not isinstance(value, str) or not value.strip():
        raise ValidationError(f"{where}: expected a non-empty string, got {value!r}")
    return value


def _flag(value, where):
    if not isinstance(value, bool):
        raise ValidationError(f"{where}: expected true or false, got {value!r}")
    return value


def _skills(values, where):
    if not isinstance(values, list):
        raise ValidationError(f"{where}: expected a list of skill names")
    out = set()
    for i, skill in enumerate(values):
        if not isinstance(skill, str) or not skill.strip():
            raise ValidationError(f"{where}[{i}]: skill names must be non-empty strings")
        out.add(normalize_skill(skill))
    return frozenset(out)


def manifest_from_dict(data) -> ReadinessManifest:
    _fields(data, _TOP_FIELDS, "manifest")
    project_id = _ident(data["project_id"], "project_id")

    if not isinstance(data["requirements"], list):
        raise ValidationError("requirements: expected a list")
    requirements = []
    seen_req = set()
    for i, raw in enumerate(data["requirements"]):
        where = f"requirements[{i}]"
        _fields(raw, _REQ_FIELDS, where)
        name = _ident(raw["name"], f"{where}.name")
        try:
            category = Category(raw["category"])
        except ValueError:
            raise ValidationError(f"{where}.category: expected hardware|software, got {raw['category']!r}") from None
        if (category, name) in seen_req:
            raise ValidationError(f"{where}: duplicate {category.value} requirement {name!r}")
        seen_req.add((category, name))
        requirements.append(
            RequirementEntry(name, category, _flag(raw["needed"], f"{where}.needed"),
                             _flag(raw["available"], f"{where}.available"))
        )

    if not isinstance(data["persons"], list):
        raise ValidationError("persons: expected a list")
    persons = []
    seen_person = set()
    for i, raw in enumerate(data["persons"]):
        where = f"persons[{i}]"
        _fields(raw, _PERSON_FIELDS, where)
        person_id = _ident(raw["person_id"], f"{where}.person_id")
        if person_id in seen_person:
            raise ValidationError(f"{where}: duplicate person_id {person_id!r}")
        seen_person.add(person_id)
        persons.append(
            PersonEntry(person_id, _skills(raw["skills_required"], f"{where}.skills_required"),
                        _skills(raw["skills_possessed"], f"{where}.skills_possessed"))
        )
    return ReadinessManifest(project_id, tuple(requirements), tuple(persons))


def parse_manifest(document) -> ReadinessManifest:
    """Parse and validate a manifest from JSON text or bytes."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"manifest: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError:
        raise ValidationError("manifest: document is not valid UTF-8") from None
    return manifest_from_dict(data)


def load_manifest(path) -> ReadinessManifest:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read manifest {str(path)!r}: {exc.strerror or exc}") from None
    return parse_manifest(raw)


def manifest_to_dict(manifest: ReadinessManifest) -> dict:
    return {
        "project_id": manifest.project_id,
        "requirements": [
            {"name": r.name, "category": r.category.value, "needed": r.needed, "available": r.available}
            for r in manifest.requirements
        ],
        "persons": [
            {
                "person_id": p.person_id,
                "skills_required": sorted(p.skills_required),
                "skills_possessed": sorted(p.skills_possessed),
            }
            for p in manifest.persons
        ],
    }


def serialize_manifest(manifest: ReadinessManifest) -> bytes:
    return json.dumps(manifest_to_dict(manifest), indent=2, ensure_ascii=False).encode("utf-8") + b"\n"


def derive_counts(manifest: ReadinessManifest, *, mq_ratio_cap=True, count_surplus=False) -> Counts:
    """Reduce a manifest to the integer inputs of RQ and MQ.

    By default only needed requirements are counted, and a person's available
    skills are the possessed skills that are also required. ``count_surplus``
    lets available-but-unneeded resources raise HS_a above HS_n;
    ``mq_ratio_cap=False`` counts every possessed skill.
    """
    hs_needed = sum(1 for r in manifest.requirements if r.needed)
    if count_surplus:
        hs_available = sum(1 for r in manifest.requirements if r.available)
    else:
        hs_available = sum(1 for r in manifest.requirements if r.needed and r.available)
    persons = []
    for p in manifest.persons:
        possessed = p.skills_possessed & p.skills_required if mq_ratio_cap else p.skills_possessed
        persons.append(PersonSkills(p.person_id, len(possessed), len(p.skills_required)))
    return Counts(hs_available, hs_needed, persons)


def evaluate_readiness(manifest: ReadinessManifest, *, mq_ratio_cap=True, count_surplus=False) -> AqResult:
    if not manifest.persons:
        raise ValidationError(f"manifest {manifest.project_id!r} lists no persons; MQ is undefined")
    counts = derive_counts(manifest, mq_ratio_cap=mq_ratio_cap, count_surplus=count_surplus)
    rq = metrics.compute_rq(counts.hs_available, counts.hs_needed)
    mq = metrics.compute_mq(counts.persons)
    aq = metrics.compute_aq(rq, mq)
    return AqResult(
        project_id=manifest.project_id,
        hs_available=counts.hs_available,
        hs_needed=counts.hs_needed,
        rq=rq,
        mq=mq,
        aq=aq,
        aq_percent=metrics.to_percent(aq),
        classification=metrics.interpret_aq(aq),
        per_person_ratios={p.person_id: metrics.person_ratio(p) for p in counts.persons},
        surplus=tuple(r.name for r in manifest.requirements if r.surplus),
    )
