"""Library evaluation, cross-library ranking and report rendering."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from . import metrics
from .errors import EvaluationAborted, TransportError, ValidationError
from .lookup import (
    EnvironmentType,
    LibraryDescriptor,
    OrganizationType,
    TimingConfig,
    WeightTable,
    build_backend,
    default_weights,
    measure_access,
    organizedness_weight,
)
from .metrics import INTERPRETATION_BANDS
from .readiness import AqResult

log = logging.getLogger(__name__)

AGGREGATES = ("mean", "median")


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "md"

    @classmethod
    def parse(cls, value) -> "ReportFormat":
        if isinstance(value, cls):
            return value
        if value == "markdown":
            return cls.MARKDOWN
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(f"unknown report format {value!r}; expected json|csv|md") from None


class QuerySet(tuple):
    """Ordered, de-duplicated candidate component names."""

    def __new__(cls, names):
        out = []
        seen = set()
        for name in names:
            if not isinstance(name, str) or not name:
                raise ValidationError(f"query names must be non-empty strings, got {name!r}")
            if name in seen:
                log.warning("duplicate query %r ignored", name)
                continue
            seen.add(name)
            out.append(name)
        return super().__new__(cls, out)


def load_queries(path) -> QuerySet:
    """Read a query file: a JSON list, ``{"queries": [...]}``, or one name per line."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read query file {str(path)!r}: {exc.strerror or exc}") from None
    stripped = text.lstrip()
    if stripped.startswith(("[", "{")):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
        if isinstance(data, dict):
            if set(data) != {"queries"}:
                raise ValidationError(f"{path}: expected an object with a single 'queries' field")
            data = data["queries"]
        if not isinstance(data, list):
            raise ValidationError(f"{path}: queries must be a list of names")
        return QuerySet(data)
    lines = (line.strip() for line in text.splitlines())
    return QuerySet(line for line in lines if line and not line.startswith("#"))


@dataclass(frozen=True)
class CaqRow:
    component_name: str
    a_c: int
    r_l: float
    t: float
    caq: float
    per_trial: tuple = ()


@dataclass(frozen=True)
class LibraryReport:
    library_id: str
    organization: OrganizationType
    environment: EnvironmentType
    rows: tuple
    aggregate_caq: float
    availability_rate: float
    timing_config: TimingConfig
    aggregate: str = "mean"


@dataclass(frozen=True)
class Ranking:
    entries: tuple  # ((library_id, aggregate_caq), ...)

    def library_ids(self):
        return [lib for lib, _ in self.entries]


def aggregate_rows(rows, how="mean") -> float:
    if not rows:
        return 0.0
    values = [r.caq for r in rows]
    if how == "mean":
        return math.fsum(values) / len(values)
    if how == "median":
        return float(statistics.median(values))
    raise ValidationError(f"unknown aggregate {how!r}; expected mean|median")


def build_report(descriptor: LibraryDescriptor, rows, cfg: TimingConfig, aggregate="mean") -> LibraryReport:
    rows = tuple(rows)
    rate = sum(r.a_c for r in rows) / len(rows) if rows else 0.0
    return LibraryReport(
        descriptor.library_id,
        descriptor.organization,
        descriptor.environment,
        rows,
        aggregate_rows(rows, aggregate),
        rate,
        cfg,
        aggregate,
    )


def _row(backend, name, r_l, cfg, sentinel):
    m = measure_access(backend, name, cfg, sentinel=sentinel)
    a_c = 1 if m.found else 0
    # a missing component keeps its failed-lookup time for diagnosis; A_c=0 zeroes the CAQ anyway
    return CaqRow(name, a_c, r_l, m.t, metrics.compute_caq(a_c, r_l, m.t), m.per_trial)


def evaluate_library(
    descriptor: LibraryDescriptor,
    queries,
    weights: Optional[WeightTable] = None,
    cfg: TimingConfig = TimingConfig(),
    *,
    aggregate="mean",
    sentinel=None,
    workers=1,
    backend=None,
    timeout=5.0,
    connection_limit=1,
) -> LibraryReport:
    """Measure every query against the library and compute per-component CAQ.

    A transport failure aborts the run with :class:`EvaluationAborted`, whose
    ``partial`` attribute is the report over the rows finished so far.
    """
    queries = QuerySet(queries)
    if not queries:
        raise ValidationError("query set is empty; nothing to evaluate")
    if aggregate not in AGGREGATES:
        raise ValidationError(f"unknown aggregate {aggregate!r}; expected mean|median")
    weights = weights or default_weights()
    r_l = organizedness_weight(weights, descriptor.organization)

    own_backend = backend is None
    if own_backend:
        backend = build_backend(descriptor, timeout=timeout, connection_limit=connection_limit)
    if descriptor.environment.is_remote:
        workers = min(workers, connection_limit)
    rows = []
    try:
        if workers <= 1:
            for name in queries:
                rows.append(_row(backend, name, r_l, cfg, sentinel))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_row, backend, name, r_l, cfg, sentinel) for name in queries]
                for fut in futures:
                    rows.append(fut.result())
    except TransportError as exc:
        partial = build_report(descriptor, rows, cfg, aggregate)
        raise EvaluationAborted(
            f"evaluation of {descriptor.library_id!r} aborted after {len(rows)}/{len(queries)} queries: {exc}",
            partial,
        ) from exc
    finally:
        if own_backend:
            backend.close()
    return build_report(descriptor, rows, cfg, aggregate)


def compare_libraries(reports) -> Ranking:
    reports = list(reports)
    if not reports:
        raise ValidationError("nothing to compare")
    seen = set()
    for r in reports:
        if r.library_id in seen:
            raise ValidationError(f"duplicate library_id {r.library_id!r} in comparison")
        seen.add(r.library_id)
    ordered = sorted(reports, key=lambda r: (-r.aggregate_caq, r.library_id))
    return Ranking(tuple((r.library_id, r.aggregate_caq) for r in ordered))


# --- serialization -----------------------------------------------------------

def sig6(x: float) -> float:
    return float(f"{x:.6g}")


def _fmt(x) -> str:
    return f"{x:.6g}"


def report_to_dict(report: LibraryReport) -> dict:
    return {
        "kind": "library_report",
        "library_id": report.library_id,
        "organization": report.organization.value,
        "environment": report.environment.value,
        "weight_basis": "organization",
        "aggregate": report.aggregate,
        "aggregate_caq": sig6(report.aggregate_caq),
        "availability_rate": sig6(report.availability_rate),
        "timing_config": report.timing_config.to_dict(),
        "rows": [
            {
                "component_name": r.component_name,
                "a_c": r.a_c,
                "r_l": sig6(r.r_l),
                "t": sig6(r.t),
                "caq": sig6(r.caq),
                "per_trial": [sig6(x) for x in r.per_trial],
            }
            for r in report.rows
        ],
        "raw": {
            "aggregate_caq": report.aggregate_caq,
            "availability_rate": report.availability_rate,
            "rows": [
                {"component_name": r.component_name, "r_l": r.r_l, "t": r.t, "caq": r.caq,
                 "per_trial": list(r.per_trial)}
                for r in report.rows
            ],
        },
    }


def report_from_dict(data) -> LibraryReport:
    """Rebuild a LibraryReport from its JSON form, preferring full-precision ``raw`` values."""
    if not isinstance(data, dict) or data.get("kind") != "library_report":
        raise ValidationError("not a library report (kind != 'library_report')")
    try:
        raw = data.get("raw") or {}
        raw_rows = raw.get("rows") or data["rows"]
        rows = []
        for shown, exact in zip(data["rows"], raw_rows):
            rows.append(CaqRow(shown["component_name"], int(shown["a_c"]), float(exact["r_l"]),
                               float(exact["t"]), float(exact["caq"]), tuple(exact.get("per_trial", ()))))
        tc = data["timing_config"]
        return LibraryReport(
            data["library_id"],
            OrganizationType(data["organization"]),
            EnvironmentType(data["environment"]),
            tuple(rows),
            float(raw.get("aggregate_caq", data["aggregate_caq"])),
            float(raw.get("availability_rate", data["availability_rate"])),
            TimingConfig(tc["trials"], tc["warmups"], tc.get("statistic", "median")),
            data.get("aggregate", "mean"),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ValidationError(f"malformed library report: {exc!r}") from None


def load_report(path) -> LibraryReport:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read report {str(path)!r}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        return report_from_dict(data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def ranking_to_dict(ranking: Ranking) -> dict:
    return {
        "kind": "ranking",
        "ranking": [
            {"rank": i, "library_id": lib, "aggregate_caq": sig6(value)}
            for i, (lib, value) in enumerate(ranking.entries, 1)
        ],
        "raw": {"aggregate_caq": {lib: value for lib, value in ranking.entries}},
    }


def aq_to_dict(result: AqResult) -> dict:
    return {
        "kind": "aq_result",
        "project_id": result.project_id,
        "hs_available": result.hs_available,
        "hs_needed": result.hs_needed,
        "rq": sig6(result.rq),
        "mq": sig6(result.mq),
        "aq": sig6(result.aq),
        "aq_percent": sig6(result.aq_percent),
        "classification": result.classification.value,
        "interpretation": result.classification.label,
        "per_person_ratios": {k: sig6(v) for k, v in result.per_person_ratios.items()},
        "surplus": list(result.surplus),
        "raw": {
            "rq": result.rq,
            "mq": result.mq,
            "aq": result.aq,
            "aq_percent": result.aq_percent,
            "per_person_ratios": dict(result.per_person_ratios),
        },
    }


_RENDERABLE = (LibraryReport, Ranking, AqResult)


def _to_dict(obj) -> dict:
    if isinstance(obj, LibraryReport):
        return report_to_dict(obj)
    if isinstance(obj, Ranking):
        return ranking_to_dict(obj)
    if isinstance(obj, AqResult):
        return aq_to_dict(obj)
    raise TypeError(f"cannot render {type(obj).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _csv_report(obj) -> str:
    if isinstance(obj, LibraryReport):
        return _csv(
            ["library_id", "component_name", "a_c", "r_l", "t", "caq"],
            [[obj.library_id, r.component_name, r.a_c, _fmt(r.r_l), _fmt(r.t), _fmt(r.caq)] for r in obj.rows],
        )
    if isinstance(obj, Ranking):
        return _csv(
            ["rank", "library_id", "aggregate_caq"],
            [[i, lib, _fmt(v)] for i, (lib, v) in enumerate(obj.entries, 1)],
        )
    rows = [
        ["rq", _fmt(obj.rq)],
        ["mq", _fmt(obj.mq)],
        ["aq", _fmt(obj.aq)],
        ["aq_percent", _fmt(obj.aq_percent)],
        ["classification", obj.classification.value],
    ]
    rows += [[f"ratio:{pid}", _fmt(v)] for pid, v in obj.per_person_ratios.items()]
    return _csv(["metric", "value"], rows)


def _md_table(header, rows) -> list:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def _md_report(obj) -> str:
    if isinstance(obj, LibraryReport):
        lines = [f"# CAQ report: {obj.library_id}", ""]
        tc = obj.timing_config
        lines += _md_table(
            ["Field", "Value"],
            [
                ["Organization", obj.organization.value],
                ["Environment", obj.environment.value],
                [f"Aggregate CAQ ({obj.aggregate})", _fmt(obj.aggregate_caq)],
                ["Availability rate", _fmt(obj.availability_rate)],
                ["Timing", f"{tc.statistic} of {tc.trials} trials after {tc.warmups} warmups"],
            ],
        )
        lines.append("")
        lines += _md_table(
            ["Component", "A_c", "R_l", "t (s)", "CAQ (1/s)"],
            [[r.component_name, r.a_c, _fmt(r.r_l), _fmt(r.t), _fmt(r.caq)] for r in obj.rows],
        )
    elif isinstance(obj, Ranking):
        lines = ["# CAQ ranking", ""]
        lines += _md_table(
            ["Rank", "Library", "Aggregate CAQ (1/s)"],
            [[i, lib, _fmt(v)] for i, (lib, v) in enumerate(obj.entries, 1)],
        )
    else:
        lines = [f"# Activeness quotient: {obj.project_id}", ""]
        lines += _md_table(
            ["Metric", "Value"],
            [
                ["RQ", f"{_fmt(obj.rq)} ({obj.hs_available}/{obj.hs_needed})"],
                ["MQ", _fmt(obj.mq)],
                ["AQ", _fmt(obj.aq)],
                ["AQ (%)", _fmt(obj.aq_percent)],
            ],
        )
        lines.append("")
        lines += _md_table(["Person", "S_a / S_r"], [[pid, _fmt(v)] for pid, v in obj.per_person_ratios.items()])
        lines.append("")
        lines += _md_table(
            ["VALUE OF AQ", "INTERPRETATION", "THIS PROJECT"],
            [[band, cls.label, f"**AQ = {_fmt(obj.aq)}**" if cls is obj.classification else ""]
             for band, cls in INTERPRETATION_BANDS],
        )
        lines += ["", f"Interpretation: **{obj.classification.label}**"]
    return "\n".join(lines) + "\n"


def render_report(obj, fmt="json") -> bytes:
    """Render a report, ranking or AQ result. Output depends only on ``obj``."""
    fmt = ReportFormat.parse(fmt)
    if not isinstance(obj, _RENDERABLE):
        raise TypeError(f"cannot render {type(obj).__name__}")
    if fmt is ReportFormat.JSON:
        text = json.dumps(_to_dict(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    elif fmt is ReportFormat.CSV:
        text = _csv_report(obj)
    else:
        text = _md_report(obj)
    return text.encode("utf-8")

