"""Component library backends and the access-time harness.

A library is organized one of three ways (hierarchical tree, search index,
flat dropdown list) and is reached either locally or through a remote
registry. Every backend answers one question: does a component with exactly
this name exist, and how long did it take to find out.
"""

from __future__ import annotations

import json
import logging
import os
import statistics
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional
from urllib.parse import quote, urlparse

import httpx

from .errors import NondeterministicLookupError, TransportError, ValidationError
from .metrics import check_weight, clamp_time

log = logging.getLogger(__name__)

WEIGHTS_ENV = "CAQ_DEFAULT_WEIGHTS"


class OrganizationType(str, Enum):
    HIERARCHICAL = "hierarchical"
    SEARCH_BASED = "search_based"
    DROPDOWN_LIST = "dropdown_list"


class EnvironmentType(str, Enum):
    LOCAL_CLI = "local_cli"
    LOCAL_IDE = "local_ide"
    NETWORK = "network"
    INTERNET = "internet"

    @property
    def is_remote(self) -> bool:
        return self in (EnvironmentType.NETWORK, EnvironmentType.INTERNET)


def _enum(cls, value, what):
    try:
        return cls(value)
    except ValueError:
        choices = "|".join(m.value for m in cls)
        raise ValidationError(f"{what}: expected one of {choices}, got {value!r}") from None


@dataclass(frozen=True)
class ComponentRecord:
    name: str
    path: tuple = ()
    version: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError(f"component name must be a non-empty string, got {self.name!r}")
        path = tuple(self.path)
        for seg in path:
            if not isinstance(seg, str) or not seg:
                raise ValidationError(f"component {self.name!r}: path segments must be non-empty strings")
        object.__setattr__(self, "path", path)
        if self.version is not None and not isinstance(self.version, str):
            raise ValidationError(f"component {self.name!r}: version must be a string")

    def to_dict(self) -> dict:
        d = {"name": self.name, "path": list(self.path)}
        if self.version is not None:
            d["version"] = self.version
        return d

    @classmethod
    def from_dict(cls, data, where="component") -> "ComponentRecord":
        if not isinstance(data, dict):
            raise ValidationError(f"{where}: expected an object")
        unknown = set(data) - {"name", "path", "version"}
        if unknown:
            raise ValidationError(f"{where}: unknown field {sorted(unknown)[0]!r}")
        if "name" not in data:
            raise ValidationError(f"{where}: missing field 'name'")
        path = data.get("path", [])
        if not isinstance(path, list):
            raise ValidationError(f"{where}.path: expected a list")
        try:
            return cls(data["name"], tuple(path), data.get("version"))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None


def _check_endpoint(url) -> str:
    if not isinstance(url, str):
        raise ValidationError(f"remote_endpoint must be a URL string, got {url!r}")
    parsed = urlparse(url)
    if parsed.scheme not in ("http", "https") or not parsed.netloc:
        raise ValidationError(f"remote_endpoint is not a valid http(s) URL: {url!r}")
    return url.rstrip("/")


@dataclass(frozen=True)
class LibraryDescriptor:
    library_id: str
    organization: OrganizationType
    environment: EnvironmentType
    components: tuple = ()
    remote_endpoint: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.library_id, str) or not self.library_id:
            raise ValidationError("library_id must be a non-empty string")
        object.__setattr__(self, "organization", _enum(OrganizationType, self.organization, "organization"))
        object.__setattr__(self, "environment", _enum(EnvironmentType, self.environment, "environment"))
        components = tuple(self.components)
        seen = set()
        for c in components:
            if c.name in seen:
                raise ValidationError(f"library {self.library_id!r}: duplicate component name {c.name!r}")
            seen.add(c.name)
        object.__setattr__(self, "components", components)
        if self.environment.is_remote:
            if self.remote_endpoint is None:
                raise ValidationError(
                    f"library {self.library_id!r}: remote_endpoint is required for {self.environment.value}"
                )
            object.__setattr__(self, "remote_endpoint", _check_endpoint(self.remote_endpoint))
        elif self.remote_endpoint is not None:
            raise ValidationError(
                f"library {self.library_id!r}: remote_endpoint given for local environment {self.environment.value}"
            )

    def to_dict(self) -> dict:
        d = {
            "library_id": self.library_id,
            "organization": self.organization.value,
            "environment": self.environment.value,
            "components": [c.to_dict() for c in self.components],
        }
        if self.remote_endpoint is not None:
            d["remote_endpoint"] = self.remote_endpoint
        return d

    @classmethod
    def from_dict(cls, data) -> "LibraryDescriptor":
        if not isinstance(data, dict):
            raise ValidationError("library document: expected a JSON object")
        allowed = {"library_id", "organization", "environment", "components", "remote_endpoint"}
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"library document: unknown field {sorted(unknown)[0]!r}")
        for key in ("library_id", "organization", "environment"):
            if key not in data:
                raise ValidationError(f"library document: missing field {key!r}")
        raw_components = data.get("components", [])
        if not isinstance(raw_components, list):
            raise ValidationError("library document: 'components' must be a list")
        components = [ComponentRecord.from_dict(c, f"components[{i}]") for i, c in enumerate(raw_components)]
        return cls(
            data["library_id"],
            data["organization"],
            data["environment"],
            tuple(components),
            data.get("remote_endpoint"),
        )


def _read_json(path, what):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {what} {str(path)!r}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_library(path) -> LibraryDescriptor:
    return LibraryDescriptor.from_dict(_read_json(path, "library file"))


@dataclass(frozen=True)
class WeightTable:
    weights: Mapping[OrganizationType, float]

    def __post_init__(self):
        table = {}
        for key, value in dict(self.weights).items():
            table[_enum(OrganizationType, key, "weight table key")] = check_weight(value)
        missing = [o.value for o in OrganizationType if o not in table]
        if missing:
            raise ValidationError(f"weight table is missing {', '.join(missing)}")
        object.__setattr__(self, "weights", table)

    def to_dict(self) -> dict:
        return {o.value: self.weights[o] for o in OrganizationType}

    @classmethod
    def from_dict(cls, data) -> "WeightTable":
        if not isinstance(data, dict):
            raise ValidationError("weight table: expected a JSON object")
        return cls(data)


DEFAULT_WEIGHTS = WeightTable(
    {
        OrganizationType.SEARCH_BASED: 3.0,
        OrganizationType.DROPDOWN_LIST: 2.0,
        OrganizationType.HIERARCHICAL: 1.0,
    }
)


def load_weights(path) -> WeightTable:
    return WeightTable.from_dict(_read_json(path, "weight file"))


def default_weights() -> WeightTable:
    """Built-in 3/2/1 table, unless ``$CAQ_DEFAULT_WEIGHTS`` names a weight file."""
    path = os.environ.get(WEIGHTS_ENV)
    if path:
        return load_weights(path)
    return DEFAULT_WEIGHTS


def organizedness_weight(table: WeightTable, org: OrganizationType) -> float:
    return table.weights[OrganizationType(org)]


@dataclass(frozen=True)
class LookupOutcome:
    found: bool
    raw_elapsed: float
    resolved: Optional[ComponentRecord] = None


@dataclass(frozen=True)
class TimingConfig:
    trials: int = 20
    warmups: int = 3
    statistic: str = "median"

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.warmups, bool) or not isinstance(self.warmups, int) or self.warmups < 0:
            raise ValidationError(f"warmups must be a non-negative integer, got {self.warmups!r}")
        if self.statistic != "median":
            raise ValidationError(f"unsupported timing statistic {self.statistic!r}")

    def to_dict(self) -> dict:
        return {"trials": self.trials, "warmups": self.warmups, "statistic": self.statistic}


@dataclass(frozen=True)
class AccessMeasurement:
    component_name: str
    per_trial: tuple
    t: float
    found: bool
    resolved: Optional[ComponentRecord] = field(default=None, compare=False)


class LookupBackend:
    """Resolves component names for one library. Immutable after construction."""

    organization: OrganizationType

    def __init__(self, descriptor: LibraryDescriptor):
        self.descriptor = descriptor

    def resolve(self, name: str) -> Optional[ComponentRecord]:
        raise NotImplementedError

    def lookup(self, name: str) -> LookupOutcome:
        if not isinstance(name, str) or not name:
            raise ValidationError(f"component name must be a non-empty string, got {name!r}")
        start = time.perf_counter()
        record = self.resolve(name)
        elapsed = time.perf_counter() - start
        return LookupOutcome(record is not None, elapsed, record)

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SearchIndexBackend(LookupBackend):
    """Exact-name index built once up front."""

    organization = OrganizationType.SEARCH_BASED

    def __init__(self, descriptor):
        super().__init__(descriptor)
        self.index = {c.name: c for c in descriptor.components}

    def resolve(self, name):
        return self.index.get(name)


class DropdownListBackend(LookupBackend):
    """Flat list ordered by name; the caller scans it until the name matches."""

    organization = OrganizationType.DROPDOWN_LIST

    def __init__(self, descriptor):
        super().__init__(descriptor)
        self.entries = tuple(sorted(descriptor.components, key=lambda c: c.name))

    def resolve(self, name):
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None


class _Folder:
    __slots__ = ("children", "leaves")

    def __init__(self):
        self.children = {}
        self.leaves = []


class HierarchicalBackend(LookupBackend):
    """Category tree built from component paths.

    Lookups know only the name, so they walk the tree folder by folder,
    depth first in segment order, checking each folder's own components.
    """

    organization = OrganizationType.HIERARCHICAL

    def __init__(self, descriptor):
        super().__init__(descriptor)
        self.root = _Folder()
        for c in descriptor.components:
            node = self.root
            for seg in c.path:
                node = node.children.setdefault(seg, _Folder())
            node.leaves.append(c)
        self._freeze(self.root)

    def _freeze(self, node):
        node.leaves = tuple(sorted(node.leaves, key=lambda c: c.name))
        node.children = tuple(node.children[k] for k in sorted(node.children))
        for child in node.children:
            self._freeze(child)

    def resolve(self, name):
        stack = [self.root]
        while stack:
            node = stack.pop()
            for leaf in node.leaves:
                if leaf.name == name:
                    return leaf
            stack.extend(reversed(node.children))
        return None


class RemoteBackend(LookupBackend):
    """Client for the registry protocol: ``GET {endpoint}/components/{name}``.

    200 means found, 404 means absent; anything else, or a network failure,
    raises TransportError. ``connection_limit`` caps concurrent connections
    to the endpoint so parallel measurements do not distort each other.
    """

    def __init__(self, descriptor, timeout=5.0, connection_limit=1):
        super().__init__(descriptor)
        self.organization = descriptor.organization
        self.endpoint = descriptor.remote_endpoint
        limits = httpx.Limits(max_connections=connection_limit, max_keepalive_connections=connection_limit)
        self._client = httpx.Client(timeout=timeout, limits=limits)

    def resolve(self, name):
        url = f"{self.endpoint}/components/{quote(name, safe='')}"
        try:
            resp = self._client.get(url)
        except httpx.HTTPError as exc:
            raise TransportError(f"GET {url} failed: {exc}") from exc
        if resp.status_code == 404:
            return None
        if resp.status_code != 200:
            raise TransportError(f"GET {url} returned unexpected status {resp.status_code}")
        try:
            record = ComponentRecord.from_dict(resp.json(), "registry response")
        except (ValueError, ValidationError) as exc:
            raise TransportError(f"GET {url} returned a malformed body: {exc}") from exc
        if record.name != name:
            raise TransportError(f"GET {url} answered for {record.name!r} instead of {name!r}")
        return record

    def close(self):
        self._client.close()


_LOCAL_BACKENDS = {
    OrganizationType.HIERARCHICAL: HierarchicalBackend,
    OrganizationType.SEARCH_BASED: SearchIndexBackend,
    OrganizationType.DROPDOWN_LIST: DropdownListBackend,
}


def build_backend(descriptor: LibraryDescriptor, *, timeout=5.0, connection_limit=1) -> LookupBackend:
    if descriptor.environment.is_remote:
        return RemoteBackend(descriptor, timeout=timeout, connection_limit=connection_limit)
    return _LOCAL_BACKENDS[descriptor.organization](descriptor)


def build_local_backend(descriptor: LibraryDescriptor) -> LookupBackend:
    """Backend over the descriptor's own components, ignoring its environment."""
    return _LOCAL_BACKENDS[descriptor.organization](descriptor)


def lookup(backend: LookupBackend, name: str) -> LookupOutcome:
    return backend.lookup(name)


def availability(backend: LookupBackend, name: str) -> int:
    return 1 if backend.lookup(name).found else 0


def summarize_trials(per_trial) -> float:
    """Median of the recorded trials, raised to the clock floor."""
    if not per_trial:
        raise ValidationError("at least one timing trial is required")
    return clamp_time(statistics.median(per_trial))


def measure_access(backend: LookupBackend, name: str, cfg: TimingConfig = TimingConfig(),
                   sentinel: Optional[float] = None) -> AccessMeasurement:
    """Time ``cfg.trials`` lookups of ``name`` after ``cfg.warmups`` discarded ones.

    With ``sentinel`` set, lookups still run (so the verdict is real) but every
    trial is recorded as exactly ``sentinel`` seconds.
    """
    for _ in range(cfg.warmups):
        backend.lookup(name)
    outcomes = [backend.lookup(name) for _ in range(cfg.trials)]
    verdicts = {o.found for o in outcomes}
    if len(verdicts) != 1:
        raise NondeterministicLookupError(f"lookups of {name!r} disagreed across {cfg.trials} trials")
    if sentinel is None:
        per_trial = tuple(o.raw_elapsed for o in outcomes)
    else:
        per_trial = (float(sentinel),) * cfg.trials
    found = verdicts.pop()
    log.debug("measured %r: found=%s trials=%d", name, found, cfg.trials)
    return AccessMeasurement(name, per_trial, summarize_trials(per_trial), found, outcomes[-1].resolved)
