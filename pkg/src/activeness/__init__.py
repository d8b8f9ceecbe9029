"""Readiness metrics for component libraries and software projects."""

from .errors import (
    ActivenessError,
    EvaluationAborted,
    NondeterministicLookupError,
    TransportError,
    ValidationError,
)
from .lookup import (
    DEFAULT_WEIGHTS,
    AccessMeasurement,
    ComponentRecord,
    EnvironmentType,
    LibraryDescriptor,
    LookupOutcome,
    OrganizationType,
    TimingConfig,
    WeightTable,
    availability,
    build_backend,
    load_library,
    lookup,
    measure_access,
    organizedness_weight,
)
from .metrics import (
    PersonSkills,
    ReadinessClass,
    compute_aq,
    compute_caq,
    compute_mq,
    compute_rq,
    interpret_aq,
    to_percent,
)
from .readiness import (
    AqResult,
    ReadinessManifest,
    derive_counts,
    evaluate_readiness,
    parse_manifest,
    serialize_manifest,
)
from .registry import run_mock_registry
from .reporting import (
    CaqRow,
    LibraryReport,
    QuerySet,
    Ranking,
    compare_libraries,
    evaluate_library,
    render_report,
)

__version__ = "0.1.0"
