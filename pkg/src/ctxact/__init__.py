"""Context-aware device selection that learns from user feedback."""

from .context import (
    Attribute,
    Kind,
    Schema,
    SchemaError,
    Snapshot,
    categorical,
    cyclic,
    elem_contains,
    elem_distance,
    numeric,
    snapshot_distance,
    uniform_weights,
    vector,
)
from .decider import (
    Decider,
    DecisionEpisode,
    DeviceEntry,
    EmptyRegistryError,
    EpisodeStateError,
    EpisodeStatus,
    ExternalController,
    Registry,
    RegistryError,
)
from .harness import (
    EpisodeRecord,
    LatencySummary,
    MetricsError,
    MetricsReport,
    NearestDeviceBaseline,
    ReplayError,
    build_report,
    compute_afr,
    compute_fda,
    measure_latency,
    read_csv_rows,
    replay,
    sliding_fda,
    summary_json,
    within_two_rate,
    write_csv,
)
from .ingest import (
    ContextStream,
    IngestError,
    RawEvent,
    ScenarioConfig,
    SensorMap,
    Trace,
    TraceParseError,
    TraceRecord,
    default_scenario,
    generate_synthetic_scenario,
    inject_swap,
    parse_event_log,
    read_trace,
    write_trace,
)
from .model import (
    DeviceLocalModel,
    FeedbackEntry,
    Hyperparameters,
    Proposal,
    Request,
    State,
    candidate_splits,
    sigmoid_reward,
    state_entropy,
)

__all__ = [
    "Attribute",
    "Kind",
    "Schema",
    "SchemaError",
    "Snapshot",
    "categorical",
    "cyclic",
    "numeric",
    "vector",
    "elem_contains",
    "elem_distance",
    "snapshot_distance",
    "uniform_weights",
    "DeviceLocalModel",
    "FeedbackEntry",
    "Hyperparameters",
    "Proposal",
    "Request",
    "State",
    "candidate_splits",
    "sigmoid_reward",
    "state_entropy",
    "Decider",
    "DecisionEpisode",
    "DeviceEntry",
    "EmptyRegistryError",
    "EpisodeStateError",
    "EpisodeStatus",
    "ExternalController",
    "Registry",
    "RegistryError",
    "ContextStream",
    "IngestError",
    "RawEvent",
    "ScenarioConfig",
    "SensorMap",
    "Trace",
    "TraceParseError",
    "TraceRecord",
    "default_scenario",
    "generate_synthetic_scenario",
    "inject_swap",
    "parse_event_log",
    "read_trace",
    "write_trace",
    "EpisodeRecord",
    "LatencySummary",
    "MetricsError",
    "MetricsReport",
    "NearestDeviceBaseline",
    "ReplayError",
    "build_report",
    "compute_afr",
    "compute_fda",
    "measure_latency",
    "read_csv_rows",
    "replay",
    "sliding_fda",
    "summary_json",
    "within_two_rate",
    "write_csv",
]
