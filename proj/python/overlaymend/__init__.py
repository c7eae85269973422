"""Deterministic simulation of self-healing unstructured overlay networks.

The heavy lifting lives in the compiled ``_core`` module; this package
re-exports its public names.
"""

from ._core import (
    AggregateSeries,
    ConfigError,
    ExecutionReport,
    FailResult,
    FailureClass,
    LivelockError,
    METRIC_FIELDS,
    MetricsRecord,
    Mode,
    NodeState,
    OverlayGraph,
    ProtocolConfig,
    Rng,
    RunManifest,
    Scenario,
    ScenarioConfig,
    SecondNeighborView,
    TopologyKind,
    __version__,
    aggregate,
    classify_after_failure,
    components,
    components_union_find,
    execute,
    gen_clustered,
    gen_random,
    gen_uniform,
    generate,
    isolated_count,
    join_clustered,
    join_targets_clustered,
    join_targets_random,
    join_targets_uniform,
    join_uniform,
    main_component_fraction,
    parse_manifest,
    rebuild_second_view,
    render_manifest,
    run_scenario,
    second_neighbors,
)

__all__ = [
    "AggregateSeries",
    "ConfigError",
    "ExecutionReport",
    "FailResult",
    "FailureClass",
    "LivelockError",
    "METRIC_FIELDS",
    "MetricsRecord",
    "Mode",
    "NodeState",
    "OverlayGraph",
    "ProtocolConfig",
    "Rng",
    "RunManifest",
    "Scenario",
    "ScenarioConfig",
    "SecondNeighborView",
    "TopologyKind",
    "__version__",
    "aggregate",
    "classify_after_failure",
    "components",
    "components_union_find",
    "execute",
    "gen_clustered",
    "gen_random",
    "gen_uniform",
    "generate",
    "isolated_count",
    "join_clustered",
    "join_targets_clustered",
    "join_targets_random",
    "join_targets_uniform",
    "join_uniform",
    "main_component_fraction",
    "parse_manifest",
    "rebuild_second_view",
    "render_manifest",
    "run_scenario",
    "second_neighbors",
]
