"""Python bindings for the hetfair C++ core."""

from ._hetfair import (
    ConfigError,
    Graph,
    HomophilyProfile,
    accuracy,
    equal_opportunity,
    expected_edge_count,
    f1_binary,
    generate,
    global_homophily,
    homophily_profile,
    ingest,
    khop_subgraph_edges,
    local_homophily,
    make_splits,
    read_bundle,
    run_sweep,
    statistical_parity,
    stratified_report,
    train,
)

__all__ = [
    "ConfigError",
    "Graph",
    "HomophilyProfile",
    "accuracy",
    "equal_opportunity",
    "expected_edge_count",
    "f1_binary",
    "generate",
    "global_homophily",
    "homophily_profile",
    "ingest",
    "khop_subgraph_edges",
    "local_homophily",
    "make_splits",
    "read_bundle",
    "run_sweep",
    "statistical_parity",
    "stratified_report",
    "train",
]
