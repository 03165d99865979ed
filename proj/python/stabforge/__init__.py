"""Workbench for silent self-stabilizing history-replay systems."""

from stabforge._stabforge import (
    Graph,
    fuzz,
    generate_graph,
    instances,
    load_graph,
    oracle,
    rollback_lower_bound,
    run,
)

__all__ = [
    "Graph",
    "fuzz",
    "generate_graph",
    "instances",
    "load_graph",
    "oracle",
    "rollback_lower_bound",
    "run",
]
