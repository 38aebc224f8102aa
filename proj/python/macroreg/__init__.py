"""Grid macro placement and regulation."""

from ._macroreg import (
    Env,
    Netlist,
    evaluate,
    gen_synthetic,
    greedy_place,
    overlap_free,
    parse_bundle,
    run_greedy,
    scale_netlist,
)

__all__ = [
    "Env",
    "Netlist",
    "evaluate",
    "gen_synthetic",
    "greedy_place",
    "overlap_free",
    "parse_bundle",
    "run_greedy",
    "scale_netlist",
]
