"""Bounded variation, tameness and Helly-type selection on finite linear orders."""

__version__ = "0.1.0"

from .order import (  # noqa: E402
    Chain,
    FiniteMetricSpace,
    FinitePoset,
    FiniteTopology,
    PosetChainMap,
    interval_topology,
    is_closed_order,
    order_separate,
    separating_family,
    validate_topology,
)
from .variation import (  # noqa: E402
    ChainFunction,
    FunctionFamily,
    MetricChainFunction,
    is_bv_r,
    jordan_decompose,
    lipschitz_separators,
    metric_variation,
    restricted_variation,
    variation,
)

__all__ = [
    "Chain", "FiniteMetricSpace", "FinitePoset", "FiniteTopology", "PosetChainMap",
    "interval_topology", "is_closed_order", "order_separate", "separating_family",
    "validate_topology", "ChainFunction", "FunctionFamily", "MetricChainFunction",
    "is_bv_r", "jordan_decompose", "lipschitz_separators", "metric_variation",
    "restricted_variation", "variation",
]
