"""Multiplierless CORDIC-based approximation of the 8-point DCT.

Transforms are explicit shift-add flow graphs (:mod:`cordicdct.flowgraph`)
that can be evaluated in real or two's-complement arithmetic and priced in
adders, shifts, inverters and critical-path delay.
"""

__version__ = "0.1.0"

from .cordic import Microrotation, RotationPlan, paired_search, search_atr  # noqa: E402
from .dct8 import FixedPointConfig, ScaledTransform, Variant, build, dct2_matrix_exact  # noqa: E402
from .flowgraph import CostReport, DelayModel, FlowGraph, GraphBuilder, cost_report  # noqa: E402
from .fxp import FxpFormat, FxpValue, Overflow  # noqa: E402

__all__ = [
    "CostReport",
    "DelayModel",
    "FixedPointConfig",
    "FlowGraph",
    "FxpFormat",
    "FxpValue",
    "GraphBuilder",
    "Microrotation",
    "Overflow",
    "RotationPlan",
    "ScaledTransform",
    "Variant",
    "build",
    "cost_report",
    "dct2_matrix_exact",
    "paired_search",
    "search_atr",
]
