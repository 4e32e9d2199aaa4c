"""Green-function analysis of partially homogeneous quarter-plane random walks.

The package computes, for a random walk on Z_+^2 driven by four finitely
supported jump measures (interior, horizontal axis, vertical axis, origin):

* the kernel branches and the geometry of the set {P <= 1},
* an eight-way classification of the parameter space,
* dominant singularities of the Green generating functions,
* exact truncated Green-function tables with certified error bounds,
* the harmonic-function and asymptotic constants describing the decay of the
  Green function along the axes and along interior directions,
* Martin-kernel ratio predictions,

together with a command-line harness that validates, classifies, tabulates
and cross-checks a model end to end.
"""

from __future__ import annotations

from .model import (
    InvalidModel,
    JumpMeasure,
    NonStochasticBoundary,
    RecurrenceResult,
    WalkModel,
    classify_recurrence,
    dump_model,
    load_model,
    parse_model,
    validate_model,
)
from .kernel_geometry import (
    BranchPoint,
    DirectionPartition,
    KernelGeometry,
    NotOnBoundary,
    RegionResult,
    UnsupportedRegion,
)
from .green_oracle import GreenTable, GreenOracle, NoCertificate, OutsideDomain

__all__ = [
    "InvalidModel",
    "JumpMeasure",
    "NonStochasticBoundary",
    "RecurrenceResult",
    "WalkModel",
    "classify_recurrence",
    "dump_model",
    "load_model",
    "parse_model",
    "validate_model",
    "BranchPoint",
    "DirectionPartition",
    "KernelGeometry",
    "NotOnBoundary",
    "RegionResult",
    "UnsupportedRegion",
    "GreenTable",
    "GreenOracle",
    "NoCertificate",
    "OutsideDomain",
]
