"""Compensation-aware bundle offering to occasional drivers.

Column generation with a labeling pricing algorithm, a MILP heuristic and
an enumeration step that proves optimality, plus benchmark tooling.
"""

from __future__ import annotations

from .model import (
    Bundle,
    DepotSpec,
    DriverSpec,
    Instance,
    Offer,
    Point,
    Solution,
    TaskSpec,
    load_instance,
    load_solution,
    save_instance,
    save_solution,
    validate_solution,
)
from .probability import BehaviorCoefficients, PredictorVector, price_offer

__all__ = [
    "BehaviorCoefficients",
    "Bundle",
    "DepotSpec",
    "DriverSpec",
    "Instance",
    "Offer",
    "Point",
    "PredictorVector",
    "Solution",
    "TaskSpec",
    "load_instance",
    "load_solution",
    "price_offer",
    "save_instance",
    "save_solution",
    "validate_solution",
]

__version__ = "0.1.0"
