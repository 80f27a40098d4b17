"""Planning-instance domain model: types, validation, unit conversion."""
from .per_unit import AlreadyNormalized, from_per_unit, to_per_unit
from .types import (FLEX_CEILING, FLEX_FLOOR, HOURS, GeneratorAsset,
                    GeneratorKind, GridInterface, LineAsset, LoadSpec, Node,
                    PlanningInstance, RepresentativeDay, SecurityLimits,
                    ValidationReport)
from .validate import validate_instance

__all__ = [
    "HOURS",
    "FLEX_FLOOR",
    "FLEX_CEILING",
    "Node",
    "LineAsset",
    "GeneratorAsset",
    "GeneratorKind",
    "LoadSpec",
    "GridInterface",
    "SecurityLimits",
    "RepresentativeDay",
    "PlanningInstance",
    "ValidationReport",
    "validate_instance",
    "AlreadyNormalized",
    "to_per_unit",
    "from_per_unit",
]
