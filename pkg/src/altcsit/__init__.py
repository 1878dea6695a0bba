"""Secure degrees of freedom of the two-user MISO broadcast channel under alternating CSIT."""

from .composer import (
    Allocation,
    AllocationEntry,
    CornerTarget,
    achieved_point,
    applicable_targets,
    classify,
    compose_corner,
    compose_point,
    feasible,
    synergy_gap,
)
from .region import (
    fixed_state_region,
    membership,
    min_csit,
    region_inequalities,
    region_vertices,
    security_cost,
    sum_sdof,
)
from .schemes import SchemeId, SchemePlan, build_plan, catalog, catalog_entry, validate_csit
from .states import CsitState, EnhancementRule, StatePmf, enhance, marginals, pmf, validate_pmf

__all__ = [
    "Allocation", "AllocationEntry", "CornerTarget", "CsitState", "EnhancementRule", "SchemeId",
    "SchemePlan", "StatePmf", "achieved_point", "applicable_targets", "build_plan", "catalog",
    "catalog_entry", "classify", "compose_corner", "compose_point", "enhance", "feasible",
    "fixed_state_region", "marginals", "membership", "min_csit", "pmf", "region_inequalities",
    "region_vertices", "security_cost", "sum_sdof", "synergy_gap", "validate_csit", "validate_pmf",
]
