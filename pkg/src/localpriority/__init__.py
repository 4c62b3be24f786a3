"""Workbench for constrained object allocation via local priority mechanisms:
run the algorithm, construct canonical mechanisms as compromiser assignments,
verify axioms by exact brute force, and enumerate consistent assignments."""

from .core import (
    CompromiserAssignment,
    Constraint,
    Instance,
    MalformedAssignmentError,
    ScaleLimitError,
    Suballocation,
    contours,
    diff,
    extend,
    house_constraint,
    make_alpha,
    one_sided_constraint,
    profiles_with_tops,
    project,
    school_constraint,
    social_constraint,
    tau,
    two_sided_constraint,
)
from .engine import (
    Exhausted,
    Final,
    MechanismTable,
    NotImplementableError,
    Trace,
    find_exhausting_profile,
    is_implementable,
    is_truncation,
    marginal,
    mechanism_difference,
    mechanisms_equal,
    rank_vector,
    run_lp,
    tabulate,
    tabulate_function,
)

__all__ = [
    "CompromiserAssignment",
    "Constraint",
    "Exhausted",
    "Final",
    "Instance",
    "MalformedAssignmentError",
    "MechanismTable",
    "NotImplementableError",
    "ScaleLimitError",
    "Suballocation",
    "Trace",
    "contours",
    "diff",
    "extend",
    "find_exhausting_profile",
    "house_constraint",
    "is_implementable",
    "is_truncation",
    "make_alpha",
    "marginal",
    "mechanism_difference",
    "mechanisms_equal",
    "one_sided_constraint",
    "profiles_with_tops",
    "project",
    "rank_vector",
    "run_lp",
    "school_constraint",
    "social_constraint",
    "tabulate",
    "tabulate_function",
    "tau",
    "two_sided_constraint",
]
