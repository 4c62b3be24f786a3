"""Ground types for constrained allocation: instances, allocations, preferences,
constraints, and compromiser assignments.

Agents and objects carry string names at the file/CLI boundary; everything
internal is index-based. An allocation is a tuple of object indices (one per
agent) and is canonically identified with its mixed-radix integer code, agent 0
least significant. Sets of allocations are sets of codes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

# A preference is a ranking of all object indices, best first.
Preference = tuple[int, ...]
# A profile is one preference per agent.
Profile = tuple[Preference, ...]
# An allocation as an explicit assignment: object index per agent index.
Assignment = tuple[int, ...]

# Exhaustive sweeps are only meaningful at desk scale.
MAX_ALLOCATION_SPACE = 2**24
DEFAULT_PROFILE_BUDGET = 2_000_000


class ScaleLimitError(ValueError):
    """Instance or sweep exceeds the desk-scale guardrail."""


class MalformedAssignmentError(ValueError):
    """A compromiser assignment has a missing or empty cell where one is required."""


@dataclass(frozen=True)
class Instance:
    """A set of named agents and a shared universe of named objects."""

    agents: tuple[str, ...]
    objects: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.agents or not self.objects:
            raise ValueError("need at least one agent and one object")
        if len(set(self.agents)) != len(self.agents):
            raise ValueError("agent names must be unique")
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("object names must be unique")
        if len(self.objects) ** len(self.agents) > MAX_ALLOCATION_SPACE:
            raise ScaleLimitError(
                f"allocation space {len(self.objects)}^{len(self.agents)} "
                f"exceeds guardrail {MAX_ALLOCATION_SPACE}"
            )

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.objects)

    @property
    def num_allocations(self) -> int:
        return self.m**self.n

    @property
    def num_profiles(self) -> int:
        return math.factorial(self.m) ** self.n

    def encode(self, assignment: Sequence[int]) -> int:
        """Mixed-radix code of an assignment, agent 0 least significant."""
        if len(assignment) != self.n:
            raise ValueError(f"assignment length {len(assignment)} != {self.n} agents")
        code = 0
        for i in reversed(range(self.n)):
            obj = assignment[i]
            if not 0 <= obj < self.m:
                raise ValueError(f"invalid object index {obj}")
            code = code * self.m + obj
        return code

    def decode(self, code: int) -> Assignment:
        if not 0 <= code < self.num_allocations:
            raise ValueError(f"allocation code {code} out of range")
        out = []
        for _ in range(self.n):
            code, obj = divmod(code, self.m)
            out.append(obj)
        return tuple(out)

    def all_assignments(self) -> Iterator[Assignment]:
        """All m^n assignments in increasing code order."""
        for code in range(self.num_allocations):
            yield self.decode(code)

    def agent_index(self, name: str) -> int:
        try:
            return self.agents.index(name)
        except ValueError:
            raise ValueError(f"unknown agent name {name!r}") from None

    def object_index(self, name: str) -> int:
        try:
            return self.objects.index(name)
        except ValueError:
            raise ValueError(f"unknown object name {name!r}") from None

    def assignment_names(self, assignment: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.objects[o] for o in assignment)

    def all_preferences(self) -> tuple[Preference, ...]:
        """All m! strict rankings in lexicographic order."""
        return tuple(itertools.permutations(range(self.m)))

    def all_profiles(self) -> Iterator[Profile]:
        """All (m!)^n profiles, lexicographic by per-agent permutation rank."""
        prefs = self.all_preferences()
        return itertools.product(prefs, repeat=self.n)

    def check_profile_budget(self, budget: int = DEFAULT_PROFILE_BUDGET) -> None:
        if self.num_profiles > budget:
            raise ScaleLimitError(
                f"profile sweep of size {self.num_profiles} exceeds budget {budget}"
            )


@dataclass(frozen=True)
class Suballocation:
    """An allocation restricted to a subset of agents (possibly empty)."""

    agents: tuple[int, ...]
    objects: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.agents) != len(self.objects):
            raise ValueError("agents and objects must align")
        if tuple(sorted(self.agents)) != self.agents or len(set(self.agents)) != len(
            self.agents
        ):
            raise ValueError("agents must be sorted and distinct")

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> Suballocation:
        agents = tuple(sorted(mapping))
        return cls(agents, tuple(mapping[i] for i in agents))

    def as_mapping(self) -> dict[int, int]:
        return dict(zip(self.agents, self.objects))


@dataclass(frozen=True)
class Constraint:
    """A nonempty set of feasible allocations, stored as codes, plus the
    generator tag it was built from (for regeneration identity checks)."""

    instance: Instance
    feasible: frozenset[int]
    generator: tuple = ("explicit",)

    def __post_init__(self) -> None:
        if not self.feasible:
            raise ValueError("constraint must be nonempty")
        top = self.instance.num_allocations
        for code in self.feasible:
            if not 0 <= code < top:
                raise ValueError(f"feasible code {code} out of range")

    def is_feasible(self, code: int) -> bool:
        return code in self.feasible

    def infeasible_codes(self) -> list[int]:
        return [c for c in range(self.instance.num_allocations) if c not in self.feasible]

    def feasible_codes(self) -> list[int]:
        return sorted(self.feasible)


def house_constraint(instance: Instance) -> Constraint:
    """All-distinct assignments (school choice with unit capacities)."""
    feas = frozenset(
        instance.encode(a)
        for a in instance.all_assignments()
        if len(set(a)) == instance.n
    )
    if not feas:
        raise ValueError("house constraint empty: need at least as many objects as agents")
    return Constraint(instance, feas, ("house",))


def school_constraint(instance: Instance, capacities: Sequence[int]) -> Constraint:
    """Per-object capacity caps; requires sum of capacities >= n."""
    if len(capacities) != instance.m:
        raise ValueError("one capacity per object required")
    if any(q < 0 for q in capacities):
        raise ValueError("capacities must be nonnegative")
    if sum(capacities) < instance.n:
        raise ValueError("capacities sum below the number of agents")
    feas = []
    for code in range(instance.num_allocations):
        a = instance.decode(code)
        if all(a.count(obj) <= capacities[obj] for obj in set(a)):
            feas.append(code)
    return Constraint(instance, frozenset(feas), ("school", tuple(capacities)))


def social_constraint(instance: Instance) -> Constraint:
    """All agents receive the same object (Arrovian social choice)."""
    feas = frozenset(
        instance.encode((obj,) * instance.n) for obj in range(instance.m)
    )
    return Constraint(instance, feas, ("social",))


def _require_objects_are_agents(instance: Instance) -> None:
    if instance.objects != instance.agents:
        raise ValueError("matching constraints need objects identical to agents")


def one_sided_constraint(instance: Instance) -> Constraint:
    """Roommates: mu(mu(i)) = i, self-match means unmatched."""
    _require_objects_are_agents(instance)
    feas = []
    for code in range(instance.num_allocations):
        a = instance.decode(code)
        if all(a[a[i]] == i for i in range(instance.n)):
            feas.append(code)
    return Constraint(instance, frozenset(feas), ("one_sided",))


def two_sided_constraint(
    instance: Instance, men: Iterable[str], women: Iterable[str]
) -> Constraint:
    """Marriage matching: involution plus cross-side restrictions."""
    _require_objects_are_agents(instance)
    men_idx = frozenset(instance.agent_index(x) for x in men)
    women_idx = frozenset(instance.agent_index(x) for x in women)
    if men_idx & women_idx or men_idx | women_idx != set(range(instance.n)):
        raise ValueError("men and women must partition the agents")
    feas = []
    for code in range(instance.num_allocations):
        a = instance.decode(code)
        ok = all(a[a[i]] == i for i in range(instance.n))
        ok = ok and all(a[i] in women_idx or a[i] == i for i in men_idx)
        ok = ok and all(a[j] in men_idx or a[j] == j for j in women_idx)
        if ok:
            feas.append(code)
    return Constraint(
        instance, frozenset(feas), ("two_sided", tuple(sorted(men_idx)), tuple(sorted(women_idx)))
    )


def regenerate(constraint: Constraint) -> Constraint:
    """Rebuild a constraint from its generator tag."""
    kind = constraint.generator[0]
    inst = constraint.instance
    if kind == "house":
        return house_constraint(inst)
    if kind == "school":
        return school_constraint(inst, constraint.generator[1])
    if kind == "social":
        return social_constraint(inst)
    if kind == "one_sided":
        return one_sided_constraint(inst)
    if kind == "two_sided":
        men = [inst.agents[i] for i in constraint.generator[1]]
        women = [inst.agents[i] for i in constraint.generator[2]]
        return two_sided_constraint(inst, men, women)
    return Constraint(inst, constraint.feasible, constraint.generator)


@dataclass(frozen=True)
class CompromiserAssignment:
    """Map from every infeasible allocation code to a nonempty set of agents.

    Feasible allocations implicitly map to the empty set.
    """

    constraint: Constraint
    cells: Mapping[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        inst = self.constraint.instance
        feasible = self.constraint.feasible
        for code, agents in self.cells.items():
            if not 0 <= code < inst.num_allocations:
                raise MalformedAssignmentError(f"cell code {code} out of range")
            if code in feasible:
                raise MalformedAssignmentError(
                    f"cell on feasible allocation {inst.assignment_names(inst.decode(code))}"
                )
            if not agents:
                raise MalformedAssignmentError(
                    f"empty cell at {inst.assignment_names(inst.decode(code))}"
                )
            if any(not 0 <= i < inst.n for i in agents):
                raise MalformedAssignmentError(f"invalid agent index in cell {code}")
        for code in range(inst.num_allocations):
            if code not in feasible and code not in self.cells:
                raise MalformedAssignmentError(
                    f"missing cell at infeasible {inst.assignment_names(inst.decode(code))}"
                )

    @property
    def instance(self) -> Instance:
        return self.constraint.instance

    def cell(self, code: int) -> frozenset[int]:
        return self.cells.get(code, frozenset())

    def is_subset_of(self, other: CompromiserAssignment) -> bool:
        """Pointwise cell inclusion (constraints may differ)."""
        top = self.instance.num_allocations
        if top != other.instance.num_allocations:
            return False
        return all(self.cell(c) <= other.cell(c) for c in range(top))

    def union(self, other: CompromiserAssignment) -> CompromiserAssignment:
        """Pointwise union; requires identical constraints."""
        if self.constraint.feasible != other.constraint.feasible:
            raise ValueError("pointwise union needs a common constraint")
        cells = {
            code: self.cells[code] | other.cells[code] for code in self.cells
        }
        return CompromiserAssignment(self.constraint, cells)


def make_alpha(
    constraint: Constraint, cells: Mapping[int, Iterable[int]]
) -> CompromiserAssignment:
    """Build a compromiser assignment from any {code: agents} mapping."""
    return CompromiserAssignment(
        constraint, {code: frozenset(agents) for code, agents in cells.items()}
    )


def contours(pref: Preference, obj: int) -> tuple[frozenset[int], frozenset[int]]:
    """Strict lower and upper contour sets of an object under a ranking."""
    try:
        pos = pref.index(obj)
    except ValueError:
        raise ValueError(f"object {obj} not ranked") from None
    return frozenset(pref[pos + 1 :]), frozenset(pref[:pos])


def tau(x: Preference | Profile, k: int) -> int | Assignment:
    """k-th top choice (1-based) of a preference, or the k-th-choice vector of
    a profile."""
    if not x:
        raise ValueError("empty preference or profile")
    if isinstance(x[0], tuple):
        return tuple(pref[_tau_check(pref, k)] for pref in x)
    return x[_tau_check(x, k)]


def _tau_check(pref: Sequence[int], k: int) -> int:
    if not 1 <= k <= len(pref):
        raise ValueError(f"rank {k} out of range 1..{len(pref)}")
    return k - 1


def diff(x: Sequence[int], y: Sequence[int]) -> frozenset[int]:
    """Agents whose objects differ between two allocations."""
    if len(x) != len(y):
        raise ValueError("allocations must be over the same instance")
    return frozenset(i for i in range(len(x)) if x[i] != y[i])


def project(constraint: Constraint, agents: Iterable[int]) -> set[Suballocation]:
    """Restrictions of the feasible allocations to a subset of agents."""
    inst = constraint.instance
    subset = tuple(sorted(set(agents)))
    if any(not 0 <= i < inst.n for i in subset):
        raise ValueError("agent index out of range")
    out = set()
    for code in constraint.feasible:
        a = inst.decode(code)
        out.add(Suballocation(subset, tuple(a[i] for i in subset)))
    return out


def extend(constraint: Constraint, nu: Suballocation) -> set[int]:
    """Codes of all feasible complete extensions of a suballocation (possibly
    empty)."""
    inst = constraint.instance
    if any(not 0 <= i < inst.n for i in nu.agents):
        raise ValueError("agent index out of range")
    fixed = nu.as_mapping()
    out = set()
    for code in constraint.feasible:
        a = inst.decode(code)
        if all(a[i] == obj for i, obj in fixed.items()):
            out.add(code)
    return out


def profiles_with_tops(instance: Instance, mu: Sequence[int]) -> Iterator[Profile]:
    """All ((m-1)!)^n profiles whose top-choice vector equals mu, in canonical
    lexicographic order."""
    if len(mu) != instance.n:
        raise ValueError("top vector must assign one object per agent")
    per_agent: list[list[Preference]] = []
    for i in range(instance.n):
        top = mu[i]
        if not 0 <= top < instance.m:
            raise ValueError(f"invalid object index {top}")
        rest = [o for o in range(instance.m) if o != top]
        per_agent.append([(top, *tail) for tail in itertools.permutations(rest)])
    return itertools.product(*per_agent)


@lru_cache(maxsize=64)
def preference_ranks(instance: Instance) -> dict[Preference, int]:
    """Rank of each strict ranking in the canonical lexicographic order."""
    return {p: r for r, p in enumerate(instance.all_preferences())}


def profile_index(instance: Instance, profile: Profile, ranks: Mapping[Preference, int] | None = None) -> int:
    """Canonical dense index of a profile (agent 0 most significant)."""
    if ranks is None:
        ranks = preference_ranks(instance)
    idx = 0
    for pref in profile:
        idx = idx * len(ranks) + ranks[pref]
    return idx
