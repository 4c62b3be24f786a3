"""The local priority algorithm: traces, outcomes, implementability sweeps,
extensional mechanism tables, and marginal mechanisms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .core import (
    Assignment,
    CompromiserAssignment,
    Constraint,
    DEFAULT_PROFILE_BUDGET,
    Instance,
    MalformedAssignmentError,
    Preference,
    Profile,
)


@dataclass(frozen=True)
class Trace:
    """Allocations considered by one run, each paired with the compromiser set
    applied to leave it (empty on the terminal allocation)."""

    profile: Profile
    steps: tuple[tuple[Assignment, frozenset[int]], ...]

    @property
    def allocations(self) -> tuple[Assignment, ...]:
        return tuple(a for a, _ in self.steps)


@dataclass(frozen=True)
class Final:
    """The algorithm reached a feasible allocation."""

    assignment: Assignment
    trace: Trace


@dataclass(frozen=True)
class Exhausted:
    """A compromiser had an empty lower contour set at the recorded step."""

    agent: int
    step: int
    trace: Trace


Outcome = Final | Exhausted


class NotImplementableError(ValueError):
    """Raised when a sweep that requires implementability hits exhaustion."""

    def __init__(self, profile: Profile, agent: int, step: int):
        super().__init__(f"agent {agent} exhausted at step {step}")
        self.profile = profile
        self.agent = agent
        self.step = step


def run_lp(alpha: CompromiserAssignment, profile: Profile) -> Outcome:
    """Run the local priority algorithm for one profile.

    Starts from the top-choice vector; at each infeasible allocation every
    agent in the cell simultaneously moves to the best object strictly below
    their current one. Each agent's current object is always at their
    compromise count in their own ranking, so a step is O(cell size).
    """
    inst = alpha.instance
    n, m = inst.n, inst.m
    feasible = alpha.constraint.feasible
    cells = alpha.cells
    powers = [m**i for i in range(n)]

    pos = [0] * n
    x = [pref[0] for pref in profile]
    code = 0
    for i in range(n):
        code += x[i] * powers[i]

    steps: list[tuple[Assignment, frozenset[int]]] = []
    step_cap = n * (m - 1) + 1
    while True:
        if code in feasible:
            steps.append((tuple(x), frozenset()))
            return Final(tuple(x), Trace(profile, tuple(steps)))
        cell = cells.get(code)
        if not cell:
            raise MalformedAssignmentError(
                f"missing or empty cell at infeasible {inst.assignment_names(x)}"
            )
        tired = [i for i in cell if pos[i] == m - 1]
        if tired:
            steps.append((tuple(x), frozenset()))
            return Exhausted(min(tired), len(steps), Trace(profile, tuple(steps)))
        steps.append((tuple(x), cell))
        for i in cell:
            pos[i] += 1
            new = profile[i][pos[i]]
            code += (new - x[i]) * powers[i]
            x[i] = new
        assert len(steps) <= step_cap, "rank descent bound violated"


def find_exhausting_profile(
    alpha: CompromiserAssignment, budget: int = DEFAULT_PROFILE_BUDGET
) -> Profile | None:
    """Lexicographically first profile on which the algorithm exhausts, if any."""
    alpha.instance.check_profile_budget(budget)
    for profile in alpha.instance.all_profiles():
        if isinstance(run_lp(alpha, profile), Exhausted):
            return profile
    return None


def is_implementable(
    alpha: CompromiserAssignment, budget: int = DEFAULT_PROFILE_BUDGET
) -> bool:
    return find_exhausting_profile(alpha, budget) is None


@dataclass(frozen=True)
class MechanismTable:
    """An extensionally represented feasible mechanism: one feasible allocation
    code per profile, profiles indexed canonically."""

    constraint: Constraint
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        inst = self.constraint.instance
        if len(self.table) != inst.num_profiles:
            raise ValueError("table must be total over all profiles")
        if any(code not in self.constraint.feasible for code in self.table):
            raise ValueError("table entry outside the feasible set")

    @property
    def instance(self) -> Instance:
        return self.constraint.instance

    def image(self) -> frozenset[int]:
        return frozenset(self.table)

    def lookup(self, profile: Profile) -> Assignment:
        from .core import profile_index

        return self.instance.decode(self.table[profile_index(self.instance, profile)])


def tabulate(
    alpha: CompromiserAssignment, budget: int = DEFAULT_PROFILE_BUDGET
) -> MechanismTable:
    """Dense table of the local priority mechanism; exhaustion surfaces the
    witness profile as NotImplementableError."""
    inst = alpha.instance
    inst.check_profile_budget(budget)
    encode = inst.encode
    entries = []
    for profile in inst.all_profiles():
        out = run_lp(alpha, profile)
        if isinstance(out, Exhausted):
            raise NotImplementableError(profile, out.agent, out.step)
        entries.append(encode(out.assignment))
    return MechanismTable(alpha.constraint, tuple(entries))


def tabulate_function(
    fn: Callable[[Profile], Sequence[int]],
    constraint: Constraint,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> MechanismTable:
    """Dense table of any feasible mechanism given as a function of the profile."""
    inst = constraint.instance
    inst.check_profile_budget(budget)
    entries = tuple(inst.encode(fn(p)) for p in inst.all_profiles())
    return MechanismTable(constraint, entries)


def mechanism_difference(f: MechanismTable, g: MechanismTable) -> Profile | None:
    """First profile where two tables disagree, or None if equal."""
    if f.instance != g.instance:
        raise ValueError("tables must share an instance")
    for idx, (a, b) in enumerate(zip(f.table, g.table)):
        if a != b:
            return _profile_at(f.instance, idx)
    return None


def mechanisms_equal(f: MechanismTable, g: MechanismTable) -> bool:
    return mechanism_difference(f, g) is None


def _profile_at(instance: Instance, index: int) -> Profile:
    prefs = instance.all_preferences()
    k = len(prefs)
    out = []
    for _ in range(instance.n):
        index, r = divmod(index, k)
        out.append(prefs[r])
    return tuple(reversed(out))


def is_truncation(long: Trace, short: Trace) -> bool:
    """True iff the short trace's allocation sequence is a suffix of the long one's."""
    a, b = long.allocations, short.allocations
    if len(b) > len(a):
        return False
    return a[len(a) - len(b) :] == b


def rank_vector(profile: Profile, x: Sequence[int]) -> tuple[int, ...]:
    """Per agent, the size of the upper contour set of their assigned object.

    Zero exactly when the agent holds their top choice; componentwise
    nondecreasing along any trace.
    """
    return tuple(pref.index(obj) for pref, obj in zip(profile, x))


def marginal(
    f: MechanismTable, fixed: Mapping[int, Preference]
) -> MechanismTable:
    """Marginal mechanism over the agents not in `fixed`, holding the given
    preferences constant; the result's constraint is the image of the marginal
    map."""
    inst = f.instance
    for i, pref in fixed.items():
        if not 0 <= i < inst.n:
            raise ValueError(f"agent index {i} out of range")
        if tuple(sorted(pref)) != tuple(range(inst.m)):
            raise ValueError("fixed preference must rank every object exactly once")
    free = [i for i in range(inst.n) if i not in fixed]
    if not free:
        raise ValueError("marginal needs at least one free agent")
    if len(free) == inst.n:
        return MechanismTable(
            Constraint(inst, f.image(), ("explicit",)), f.table
        )

    sub_inst = Instance(tuple(inst.agents[i] for i in free), inst.objects)
    prefs = inst.all_preferences()
    entries = []
    for sub_profile in itertools.product(prefs, repeat=len(free)):
        full = list(fixed.items())
        full.extend(zip(free, sub_profile))
        full.sort()
        outcome = f.lookup(tuple(p for _, p in full))
        entries.append(sub_inst.encode(tuple(outcome[i] for i in free)))
    image = frozenset(entries)
    return MechanismTable(Constraint(sub_inst, image, ("explicit",)), tuple(entries))
