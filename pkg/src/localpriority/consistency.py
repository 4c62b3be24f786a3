"""Forward and backward consistency of compromiser assignments, i-connected
search, subset/union equivalences, the consistency-implies-GSP harness, and
searches for the two existence witnesses (an efficient-but-bossy mechanism and
a group strategy-proof one violating backward consistency)."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Mapping, Sequence

from .core import (
    Assignment,
    CompromiserAssignment,
    Constraint,
    Instance,
    diff,
)
from .engine import (
    MechanismTable,
    NotImplementableError,
    mechanism_difference,
    tabulate,
    tabulate_function,
)
from .axioms import Verdict, is_group_strategy_proof, is_nonbossy, is_pareto_efficient

Reading = Literal["strict", "relaxed"]
READINGS = ("strict", "relaxed")


def _check_reading(reading: Reading) -> None:
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}")


def is_forward_consistent(alpha: CompromiserAssignment) -> Verdict:
    """If moving a subset of x's compromisers reaches y, the rest must still
    be compromisers at y. A feasible y reached this way with compromisers left
    over is a violation."""
    inst = alpha.instance
    for x_code in sorted(alpha.cells):
        x = inst.decode(x_code)
        cell = alpha.cells[x_code]
        for y_code in _moved_codes(inst, x, cell):
            y = inst.decode(y_code)
            owed = cell - diff(x, y)
            if not owed <= alpha.cell(y_code):
                return Verdict(
                    "forward_consistent",
                    False,
                    {
                        "x": x,
                        "y": y,
                        "alpha_x": tuple(sorted(cell)),
                        "alpha_y": tuple(sorted(alpha.cell(y_code))),
                        "missing": tuple(sorted(owed - alpha.cell(y_code))),
                    },
                )
    return Verdict("forward_consistent", True)


def _moved_codes(inst: Instance, x: Assignment, agents: frozenset[int]) -> list[int]:
    """Codes of all allocations differing from x only on the given agents,
    ascending."""
    coords = sorted(agents)
    codes = []
    for combo in itertools.product(range(inst.m), repeat=len(coords)):
        y = list(x)
        for i, obj in zip(coords, combo):
            y[i] = obj
        codes.append(inst.encode(y))
    return sorted(codes)


def _neighbors(
    alpha: CompromiserAssignment, code: int, abandoned: tuple[int, ...]
) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Legal next states from an allocation along an acyclic compromise path:
    a nonempty subset of the cell moves, nobody revisits an abandoned object."""
    inst = alpha.instance
    cell = sorted(alpha.cell(code))
    if not cell:
        return
    x = inst.decode(code)
    for size in range(1, len(cell) + 1):
        for subset in itertools.combinations(cell, size):
            choices = []
            for i in subset:
                opts = [
                    o
                    for o in range(inst.m)
                    if o != x[i] and not (abandoned[i] >> o) & 1
                ]
                choices.append(opts)
            for combo in itertools.product(*choices):
                y = list(x)
                new_ab = list(abandoned)
                for i, obj in zip(subset, combo):
                    new_ab[i] |= 1 << y[i]
                    y[i] = obj
                yield inst.encode(y), tuple(new_ab)


def _connect_search(
    alpha: CompromiserAssignment, x_code: int, agent: int, target: int | None
) -> dict[int, tuple[int, ...]] | tuple[Assignment, ...] | None:
    """BFS over (allocation, abandoned-objects) states starting with a move by
    `agent` alone. With a target, returns the first witness path; without one,
    returns every infeasible allocation reached (mapped to a witness path)."""
    inst = alpha.instance
    if agent not in alpha.cell(x_code):
        return None if target is not None else {}
    x = inst.decode(x_code)
    start_ab = tuple(
        (1 << x[agent]) if i == agent else 0 for i in range(inst.n)
    )
    queue: deque[tuple[int, tuple[int, ...], tuple[int, ...]]] = deque()
    seen = set()
    reached: dict[int, tuple[int, ...]] = {}
    for obj in range(inst.m):
        if obj == x[agent]:
            continue
        y = list(x)
        y[agent] = obj
        code = inst.encode(y)
        state = (code, start_ab)
        if state not in seen:
            seen.add(state)
            queue.append((code, start_ab, (x_code, code)))
    while queue:
        code, ab, path = queue.popleft()
        if code not in alpha.constraint.feasible:
            if target is not None and code == target:
                return tuple(inst.decode(c) for c in path)
            reached.setdefault(code, path)
            for nxt, nab in _neighbors(alpha, code, ab):
                state = (nxt, nab)
                if state not in seen:
                    seen.add(state)
                    queue.append((nxt, nab, path + (nxt,)))
    return None if target is not None else reached


def i_connected(
    alpha: CompromiserAssignment, x: Sequence[int], y: Sequence[int], agent: int
) -> tuple[Assignment, ...] | None:
    """Witness path showing y is reachable from x by an acyclic compromise
    sequence whose first move changes exactly `agent`, or None."""
    inst = alpha.instance
    x_code, y_code = inst.encode(x), inst.encode(y)
    if x_code in alpha.constraint.feasible or y_code in alpha.constraint.feasible:
        raise ValueError("i-connectedness is defined between infeasible allocations")
    return _connect_search(alpha, x_code, agent, y_code)


def validate_connection_path(
    alpha: CompromiserAssignment, path: Sequence[Assignment], agent: int
) -> bool:
    """Naive re-check of the three defining clauses of an i-connected path."""
    if len(path) < 2:
        return False
    if diff(path[0], path[1]) != frozenset({agent}):
        return False
    for z, z_next in zip(path, path[1:]):
        d = diff(z, z_next)
        if not d or not d <= alpha.cell(alpha.instance.encode(z)):
            return False
    for i in range(len(path[0])):
        objs = [step[i] for step in path]
        for r in range(len(objs)):
            for s in range(r + 1, len(objs)):
                for t in range(s + 1, len(objs)):
                    if objs[r] == objs[t] and objs[s] != objs[r]:
                        return False
    return True


def is_backward_consistent(
    alpha: CompromiserAssignment, reading: Reading = "strict"
) -> Verdict:
    """Whenever x is i-connected to y, the agent i must still be a compromiser
    at every x' obtained from x by moving compromisers of y other than i.

    Under the strict reading x' ranges over all allocations, so a feasible x'
    meeting the hypothesis is an automatic violation; the relaxed reading
    quantifies over infeasible x' only.
    """
    _check_reading(reading)
    inst = alpha.instance
    feasible = alpha.constraint.feasible
    for agent in range(inst.n):
        for x_code in sorted(alpha.cells):
            reached = _connect_search(alpha, x_code, agent, None)
            if not reached:
                continue
            x = inst.decode(x_code)
            for y_code in sorted(reached):
                cell_y = alpha.cell(y_code)
                movers = cell_y - {agent}
                for xp_code in _moved_codes(inst, x, movers):
                    if reading == "relaxed" and xp_code in feasible:
                        continue
                    if agent not in alpha.cell(xp_code):
                        return Verdict(
                            "backward_consistent",
                            False,
                            {
                                "agent": agent,
                                "x": x,
                                "y": inst.decode(y_code),
                                "x_prime": inst.decode(xp_code),
                                "alpha_y": tuple(sorted(cell_y)),
                                "alpha_x_prime": tuple(sorted(alpha.cell(xp_code))),
                                "path": tuple(inst.decode(c) for c in reached[y_code]),
                                "reading": reading,
                            },
                        )
    return Verdict("backward_consistent", True)


def is_consistent(alpha: CompromiserAssignment, reading: Reading = "strict") -> Verdict:
    fwd = is_forward_consistent(alpha)
    if not fwd.holds:
        return Verdict("consistent", False, fwd.witness, (fwd.name,))
    bwd = is_backward_consistent(alpha, reading)
    if not bwd.holds:
        return Verdict("consistent", False, bwd.witness, (bwd.name,))
    return Verdict("consistent", True)


def verify_subset_equivalence(
    alpha: CompromiserAssignment, alpha_sub: CompromiserAssignment
) -> Verdict:
    """A pointwise sub-assignment of a forward-consistent implementable
    assignment must induce the same mechanism; hypothesis failures are
    reported distinctly from equivalence failures."""
    if alpha.constraint.feasible != alpha_sub.constraint.feasible:
        return Verdict(
            "subset_equivalence", False, {"hypothesis": "same_constraint"}
        )
    if not alpha_sub.is_subset_of(alpha):
        return Verdict("subset_equivalence", False, {"hypothesis": "pointwise_subset"})
    fwd = is_forward_consistent(alpha)
    if not fwd.holds:
        return Verdict(
            "subset_equivalence",
            False,
            {"hypothesis": "forward_consistency", "detail": fwd.witness},
        )
    try:
        full = tabulate(alpha)
    except NotImplementableError as exc:
        return Verdict(
            "subset_equivalence",
            False,
            {"hypothesis": "implementability", "profile": exc.profile},
        )
    try:
        sub = tabulate(alpha_sub)
    except NotImplementableError as exc:
        return Verdict(
            "subset_equivalence",
            False,
            {"equivalence": "sub_assignment_not_implementable", "profile": exc.profile},
        )
    witness = mechanism_difference(full, sub)
    if witness is not None:
        return Verdict(
            "subset_equivalence",
            False,
            {
                "equivalence": "tables_differ",
                "profile": witness,
                "full_outcome": full.lookup(witness),
                "sub_outcome": sub.lookup(witness),
            },
        )
    return Verdict("subset_equivalence", True)


def verify_union_closure(
    alpha: CompromiserAssignment, alpha2: CompromiserAssignment
) -> Verdict:
    """Two assignments inducing the same group strategy-proof table must have
    a pointwise union inducing it too."""
    if alpha.constraint.feasible != alpha2.constraint.feasible:
        return Verdict("union_closure", False, {"hypothesis": "same_constraint"})
    try:
        t1, t2 = tabulate(alpha), tabulate(alpha2)
    except NotImplementableError as exc:
        return Verdict(
            "union_closure", False, {"hypothesis": "implementability", "profile": exc.profile}
        )
    if mechanism_difference(t1, t2) is not None:
        return Verdict("union_closure", False, {"hypothesis": "equal_tables"})
    gsp = is_group_strategy_proof(t1)
    if not gsp.holds:
        return Verdict(
            "union_closure", False, {"hypothesis": "group_strategy_proof", "detail": gsp.witness}
        )
    union = alpha.union(alpha2)
    try:
        tu = tabulate(union)
    except NotImplementableError as exc:
        return Verdict(
            "union_closure", False, {"union_not_implementable": exc.profile}
        )
    witness = mechanism_difference(t1, tu)
    if witness is not None:
        return Verdict("union_closure", False, {"profile": witness})
    return Verdict("union_closure", True)


@dataclass(frozen=True)
class HarnessReport:
    """Outcome of sweeping every enumerated consistent assignment through the
    incentive oracles."""

    constraint: Constraint
    reading: Reading
    total: int
    gsp_failures: tuple[dict, ...]
    pe_failures: tuple[dict, ...]
    mechanism_count: int

    @property
    def all_pass(self) -> bool:
        return not self.gsp_failures and not self.pe_failures


def theorem_harness(
    constraint: Constraint,
    reading: Reading = "strict",
    budget: int = 10_000_000,
) -> HarnessReport:
    """Enumerate the consistent implementable assignments for a constraint and
    check every induced table for group strategy-proofness and efficiency."""
    from .enumeration import EnumerationOptions, enumerate_consistent

    opts = EnumerationOptions(
        reading=reading, require_forward=True, require_backward=True, budget=budget
    )
    gsp_failures = []
    pe_failures = []
    tables: dict[tuple[int, ...], None] = {}
    total = 0
    result = enumerate_consistent(constraint, opts)
    for alpha in result.assignments:
        total += 1
        table = tabulate(alpha)
        tables[table.table] = None
        gsp = is_group_strategy_proof(table)
        if not gsp.holds:
            gsp_failures.append({"alpha": alpha, "witness": gsp.witness})
        pe = is_pareto_efficient(table)
        if not pe.holds:
            pe_failures.append({"alpha": alpha, "witness": pe.witness})
    return HarnessReport(
        constraint,
        reading,
        total,
        tuple(gsp_failures),
        tuple(pe_failures),
        len(tables),
    )


@dataclass(frozen=True)
class SearchResult:
    """A verified witness from one of the existence searches."""

    alpha: CompromiserAssignment
    table: MechanismTable
    detail: dict


def small_infeasible_variants(
    instance: Instance, max_infeasible: int
) -> Iterator[Constraint]:
    """Explicit constraints with small infeasible sets, canonical order."""
    codes = range(instance.num_allocations)
    for k in range(1, max_infeasible + 1):
        for infeasible in itertools.combinations(codes, k):
            feasible = frozenset(codes) - frozenset(infeasible)
            yield Constraint(instance, feasible, ("explicit",))


def _all_cell_choices(
    constraint: Constraint,
) -> Iterator[CompromiserAssignment]:
    """Every compromiser assignment for a constraint, smallest total cell size
    first (then lexicographic), so minimal witnesses surface early."""
    inst = constraint.instance
    cells = constraint.infeasible_codes()
    by_size: dict[int, list[frozenset[int]]] = {}
    for mask in range(1, 2**inst.n):
        agents = frozenset(i for i in range(inst.n) if (mask >> i) & 1)
        by_size.setdefault(len(agents), []).append(agents)
    sizes = sorted(by_size)

    def combos(k: int, total: int) -> Iterator[list[frozenset[int]]]:
        if k == len(cells):
            if total == 0:
                yield []
            return
        remaining = len(cells) - k - 1
        for size in sizes:
            rest = total - size
            if rest < remaining * sizes[0] or rest > remaining * sizes[-1]:
                continue
            for choice in by_size[size]:
                for tail in combos(k + 1, rest):
                    yield [choice] + tail

    for total in range(len(cells), inst.n * len(cells) + 1):
        for combo in combos(0, total):
            yield CompromiserAssignment(constraint, dict(zip(cells, combo)))


def find_pe_not_gsp(
    constraints: Iterable[Constraint],
    budget: int = 50_000,
    pinned_outcomes: Sequence[tuple[Sequence[Sequence[int]], Sequence[int]]] = (),
) -> SearchResult | None:
    """Search for an implementable assignment whose table is Pareto efficient
    but bossy (hence not group strategy-proof). Optional pinned (profile,
    allocation) pairs restrict the search to mechanisms with those exact
    outcomes. Returns None on budget exhaustion, never a fabricated witness."""
    from .engine import Final, run_lp

    examined = 0
    for constraint in constraints:
        for alpha in _all_cell_choices(constraint):
            examined += 1
            if examined > budget:
                return None
            ok = True
            for profile, expected in pinned_outcomes:
                out = run_lp(alpha, tuple(tuple(p) for p in profile))
                if not isinstance(out, Final) or out.assignment != tuple(expected):
                    ok = False
                    break
            if not ok:
                continue
            try:
                table = tabulate(alpha)
            except NotImplementableError:
                continue
            bossy = is_nonbossy(table)
            if bossy.holds:
                continue
            pe = is_pareto_efficient(table)
            if not pe.holds:
                continue
            return SearchResult(
                alpha, table, {"bossiness_witness": bossy.witness, "examined": examined}
            )
    return None


def _pick_contingent_dictatorship(
    constraint: Constraint,
    first: int,
    orders: Mapping[int, Sequence[int]],
    profile: Sequence[Sequence[int]],
) -> Assignment:
    """Greedy sequential dictatorship where the order of the later dictators
    depends on the first dictator's pick. Group strategy-proof for the same
    reason serial dictatorship is: every pick is the agent's best surviving
    option and earlier picks are unaffected by later reports."""
    inst = constraint.instance
    pool = [inst.decode(c) for c in sorted(constraint.feasible)]
    chosen = {}
    sequence = [first]
    for agent in sequence:
        options = {a[agent] for a in pool}
        best = next(o for o in profile[agent] if o in options)
        chosen[agent] = best
        pool = [a for a in pool if a[agent] == best]
        if agent == first:
            sequence.extend(orders[best])
    return tuple(chosen[i] for i in range(inst.n))


def _gsp_backward_candidates(
    constraint: Constraint,
) -> Iterator[tuple[str, object, MechanismTable]]:
    """Group strategy-proof candidate tables: plain serial dictatorships, then
    sequential dictatorships whose continuation order hinges on the first
    dictator's pick."""
    from .mechanisms import serial_dictatorship

    inst = constraint.instance
    for order in itertools.permutations(range(inst.n)):
        yield "serial_dictatorship", order, tabulate_function(
            lambda p: serial_dictatorship(constraint, order, p), constraint
        )
    for first in range(inst.n):
        rest = [i for i in range(inst.n) if i != first]
        rest_orders = list(itertools.permutations(rest))
        for combo in itertools.product(rest_orders, repeat=inst.m):
            if len(set(combo)) == 1:
                continue
            orders = dict(enumerate(combo))
            yield "pick_contingent_dictatorship", (first, combo), tabulate_function(
                lambda p: _pick_contingent_dictatorship(constraint, first, orders, p),
                constraint,
            )


def find_gsp_backward_violation(
    constraints: Iterable[Constraint],
    budget: int = 2_000,
    reading: Reading = "strict",
) -> SearchResult | None:
    """Search for an implementable assignment that induces a group
    strategy-proof table yet violates backward consistency. Candidates are
    canonical assignments derived from greedy dictatorship families over the
    given constraints; None means the budget ran out without a witness."""
    from .axioms import derive_alpha

    examined = 0
    for constraint in constraints:
        for family, params, table in _gsp_backward_candidates(constraint):
            examined += 1
            if examined > budget:
                return None
            alpha = derive_alpha(table)
            bwd = is_backward_consistent(alpha, reading)
            if bwd.holds:
                continue
            gsp = is_group_strategy_proof(table)
            if not gsp.holds:
                continue
            induced = tabulate(alpha)
            if mechanism_difference(induced, table) is not None:
                continue
            return SearchResult(
                alpha,
                table,
                {
                    "backward_witness": bwd.witness,
                    "family": family,
                    "params": params,
                    "examined": examined,
                },
            )
    return None
