"""Exhaustive enumeration of implementable consistent compromiser assignments
for a constraint, with constraint propagation, symmetry quotienting, and
mechanism-level deduplication.

Forward consistency is enforced exactly during the depth-first search. Backward
consistency over two-step connections is also propagated during the search
(both a sound pruning rule and the source of required-agent lower bounds);
the full path-global condition plus implementability are then checked on every
completed assignment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import CompromiserAssignment, Constraint, Instance
from .consistency import Reading, _check_reading, is_backward_consistent, is_forward_consistent
from .engine import Exhausted, NotImplementableError, run_lp, tabulate


@dataclass(frozen=True)
class EnumerationOptions:
    reading: Reading = "strict"
    require_forward: bool = True
    require_backward: bool = True
    quotient_symmetry: bool = False
    dedupe_by_mechanism: bool = False
    budget: int = 50_000_000

    def __post_init__(self) -> None:
        _check_reading(self.reading)
        if self.budget <= 0:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class SymmetryGroup:
    """All (agent permutation, object permutation) pairs fixing the feasible
    set, found by brute force; the full element list is its own generating
    set."""

    constraint: Constraint
    generators: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @property
    def order(self) -> int:
        return len(self.generators)


def constraint_symmetries(constraint: Constraint) -> SymmetryGroup:
    inst = constraint.instance
    feasible = constraint.feasible
    decoded = [inst.decode(c) for c in sorted(feasible)]
    pairs = []
    for aperm in itertools.permutations(range(inst.n)):
        for operm in itertools.permutations(range(inst.m)):
            ok = True
            for x in decoded:
                y = [0] * inst.n
                for i in range(inst.n):
                    y[aperm[i]] = operm[x[i]]
                if inst.encode(y) not in feasible:
                    ok = False
                    break
            if ok:
                pairs.append((aperm, operm))
    return SymmetryGroup(constraint, tuple(pairs))


def _code_map(inst: Instance, aperm: tuple[int, ...], operm: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for code in range(inst.num_allocations):
        x = inst.decode(code)
        y = [0] * inst.n
        for i in range(inst.n):
            y[aperm[i]] = operm[x[i]]
        out.append(inst.encode(y))
    return tuple(out)


def _mask_map(n: int, aperm: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for mask in range(2**n):
        new = 0
        for i in range(n):
            if (mask >> i) & 1:
                new |= 1 << aperm[i]
        out.append(new)
    return tuple(out)


@dataclass
class EnumerationResult:
    constraint: Constraint
    options: EnumerationOptions
    assignments: list[CompromiserAssignment]
    pruned_nodes: int
    complete: bool
    representatives: list[tuple[CompromiserAssignment, int]] | None = None
    mechanism_groups: dict[tuple[int, ...], list[int]] | None = None

    @property
    def count(self) -> int:
        return len(self.assignments)

    @property
    def orbit_count(self) -> int | None:
        return None if self.representatives is None else len(self.representatives)

    @property
    def mechanism_count(self) -> int | None:
        return None if self.mechanism_groups is None else len(self.mechanism_groups)

    def summary(self) -> dict:
        return {
            "count": self.count,
            "orbit_count": self.orbit_count,
            "mechanism_count": self.mechanism_count,
            "pruned_nodes": self.pruned_nodes,
            "complete": self.complete,
        }


class _Search:
    """State shared by one enumeration run."""

    def __init__(self, constraint: Constraint, options: EnumerationOptions):
        self.constraint = constraint
        self.options = options
        inst = constraint.instance
        self.inst = inst
        self.cells: list[int] = constraint.infeasible_codes()
        self.index = {code: k for k, code in enumerate(self.cells)}
        self.n = inst.n
        self.full_mask = 2**inst.n - 1
        self.assigned = [0] * len(self.cells)
        self.required = [0] * len(self.cells)
        self.nodes = 0
        self.pruned = 0
        self.found: list[CompromiserAssignment] = []
        self._build_moves()
        self._build_forward()
        if options.require_backward:
            self._build_backward_pairs()

    def _build_moves(self) -> None:
        """moved[k][mask]: codes reachable from cell k by changing exactly the
        agents in mask to different objects (split feasible/infeasible)."""
        inst = self.inst
        self.moved_infeasible: list[list[tuple[int, ...]]] = []
        self.moved_any_feasible: list[list[bool]] = []
        for code in self.cells:
            x = inst.decode(code)
            per_inf: list[tuple[int, ...]] = [()] * (self.full_mask + 1)
            per_feas: list[bool] = [False] * (self.full_mask + 1)
            for mask in range(1, self.full_mask + 1):
                coords = [i for i in range(self.n) if (mask >> i) & 1]
                infeas = []
                feas = False
                options = [
                    [o for o in range(inst.m) if o != x[i]] for i in coords
                ]
                for combo in itertools.product(*options):
                    y = list(x)
                    for i, obj in zip(coords, combo):
                        y[i] = obj
                    y_code = inst.encode(y)
                    if y_code in self.constraint.feasible:
                        feas = True
                    else:
                        infeas.append(y_code)
                per_inf[mask] = tuple(sorted(infeas))
                per_feas[mask] = feas
            self.moved_infeasible.append(per_inf)
            self.moved_any_feasible.append(per_feas)

    def _build_forward(self) -> None:
        """Per (cell, mask): None when some proper-subset move reaches a
        feasible allocation with compromisers left over; otherwise the list of
        (other cell, required mask) forward-consistency consequences."""
        self.forward: list[list[None | tuple[tuple[int, int], ...]]] = []
        for k in range(len(self.cells)):
            per_mask: list[None | tuple[tuple[int, int], ...]] = [None] * (
                self.full_mask + 1
            )
            for mask in range(1, self.full_mask + 1):
                cons: list[tuple[int, int]] = []
                ok = True
                sub = (mask - 1) & mask
                while sub:
                    req = mask & ~sub
                    if self.moved_any_feasible[k][sub]:
                        ok = False
                        break
                    for y_code in self.moved_infeasible[k][sub]:
                        cons.append((self.index[y_code], req))
                    sub = (sub - 1) & mask
                per_mask[mask] = tuple(cons) if ok else None
            self.forward.append(per_mask)
        if not self.options.require_forward:
            # keep only the per-cell validity filter implied by nothing:
            # without forward consistency every nonempty mask is allowed.
            self.forward = [
                [None] + [()] * self.full_mask for _ in self.cells
            ]

    def _build_backward_pairs(self) -> None:
        """Ordered cell pairs one coordinate apart: (x cell, y cell, agent)."""
        inst = self.inst
        pairs = []
        for k, code in enumerate(self.cells):
            x = inst.decode(code)
            for i in range(self.n):
                for obj in range(inst.m):
                    if obj == x[i]:
                        continue
                    y = list(x)
                    y[i] = obj
                    y_code = inst.encode(y)
                    if y_code in self.constraint.feasible:
                        continue
                    pairs.append((k, self.index[y_code], i))
        self.backward_pairs_at: list[list[tuple[int, int, int]]] = [
            [] for _ in self.cells
        ]
        for k, j, i in pairs:
            self.backward_pairs_at[max(k, j)].append((k, j, i))

    def _apply_backward(
        self, depth: int, undo: list[tuple[int, int]]
    ) -> bool:
        """Two-step backward-consistency rules whose (x, y) pair completed at
        this depth: x one move (by agent i) from y, i compromising at x, means
        i must still compromise at every x' reached from x by the other
        compromisers of y. Returns False to prune."""
        strict = self.options.reading == "strict"
        for xk, yk, agent in self.backward_pairs_at[depth]:
            if not (self.assigned[xk] >> agent) & 1:
                continue
            movers = self.assigned[yk] & ~(1 << agent)
            bit = 1 << agent
            sub = movers
            while sub:
                if strict and self.moved_any_feasible[xk][sub]:
                    return False
                for xp_code in self.moved_infeasible[xk][sub]:
                    j = self.index[xp_code]
                    if j <= depth:
                        if not (self.assigned[j] >> agent) & 1:
                            return False
                    elif not (self.required[j] >> agent) & 1:
                        undo.append((j, self.required[j]))
                        self.required[j] |= bit
                sub = (sub - 1) & movers
        return True

    def _emit(self) -> None:
        alpha = CompromiserAssignment(
            self.constraint,
            {
                code: frozenset(
                    i for i in range(self.n) if (self.assigned[k] >> i) & 1
                )
                for k, code in enumerate(self.cells)
            },
        )
        if self.options.require_backward:
            if not is_backward_consistent(alpha, self.options.reading).holds:
                self.pruned += 1
                return
        for profile in self.inst.all_profiles():
            if isinstance(run_lp(alpha, profile), Exhausted):
                self.pruned += 1
                return
        self.found.append(alpha)

    def run(self) -> bool:
        if not self.cells:
            self._emit()
            return True
        return self._dfs(0)

    def _dfs(self, depth: int) -> bool:
        if depth == len(self.cells):
            self._emit()
            return True
        assigned = self.assigned
        required = self.required
        forward = self.forward[depth]
        for mask in range(1, self.full_mask + 1):
            self.nodes += 1
            if self.nodes > self.options.budget:
                return False
            if mask & required[depth] != required[depth]:
                self.pruned += 1
                continue
            cons = forward[mask]
            if cons is None:
                self.pruned += 1
                continue
            undo: list[tuple[int, int]] = []
            ok = True
            for j, req in cons:
                if j < depth:
                    if assigned[j] & req != req:
                        ok = False
                        break
                elif j > depth:
                    if required[j] & req != req:
                        undo.append((j, required[j]))
                        required[j] |= req
            if ok:
                assigned[depth] = mask
                if self.options.require_backward:
                    ok = self._apply_backward(depth, undo)
            if ok:
                if not self._dfs(depth + 1):
                    return False
            else:
                self.pruned += 1
            for j, old in reversed(undo):
                required[j] = old
        assigned[depth] = 0
        return True


def enumerate_consistent(
    constraint: Constraint, options: EnumerationOptions | None = None
) -> EnumerationResult:
    """Depth-first enumeration over the cells in increasing allocation-code
    order; emitted assignments are implementable and satisfy the requested
    consistency conditions, in canonical order."""
    options = options or EnumerationOptions()
    search = _Search(constraint, options)
    complete = search.run()
    result = EnumerationResult(
        constraint, options, search.found, search.pruned, complete
    )
    _postprocess(result)
    return result


def _postprocess(result: EnumerationResult) -> None:
    options = result.options
    if options.quotient_symmetry:
        result.representatives = _quotient(result)
    if options.dedupe_by_mechanism:
        groups: dict[tuple[int, ...], list[int]] = {}
        for k, alpha in enumerate(result.assignments):
            table = tabulate(alpha)
            groups.setdefault(table.table, []).append(k)
        result.mechanism_groups = groups


def _quotient(result: EnumerationResult) -> list[tuple[CompromiserAssignment, int]]:
    """Group the enumerated assignments into symmetry orbits; representatives
    are minimal under the canonical cell-mask encoding."""
    constraint = result.constraint
    inst = constraint.instance
    group = constraint_symmetries(constraint)
    actions = [
        (_code_map(inst, aperm, operm), _mask_map(inst.n, aperm))
        for aperm, operm in group.generators
    ]
    cells = constraint.infeasible_codes()
    key_of: dict[tuple[int, ...], int] = {}
    for k, alpha in enumerate(result.assignments):
        key = tuple(sum(1 << i for i in alpha.cells[c]) for c in cells)
        key_of[key] = k

    reps: list[tuple[CompromiserAssignment, int]] = []
    claimed: set[tuple[int, ...]] = set()
    for key in sorted(key_of):
        if key in claimed:
            continue
        masks = dict(zip(cells, key))
        orbit = set()
        for code_map, mask_map in actions:
            moved = {code_map[c]: mask_map[masks[c]] for c in cells}
            orbit.add(tuple(moved[c] for c in cells))
        for member in orbit:
            if member not in key_of:
                raise AssertionError(
                    "symmetry image of an emitted assignment was not emitted"
                )
        claimed |= orbit
        reps.append((result.assignments[key_of[key]], len(orbit)))
    return reps


def brute_force_consistent(
    constraint: Constraint, options: EnumerationOptions | None = None
) -> list[CompromiserAssignment]:
    """Filter every possible assignment naively; tiny scale only. The
    completeness oracle for the pruned enumeration."""
    options = options or EnumerationOptions()
    inst = constraint.instance
    cells = constraint.infeasible_codes()
    if (2**inst.n - 1) ** len(cells) > options.budget:
        raise ValueError("brute force space exceeds budget")
    subsets = [
        frozenset(i for i in range(inst.n) if (mask >> i) & 1)
        for mask in range(1, 2**inst.n)
    ]
    out = []
    for combo in itertools.product(subsets, repeat=len(cells)):
        alpha = CompromiserAssignment(constraint, dict(zip(cells, combo)))
        if options.require_forward and not is_forward_consistent(alpha).holds:
            continue
        if options.require_backward and not is_backward_consistent(alpha, options.reading).holds:
            continue
        try:
            tabulate(alpha)
        except NotImplementableError:
            continue
        out.append(alpha)
    return out
