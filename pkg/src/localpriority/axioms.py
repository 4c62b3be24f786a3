"""Exact brute-force oracles: strategy-proofness, group strategy-proofness,
nonbossiness, Maskin monotonicity, Pareto efficiency, and the three conditions
characterizing local priority mechanisms (unanimity, fixed compromiser,
compromiser invariance), plus the canonical compromiser assignment derived
from a mechanism table.

All sweeps iterate in canonical ascending order, so witnesses are
minimal-lexicographic and reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core import (
    Assignment,
    CompromiserAssignment,
    Constraint,
    DEFAULT_PROFILE_BUDGET,
    Instance,
    Preference,
    Profile,
    ScaleLimitError,
    profiles_with_tops,
)
from .engine import MechanismTable, tabulate

MASKIN_PAIR_BUDGET = 25_000_000


@dataclass(frozen=True)
class Verdict:
    """Result of one axiom check; a failing verdict carries a structured,
    independently re-checkable counterexample."""

    name: str
    holds: bool
    witness: dict | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class FunctionMechanism:
    """A mechanism given intensionally, for instances too large to tabulate."""

    instance: Instance
    fn: Callable[[Profile], Assignment]

    def lookup(self, profile: Profile) -> Assignment:
        return tuple(self.fn(profile))


Mechanism = MechanismTable | FunctionMechanism


@dataclass
class _Prep:
    """Shared precomputation for table sweeps."""

    instance: Instance
    prefs: tuple[Preference, ...]
    ranks: dict[Preference, int]
    strides: tuple[int, ...]
    dec: tuple[Assignment, ...]
    pos: tuple[tuple[int, ...], ...]  # pos[pref_rank][obj] = rank position
    rank_tuples: list[tuple[int, ...]] = field(default_factory=list)


def _prep(f: MechanismTable) -> _Prep:
    inst = f.instance
    prefs = inst.all_preferences()
    k = len(prefs)
    strides = tuple(k ** (inst.n - 1 - i) for i in range(inst.n))
    dec = tuple(inst.decode(c) for c in range(inst.num_allocations))
    pos = []
    for p in prefs:
        row = [0] * inst.m
        for r, obj in enumerate(p):
            row[obj] = r
        pos.append(tuple(row))
    return _Prep(inst, prefs, {p: r for r, p in enumerate(prefs)}, strides, dec, tuple(pos))


def _rank_tuples(prep: _Prep) -> list[tuple[int, ...]]:
    if not prep.rank_tuples:
        prep.rank_tuples = list(
            itertools.product(range(len(prep.prefs)), repeat=prep.instance.n)
        )
    return prep.rank_tuples


def bottom_rank(pref: Preference, obj: int) -> Preference:
    """Move one object to the bottom, preserving the rest of the order."""
    return tuple(o for o in pref if o != obj) + (obj,)


def _check_budget(f: MechanismTable, budget: int) -> None:
    f.instance.check_profile_budget(budget)


def is_strategy_proof(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> Verdict:
    """No single agent gains by misreporting, at any profile."""
    _check_budget(f, budget)
    prep = _prep(f)
    table, dec, strides, pos = f.table, prep.dec, prep.strides, prep.pos
    k = len(prep.prefs)
    for pidx, pranks in enumerate(_rank_tuples(prep)):
        x = dec[table[pidx]]
        for i in range(prep.instance.n):
            posi = pos[pranks[i]]
            pix = posi[x[i]]
            if pix == 0:
                continue
            base = pidx - pranks[i] * strides[i]
            for r2 in range(k):
                if r2 == pranks[i]:
                    continue
                y = dec[table[base + r2 * strides[i]]]
                if posi[y[i]] < pix:
                    return Verdict(
                        "strategy_proof",
                        False,
                        {
                            "profile": _profile_of(prep, pranks),
                            "agent": i,
                            "misreport": prep.prefs[r2],
                            "truthful_outcome": x,
                            "deviation_outcome": y,
                        },
                    )
    return Verdict("strategy_proof", True)


def is_nonbossy(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> Verdict:
    """No agent changes others' assignments without changing their own."""
    _check_budget(f, budget)
    prep = _prep(f)
    table, dec, strides, pos = f.table, prep.dec, prep.strides, prep.pos
    k = len(prep.prefs)
    for pidx, pranks in enumerate(_rank_tuples(prep)):
        xc = table[pidx]
        x = dec[xc]
        for i in range(prep.instance.n):
            base = pidx - pranks[i] * strides[i]
            for r2 in range(k):
                if r2 == pranks[i]:
                    continue
                yc = table[base + r2 * strides[i]]
                if yc != xc and dec[yc][i] == x[i]:
                    return Verdict(
                        "nonbossy",
                        False,
                        {
                            "profile": _profile_of(prep, pranks),
                            "agent": i,
                            "misreport": prep.prefs[r2],
                            "truthful_outcome": x,
                            "deviation_outcome": dec[yc],
                        },
                    )
    return Verdict("nonbossy", True)


def is_group_strategy_proof(
    f: MechanismTable,
    exhaustive: bool = False,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> Verdict:
    """No coalition misreport leaves every member weakly better and one
    strictly better.

    Default mode checks singletons and pairs, which is equivalent to checking
    all coalition sizes; `exhaustive` sweeps every coalition.
    """
    _check_budget(f, budget)
    sp = is_strategy_proof(f, budget)
    if not sp.holds:
        witness = dict(sp.witness or {})
        witness["coalition"] = (witness.pop("agent"),)
        witness["misreports"] = (witness.pop("misreport"),)
        return Verdict("group_strategy_proof", False, witness)
    prep = _prep(f)
    n = prep.instance.n
    sizes = range(2, n + 1) if exhaustive else [2]
    for size in sizes:
        v = _coalition_sweep(f, prep, size)
        if v is not None:
            return v
    return Verdict("group_strategy_proof", True)


def _coalition_sweep(f: MechanismTable, prep: _Prep, size: int) -> Verdict | None:
    table, dec, strides, pos = f.table, prep.dec, prep.strides, prep.pos
    k = len(prep.prefs)
    n = prep.instance.n
    for pidx, pranks in enumerate(_rank_tuples(prep)):
        x = dec[table[pidx]]
        for coalition in itertools.combinations(range(n), size):
            base = pidx
            for i in coalition:
                base -= pranks[i] * strides[i]
            truth_pos = [pos[pranks[i]][x[i]] for i in coalition]
            for reports in itertools.product(range(k), repeat=size):
                idx = base
                for i, r in zip(coalition, reports):
                    idx += r * strides[i]
                if idx == pidx:
                    continue
                y = dec[table[idx]]
                better = 0
                for i, tp in zip(coalition, truth_pos):
                    yp = pos[pranks[i]][y[i]]
                    if yp > tp:
                        better = -1
                        break
                    if yp < tp:
                        better += 1
                if better > 0:
                    return Verdict(
                        "group_strategy_proof",
                        False,
                        {
                            "profile": _profile_of(prep, pranks),
                            "coalition": coalition,
                            "misreports": tuple(prep.prefs[r] for r in reports),
                            "truthful_outcome": x,
                            "deviation_outcome": y,
                        },
                    )
    return None


def is_maskin_monotonic(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> Verdict:
    """Outcome preserved whenever every agent's lower contour set at their
    assigned object weakly expands."""
    _check_budget(f, budget)
    if f.instance.num_profiles**2 > MASKIN_PAIR_BUDGET:
        raise ScaleLimitError("profile-pair sweep exceeds the Maskin budget")
    prep = _prep(f)
    table, dec = f.table, prep.dec
    n = prep.instance.n
    # lc[r][obj]: bitmask of objects strictly below obj under ranking r
    lc = []
    for p in prep.prefs:
        row = [0] * prep.instance.m
        below = 0
        for obj in reversed(p):
            row[obj] = below
            below |= 1 << obj
        lc.append(tuple(row))
    rank_tuples = _rank_tuples(prep)
    for pidx, pranks in enumerate(rank_tuples):
        xc = table[pidx]
        x = dec[xc]
        masks = tuple(lc[pranks[i]][x[i]] for i in range(n))
        for qidx, qranks in enumerate(rank_tuples):
            if table[qidx] == xc:
                continue
            if all(lc[qranks[i]][x[i]] & masks[i] == masks[i] for i in range(n)):
                return Verdict(
                    "maskin_monotonic",
                    False,
                    {
                        "profile": _profile_of(prep, pranks),
                        "transformed_profile": _profile_of(prep, qranks),
                        "outcome": x,
                        "transformed_outcome": dec[table[qidx]],
                    },
                )
    return Verdict("maskin_monotonic", True)


def is_pareto_efficient(
    f: MechanismTable,
    constraint: Constraint | None = None,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> Verdict:
    """No feasible allocation weakly improves on the outcome for everyone and
    strictly for someone, at any profile."""
    _check_budget(f, budget)
    constraint = constraint or f.constraint
    prep = _prep(f)
    table, dec, pos = f.table, prep.dec, prep.pos
    n = prep.instance.n
    feas = [dec[c] for c in sorted(constraint.feasible)]
    for pidx, pranks in enumerate(_rank_tuples(prep)):
        x = dec[table[pidx]]
        xpos = tuple(pos[pranks[i]][x[i]] for i in range(n))
        for y in feas:
            better = 0
            for i in range(n):
                yp = pos[pranks[i]][y[i]]
                if yp > xpos[i]:
                    better = -1
                    break
                if yp < xpos[i]:
                    better += 1
            if better > 0:
                return Verdict(
                    "pareto_efficient",
                    False,
                    {
                        "profile": _profile_of(prep, pranks),
                        "outcome": x,
                        "improvement": y,
                    },
                )
    return Verdict("pareto_efficient", True)


def _profile_of(prep: _Prep, pranks: Sequence[int]) -> Profile:
    return tuple(prep.prefs[r] for r in pranks)


def _image_note(f: MechanismTable) -> tuple[str, ...]:
    image = f.image()
    if image != f.constraint.feasible:
        missing = sorted(f.constraint.feasible - image)
        return (f"declared constraint has {len(missing)} feasible allocations outside the image; image used",)
    return ()


def check_unanimity(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> Verdict:
    """Whenever the top-choice vector lies in the image, it is chosen."""
    _check_budget(f, budget)
    prep = _prep(f)
    image = f.image()
    notes = _image_note(f)
    enc = f.instance.encode
    for pidx, pranks in enumerate(_rank_tuples(prep)):
        tops = tuple(prep.prefs[r][0] for r in pranks)
        tc = enc(tops)
        if tc in image and f.table[pidx] != tc:
            return Verdict(
                "unanimity",
                False,
                {
                    "profile": _profile_of(prep, pranks),
                    "tops": tops,
                    "outcome": prep.dec[f.table[pidx]],
                },
                notes,
            )
    return Verdict("unanimity", True, None, notes)


def fixed_compromisers(
    f: Mechanism,
    mu: Sequence[int],
    profiles: Iterable[Profile] | None = None,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> frozenset[int]:
    """Agents who fail to receive their component of mu at every profile
    top-ranking mu.

    With explicit `profiles`, intersects over those only; this upper-bounds
    the full intersection, so an empty result refutes the fixed-compromiser
    condition at mu regardless of the profiles left unexamined.
    """
    inst = f.instance
    mu = tuple(mu)
    if profiles is None:
        count = math.factorial(inst.m - 1) ** inst.n
        if count > budget:
            raise ScaleLimitError(
                f"sweep of {count} top-ranking profiles exceeds budget {budget}; "
                "pass explicit profiles"
            )
        profiles = profiles_with_tops(inst, mu)
    remaining = set(range(inst.n))
    for p in profiles:
        if tuple(pref[0] for pref in p) != mu:
            raise ValueError("profile does not top-rank mu")
        out = f.lookup(p)
        remaining &= {i for i in range(inst.n) if out[i] != mu[i]}
        if not remaining:
            break
    return frozenset(remaining)


def check_fixed_compromiser(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> Verdict:
    """Every allocation outside the image has a nonempty fixed-compromiser set."""
    _check_budget(f, budget)
    inst = f.instance
    image = f.image()
    notes = _image_note(f)
    for code in range(inst.num_allocations):
        if code in image:
            continue
        mu = inst.decode(code)
        if not fixed_compromisers(f, mu, budget=budget):
            return Verdict(
                "fixed_compromiser",
                False,
                {"mu": mu, "profiles": tuple(profiles_with_tops(inst, mu))},
                notes,
            )
    return Verdict("fixed_compromiser", True, None, notes)


def check_compromiser_invariance(
    f: MechanismTable,
    mus: Iterable[Sequence[int]] | None = None,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> Verdict:
    """Bottom-ranking every fixed compromiser's top leaves the outcome
    unchanged, for every mu and every profile top-ranking mu."""
    _check_budget(f, budget)
    inst = f.instance
    notes = _image_note(f)
    if mus is None:
        mus = (inst.decode(c) for c in range(inst.num_allocations))
    for mu in mus:
        mu = tuple(mu)
        fixed = fixed_compromisers(f, mu, budget=budget)
        if not fixed:
            continue
        for p in profiles_with_tops(inst, mu):
            out = f.lookup(p)
            moved = tuple(
                bottom_rank(pref, mu[i]) if i in fixed else pref
                for i, pref in enumerate(p)
            )
            out2 = f.lookup(moved)
            if out2 != out:
                return Verdict(
                    "compromiser_invariance",
                    False,
                    {
                        "mu": mu,
                        "fixed_compromisers": tuple(sorted(fixed)),
                        "profile": p,
                        "transformed_profile": moved,
                        "outcome": out,
                        "transformed_outcome": out2,
                    },
                    notes,
                )
    return Verdict("compromiser_invariance", True, None, notes)


def derive_alpha(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> CompromiserAssignment:
    """Canonical compromiser assignment of a table: the fixed-compromiser set
    at every allocation outside the image, over the image-as-constraint.

    Raises MalformedAssignmentError when some cell comes out empty, i.e. when
    the fixed-compromiser condition fails.
    """
    _check_budget(f, budget)
    inst = f.instance
    image = f.image()
    cells = {}
    for code in range(inst.num_allocations):
        if code in image:
            continue
        cells[code] = fixed_compromisers(f, inst.decode(code), budget=budget)
    return CompromiserAssignment(Constraint(inst, image, ("explicit",)), cells)


@dataclass(frozen=True)
class LPVerdict:
    """Outcome of the local-priority characterization test."""

    is_lp: bool
    alpha: CompromiserAssignment | None = None
    failed: str | None = None
    witness: dict | None = None
    exhaustive: bool = True
    notes: tuple[str, ...] = ()


def is_local_priority(f: MechanismTable, budget: int = DEFAULT_PROFILE_BUDGET) -> LPVerdict:
    """Test the three characterizing conditions, then confirm the canonical
    assignment reproduces the table."""
    for check in (check_unanimity, check_fixed_compromiser, check_compromiser_invariance):
        v = check(f, budget=budget)
        if not v.holds:
            return LPVerdict(False, None, v.name, v.witness, notes=v.notes)
    alpha = derive_alpha(f, budget=budget)
    from .engine import mechanism_difference

    table = tabulate(alpha, budget=budget)
    if table.table != f.table:
        return LPVerdict(
            False,
            alpha,
            "tabulation_mismatch",
            {"profile": mechanism_difference(table, f)},
        )
    return LPVerdict(True, alpha)


def probe_local_priority(
    f: FunctionMechanism,
    mus: Iterable[Sequence[int]],
    profiles_by_mu: Mapping[tuple[int, ...], Sequence[Profile]],
) -> LPVerdict:
    """Targeted refutation for mechanisms too large to tabulate: checks the
    fixed-compromiser condition at the supplied allocations using the supplied
    top-ranking profiles. A failure is definitive; a pass is not exhaustive.
    """
    for mu in mus:
        mu = tuple(mu)
        profiles = profiles_by_mu[mu]
        fixed = fixed_compromisers(f, mu, profiles=profiles)
        if not fixed:
            outcomes = tuple(f.lookup(p) for p in profiles)
            return LPVerdict(
                False,
                None,
                "fixed_compromiser",
                {"mu": mu, "profiles": tuple(profiles), "outcomes": outcomes},
                exhaustive=False,
            )
    return LPVerdict(True, None, exhaustive=False, notes=("checked supplied allocations only",))
