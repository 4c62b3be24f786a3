import json
from pathlib import Path

import pytest

from localpriority.core import (
    Constraint,
    Instance,
    house_constraint,
    make_alpha,
    social_constraint,
)
from localpriority.mechanisms import Endowment, SchoolSpec

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = Path(__file__).parent / "goldens"

A, B, C = 0, 1, 2


def load_fixture(name):
    with open(FIXTURES / name) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def inst3():
    return Instance(("1", "2", "3"), ("a", "b", "c"))


@pytest.fixture(scope="session")
def inst2():
    return Instance(("1", "2"), ("a", "b", "c"))


@pytest.fixture(scope="session")
def house3(inst3):
    return house_constraint(inst3)


@pytest.fixture(scope="session")
def social3(inst3):
    return social_constraint(inst3)


@pytest.fixture(scope="session")
def perturbed3(inst3, house3):
    # house allocation plus the all-a allocation
    return Constraint(inst3, house3.feasible | {inst3.encode((A, A, A))}, ("explicit",))


@pytest.fixture(scope="session")
def da_spec(inst3):
    # students 1,2,3; schools a,b,c with unit capacity;
    # priorities a: 3,1,2 / b: 1,2,3 / c: 1,2,3
    return SchoolSpec(inst3, (1, 1, 1), ((2, 0, 1), (0, 1, 2), (0, 1, 2)))


@pytest.fixture(scope="session")
def da_profile():
    return ((A, B, C), (A, B, C), (B, A, C))


@pytest.fixture(scope="session")
def ia_spec(inst3):
    # priorities a: 2,3,1 / b: 1,2,3 / c: 1,2,3
    return SchoolSpec(inst3, (1, 1, 1), ((1, 2, 0), (0, 1, 2), (0, 1, 2)))


@pytest.fixture(scope="session")
def ttc_endowment(inst3):
    # 1 owns b, 2 owns c, 3 owns a
    return Endowment(inst3, (B, C, A))


@pytest.fixture(scope="session")
def ttc_profile():
    return ((A, C, B), (B, A, C), (A, C, B))


@pytest.fixture(scope="session")
def nested_pair(inst3):
    # infeasible {(a,a,a), (b,a,a)}; alpha moves only agent 1 first,
    # alpha_prime moves agents 1 and 2
    infeasible = {inst3.encode((A, A, A)), inst3.encode((B, A, A))}
    constraint = Constraint(inst3, frozenset(range(27)) - infeasible, ("explicit",))
    alpha = make_alpha(
        constraint,
        {inst3.encode((A, A, A)): {0}, inst3.encode((B, A, A)): {0, 1, 2}},
    )
    alpha_prime = make_alpha(
        constraint,
        {inst3.encode((A, A, A)): {0, 1}, inst3.encode((B, A, A)): {0, 1, 2}},
    )
    return alpha, alpha_prime


@pytest.fixture(scope="session")
def backward_fixture(inst3):
    # infeasible {(a,a,a),(b,a,a),(a,b,a)} with cells {1},{2},{3}
    codes = [inst3.encode((A, A, A)), inst3.encode((B, A, A)), inst3.encode((A, B, A))]
    constraint = Constraint(inst3, frozenset(range(27)) - set(codes), ("explicit",))
    return make_alpha(constraint, {codes[0]: {0}, codes[1]: {1}, codes[2]: {2}})


@pytest.fixture(scope="session")
def nonunique_alphas(inst2):
    # five infeasible cells around object a; three assignments inducing the
    # same mechanism, differing only at (a,a)
    cells_common = {
        inst2.encode((B, A)): {1},
        inst2.encode((C, A)): {1},
        inst2.encode((A, B)): {0},
        inst2.encode((A, C)): {0},
    }
    codes = set(cells_common) | {inst2.encode((A, A))}
    constraint = Constraint(inst2, frozenset(range(9)) - codes, ("explicit",))

    def build(cell_aa):
        cells = dict(cells_common)
        cells[inst2.encode((A, A))] = cell_aa
        return make_alpha(constraint, cells)

    return build({0, 1}), build({0}), build({1})


@pytest.fixture(scope="session")
def nonmonotone_pair(inst2):
    # two-agent swap pair: infeasible {(a,a),(a,b),(b,b)};
    # alpha1 has agent 1 compromise everywhere, alpha2 swaps in 2 at (a,a)
    codes = [inst2.encode((A, A)), inst2.encode((A, B)), inst2.encode((B, B))]
    constraint = Constraint(inst2, frozenset(range(9)) - set(codes), ("explicit",))
    alpha1 = make_alpha(constraint, {codes[0]: {0}, codes[1]: {0}, codes[2]: {0}})
    alpha2 = make_alpha(constraint, {codes[0]: {1}, codes[1]: {0}, codes[2]: {0}})
    return alpha1, alpha2


@pytest.fixture(scope="session")
def marriage_setup():
    names = ("m1", "m2", "m3", "w1", "w2", "w3")
    inst = Instance(names, names)
    from localpriority.mechanisms import MarriageSpec

    spec = MarriageSpec(inst, (0, 1, 2), (3, 4, 5))
    M1, M2, M3, W1, W2, W3 = range(6)

    def fill(*shown):
        return tuple(shown) + tuple(o for o in range(6) if o not in shown)

    profiles = (
        (fill(W1), fill(W2), fill(W2, W3, W1), fill(M3, M1, M2), fill(M1, M2, M3), fill(M3)),
        (fill(W1), fill(W2, W3, W1), fill(W2), fill(M3, M1, M2), fill(M1, M3, M2), fill(M3, M2, M1)),
        (fill(W1, W2, W3), fill(W2, W3, W1), fill(W2, W1, W3), fill(M3, M1, M2), fill(M1, M2, M3), fill(M3, M2, M1)),
    )
    return inst, spec, profiles
