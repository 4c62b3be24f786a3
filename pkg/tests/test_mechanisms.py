import itertools
import random

import pytest

from localpriority.core import (
    Constraint,
    Instance,
    house_constraint,
    tau,
)
from localpriority.engine import (
    mechanisms_equal,
    run_lp,
    tabulate,
    tabulate_function,
)
from localpriority.mechanisms import (
    Endowment,
    SchoolSpec,
    cumulative_da,
    da_alpha,
    immediate_acceptance,
    marriage_da,
    sd_alpha,
    serial_dictatorship,
    ttc,
    ttc_alpha,
)
from localpriority.axioms import (
    is_group_strategy_proof,
    is_pareto_efficient,
)
from localpriority.consistency import (
    is_backward_consistent,
    is_forward_consistent,
)

from conftest import A, B, C


def test_sd_social_dictatorship(inst3, social3):
    profile = ((A, B, C), (B, A, C), (B, A, C))
    assert serial_dictatorship(social3, (0, 1, 2), profile) == (A, A, A)


def test_sd_alpha_first_incompatible(inst3, social3):
    alpha = sd_alpha(social3, (0, 1, 2))
    assert alpha.cell(inst3.encode((A, B, B))) == {1}


def test_sd_equals_lp_on_random_constraints(inst3):
    rng = random.Random(99)
    codes = list(range(27))
    for _ in range(5):
        feasible = frozenset(rng.sample(codes, rng.randint(1, 27)))
        constraint = Constraint(inst3, feasible, ("explicit",))
        order = tuple(rng.sample(range(3), 3))
        lp_table = tabulate(sd_alpha(constraint, order))
        sd_table = tabulate_function(
            lambda p: serial_dictatorship(constraint, order, p), constraint
        )
        assert mechanisms_equal(lp_table, sd_table)


def test_cumulative_da_fixture_rounds(da_spec, da_profile):
    final, rounds = cumulative_da(da_spec, da_profile)
    assert final == (B, C, A)
    assert rounds == (
        (A, A, B),
        (A, B, B),
        (A, B, A),
        (B, B, A),
        (B, C, A),
    )


def test_da_alpha_cell_matches_first_rejection(inst3, da_spec):
    assert da_alpha(da_spec).cell(inst3.encode((A, A, B))) == {1}


def test_da_equals_lp(da_spec):
    lp_table = tabulate(da_alpha(da_spec))
    da_table = tabulate_function(
        lambda p: cumulative_da(da_spec, p)[0], da_spec.constraint()
    )
    assert mechanisms_equal(lp_table, da_table)


def test_slack_capacities_make_da_trivial(inst3):
    spec = SchoolSpec(inst3, (3, 3, 3), ((0, 1, 2),) * 3)
    alpha = da_alpha(spec)
    assert not alpha.cells
    for profile in [((C, B, A),) * 3, ((A, B, C), (A, C, B), (B, A, C))]:
        assert cumulative_da(spec, profile)[0] == tau(profile, 1)


def test_ttc_fixture(inst3, ttc_endowment, ttc_profile):
    assert ttc(ttc_endowment, ttc_profile) == (C, B, A)
    out = run_lp(ttc_alpha(ttc_endowment), ttc_profile)
    assert out.trace.allocations == ((A, B, A), (C, B, A))
    assert out.assignment == (C, B, A)


def test_ttc_alpha_pointer_cells(inst3, ttc_endowment):
    alpha = ttc_alpha(ttc_endowment)
    assert alpha.cell(inst3.encode((A, B, A))) == {0}
    assert alpha.cell(inst3.encode((A, A, B))) == {1}


def test_ttc_equals_lp_all_endowments(inst3):
    constraint = house_constraint(inst3)
    for owner in itertools.permutations(range(3)):
        endowment = Endowment(inst3, owner)
        lp_table = tabulate(ttc_alpha(endowment))
        ttc_table = tabulate_function(lambda p: ttc(endowment, p), constraint)
        assert mechanisms_equal(lp_table, ttc_table)


def test_ttc_is_pareto_efficient_and_gsp(ttc_endowment):
    table = tabulate(ttc_alpha(ttc_endowment))
    assert is_pareto_efficient(table).holds
    assert is_group_strategy_proof(table).holds


def test_da_alpha_is_forward_consistent(da_spec):
    assert is_forward_consistent(da_alpha(da_spec)).holds


def test_ttc_alpha_is_consistent_both_readings(ttc_endowment):
    alpha = ttc_alpha(ttc_endowment)
    assert is_forward_consistent(alpha).holds
    assert is_backward_consistent(alpha, "relaxed").holds
    assert is_backward_consistent(alpha, "strict").holds


def test_immediate_acceptance_fixture(ia_spec):
    assert immediate_acceptance(ia_spec, ((A, B, C), (A, B, C), (B, A, C))) == (C, A, B)
    assert immediate_acceptance(ia_spec, ((B, C, A), (A, B, C), (B, A, C))) == (B, A, C)


def test_immediate_acceptance_slack_capacities(inst3):
    spec = SchoolSpec(inst3, (3, 3, 3), ((0, 1, 2),) * 3)
    profile = ((B, A, C), (B, C, A), (A, B, C))
    assert immediate_acceptance(spec, profile) == tau(profile, 1)


def test_school_spec_validation(inst3):
    with pytest.raises(ValueError):
        SchoolSpec(inst3, (1, 1, 0), ((0, 1, 2),) * 3)
    with pytest.raises(ValueError):
        SchoolSpec(inst3, (1, 1, 1), ((0, 0, 2),) * 3)


def test_endowment_validation(inst3):
    with pytest.raises(ValueError):
        Endowment(inst3, (A, A, B))
    with pytest.raises(ValueError):
        Endowment(Instance(("1", "2"), ("a", "b", "c")), (A, B))


def test_marriage_da_reference_profiles(marriage_setup):
    inst, spec, profiles = marriage_setup
    M1, M2, M3, W1, W2, W3 = range(6)
    expected = [
        (W1, W2, W3, M1, M2, M3),
        (W1, W3, W2, M1, M3, M2),
        (W2, W3, W1, M3, M1, M2),
    ]
    for profile, want in zip(profiles, expected):
        assert marriage_da(spec, profile) == want


def test_marriage_profiles_share_top_vector(marriage_setup):
    inst, spec, profiles = marriage_setup
    mu = tau(profiles[0], 1)
    for profile in profiles:
        assert tau(profile, 1) == mu
    # the constraint rejects the top vector itself
    from localpriority.core import two_sided_constraint

    constraint = two_sided_constraint(inst, ("m1", "m2", "m3"), ("w1", "w2", "w3"))
    assert inst.encode(mu) not in constraint.feasible


def test_marriage_outcomes_empty_the_fixed_set(marriage_setup):
    inst, spec, profiles = marriage_setup
    mu = tau(profiles[0], 1)
    remaining = set(range(6))
    for profile in profiles:
        out = marriage_da(spec, profile)
        remaining &= {i for i in range(6) if out[i] != mu[i]}
    assert remaining == set()


def test_marriage_da_outputs_feasible_matchings(marriage_setup):
    inst, spec, profiles = marriage_setup
    from localpriority.core import two_sided_constraint

    constraint = two_sided_constraint(inst, ("m1", "m2", "m3"), ("w1", "w2", "w3"))
    for profile in profiles:
        assert inst.encode(marriage_da(spec, profile)) in constraint.feasible


def test_da_equals_lp_at_four_agents_spot_check():
    inst = Instance(("1", "2", "3", "4"), ("a", "b", "c"))
    spec = SchoolSpec(
        inst,
        (2, 1, 1),
        ((3, 0, 1, 2), (0, 1, 2, 3), (1, 3, 0, 2)),
    )
    lp_table = tabulate(da_alpha(spec))
    da_table = tabulate_function(
        lambda p: cumulative_da(spec, p)[0], spec.constraint()
    )
    assert mechanisms_equal(lp_table, da_table)


def test_sd_equals_lp_at_four_agents_spot_check():
    inst = Instance(("1", "2", "3", "4"), ("a", "b", "c"))
    rng = random.Random(4040)
    codes = list(range(81))
    feasible = frozenset(rng.sample(codes, 17))
    constraint = Constraint(inst, feasible, ("explicit",))
    order = (2, 0, 3, 1)
    lp_table = tabulate(sd_alpha(constraint, order))
    sd_table = tabulate_function(
        lambda p: serial_dictatorship(constraint, order, p), constraint
    )
    assert mechanisms_equal(lp_table, sd_table)
