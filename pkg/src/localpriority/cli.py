"""Command line interface: run the algorithm, check properties, derive
assignments from named mechanisms, enumerate, compare, render, and run named
mechanisms directly.

Exit codes: 0 success or property holds; 1 property violated (witness JSON on
stdout); 2 input or format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from . import fileio
from .axioms import (
    check_compromiser_invariance,
    check_fixed_compromiser,
    check_unanimity,
    is_group_strategy_proof,
    is_local_priority,
    is_maskin_monotonic,
    is_nonbossy,
    is_pareto_efficient,
    is_strategy_proof,
)
from .compare import check_agent_dominance, check_pointwise_dominance
from .consistency import is_backward_consistent, is_forward_consistent
from .core import CompromiserAssignment, Constraint, MalformedAssignmentError
from .engine import (
    Exhausted,
    MechanismTable,
    find_exhausting_profile,
    run_lp,
    tabulate,
    tabulate_function,
)
from .enumeration import EnumerationOptions, enumerate_consistent
from .mechanisms import (
    cumulative_da,
    immediate_acceptance,
    marriage_da,
    sd_alpha,
    serial_dictatorship,
    da_alpha,
    ttc,
    ttc_alpha,
)
from .render import RenderSpec, render

TABLE_PROPS = {
    "sp": is_strategy_proof,
    "gsp": is_group_strategy_proof,
    "nonbossy": is_nonbossy,
    "maskin": is_maskin_monotonic,
    "pe": is_pareto_efficient,
    "unanimity": check_unanimity,
    "fixed-compromiser": check_fixed_compromiser,
    "invariance": check_compromiser_invariance,
}
ALPHA_PROPS = ("forward", "backward", "implementable")
ALL_PROPS = tuple(TABLE_PROPS) + ALPHA_PROPS + ("local-priority",)


def _read_json(path: str) -> Any:
    with open(path) as fh:
        return json.load(fh)


def _load_constraint_arg(args: argparse.Namespace) -> Constraint | None:
    if getattr(args, "constraint", None):
        return fileio.load_constraint(_read_json(args.constraint))
    return None


def _load_alpha_arg(args: argparse.Namespace) -> CompromiserAssignment:
    constraint = _load_constraint_arg(args)
    return fileio.load_alpha(_read_json(args.alpha), constraint)


def _emit(doc: Any) -> None:
    sys.stdout.write(fileio.dumps(doc))


def cmd_run(args: argparse.Namespace) -> int:
    alpha = _load_alpha_arg(args)
    inst = alpha.instance
    profile = fileio.load_profile(_read_json(args.profile), inst)
    outcome = run_lp(alpha, profile)
    if isinstance(outcome, Exhausted):
        _emit(
            {
                "exhausted": {
                    "agent": inst.agents[outcome.agent],
                    "step": outcome.step,
                    "allocations": [
                        list(inst.assignment_names(a))
                        for a in outcome.trace.allocations
                    ],
                }
            }
        )
        return 1
    doc: dict[str, Any] = {"final": list(inst.assignment_names(outcome.assignment))}
    if args.trace:
        doc["trace"] = [
            {
                "allocation": list(inst.assignment_names(a)),
                "compromisers": [inst.agents[i] for i in sorted(moved)],
            }
            for a, moved in outcome.trace.steps
        ]
    _emit(doc)
    return 0


def _mechanism_table(args: argparse.Namespace) -> MechanismTable:
    name = args.mechanism
    if name == "sd":
        constraint = _load_constraint_arg(args)
        if constraint is None or not args.order:
            raise ValueError("sd needs --constraint and --order")
        order = fileio.load_order(_read_json(args.order), constraint.instance)
        return tabulate_function(
            lambda p: serial_dictatorship(constraint, order, p), constraint
        )
    if name in ("da", "ia"):
        spec = fileio.load_school_spec(_read_json(args.spec))
        fn = (
            (lambda p: cumulative_da(spec, p)[0])
            if name == "da"
            else (lambda p: immediate_acceptance(spec, p))
        )
        return tabulate_function(fn, spec.constraint())
    if name == "ttc":
        constraint = _load_constraint_arg(args)
        if constraint is None:
            raise ValueError("ttc needs --constraint (a house constraint)")
        endowment = fileio.load_endowment(_read_json(args.endowment), constraint.instance)
        return tabulate_function(lambda p: ttc(endowment, p), constraint)
    raise ValueError(f"cannot tabulate mechanism {name!r}")


def cmd_check(args: argparse.Namespace) -> int:
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    for p in props:
        if p not in ALL_PROPS:
            raise ValueError(f"unknown property {p!r}; choose from {ALL_PROPS}")

    alpha = None
    table = None
    if args.alpha:
        alpha = _load_alpha_arg(args)
    elif args.mechanism:
        table = _mechanism_table(args)
    else:
        raise ValueError("check needs --alpha or --mechanism")

    def get_table() -> MechanismTable:
        nonlocal table
        if table is None:
            table = tabulate(alpha)
        return table

    results = []
    all_hold = True
    for prop in props:
        if prop in ALPHA_PROPS:
            if alpha is None:
                raise ValueError(f"property {prop!r} needs --alpha")
            if prop == "forward":
                verdict = is_forward_consistent(alpha)
            elif prop == "backward":
                verdict = is_backward_consistent(alpha, args.reading)
            else:
                witness = find_exhausting_profile(alpha)
                inst = alpha.instance
                results.append(
                    {
                        "prop": prop,
                        "holds": witness is None,
                        "witness": None
                        if witness is None
                        else {"profile": fileio.dump_profile(witness, inst)},
                    }
                )
                all_hold = all_hold and witness is None
                continue
        elif prop == "local-priority":
            lp = is_local_priority(get_table())
            results.append(
                {
                    "prop": prop,
                    "holds": lp.is_lp,
                    "failed": lp.failed,
                    "witness": fileio.witness_to_json(lp.witness, get_table().instance),
                }
            )
            all_hold = all_hold and lp.is_lp
            continue
        elif prop == "gsp":
            verdict = is_group_strategy_proof(get_table(), exhaustive=args.exhaustive)
        else:
            verdict = TABLE_PROPS[prop](get_table())
        inst = alpha.instance if alpha is not None else get_table().instance
        results.append(
            {
                "prop": prop,
                "holds": verdict.holds,
                "witness": fileio.witness_to_json(verdict.witness, inst),
            }
        )
        all_hold = all_hold and verdict.holds
    _emit({"results": results})
    return 0 if all_hold else 1


def cmd_derive(args: argparse.Namespace) -> int:
    name = args.mechanism
    if name == "sd":
        constraint = _load_constraint_arg(args)
        if constraint is None or not args.order:
            raise ValueError("sd needs --constraint and --order")
        order = fileio.load_order(_read_json(args.order), constraint.instance)
        alpha = sd_alpha(constraint, order)
    elif name == "da":
        spec = fileio.load_school_spec(_read_json(args.spec))
        alpha = da_alpha(spec)
    elif name == "ttc":
        constraint = _load_constraint_arg(args)
        if constraint is None:
            raise ValueError("ttc needs --constraint (a house constraint)")
        endowment = fileio.load_endowment(_read_json(args.endowment), constraint.instance)
        alpha = ttc_alpha(endowment)
    else:
        raise ValueError(f"cannot derive from mechanism {name!r}")
    doc = fileio.dumps(fileio.dump_alpha(alpha))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    return 0


def cmd_enumerate(args: argparse.Namespace) -> int:
    constraint = _load_constraint_arg(args)
    if constraint is None:
        raise ValueError("enumerate needs --constraint")
    require_forward = args.forward or not (args.forward or args.backward)
    require_backward = args.backward or not (args.forward or args.backward)
    options = EnumerationOptions(
        reading=args.reading,
        require_forward=require_forward,
        require_backward=require_backward,
        quotient_symmetry=args.quotient,
        dedupe_by_mechanism=args.dedupe,
        budget=args.budget,
    )
    result = enumerate_consistent(constraint, options)
    if args.quotient:
        stream = [alpha for alpha, _ in result.representatives]
    elif args.dedupe:
        stream = [
            result.assignments[members[0]]
            for members in result.mechanism_groups.values()
        ]
        stream.sort(key=lambda a: sorted(a.cells.items()))
    else:
        stream = result.assignments
    for alpha in stream:
        sys.stdout.write(
            json.dumps(fileio.dump_alpha(alpha), sort_keys=True) + "\n"
        )
    sys.stdout.write(json.dumps({"summary": result.summary()}, sort_keys=True) + "\n")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    alpha = _load_alpha_arg(args)
    alpha2 = fileio.load_alpha(_read_json(args.alpha2), None)
    if args.mode == "pointwise":
        report = check_pointwise_dominance(alpha, alpha2)
    else:
        if not args.agent:
            raise ValueError("agent mode needs --agent")
        agent = alpha.instance.agent_index(args.agent)
        report = check_agent_dominance(alpha, alpha2, agent, args.reading)
    _emit(
        {
            "mode": report.mode,
            "holds": report.holds,
            "hypothesis_failures": list(report.hypothesis_failures),
            "witness": fileio.witness_to_json(report.witness, alpha.instance),
        }
    )
    return 0 if report.holds else 1


def cmd_render(args: argparse.Namespace) -> int:
    if args.alpha:
        target: CompromiserAssignment | Constraint = _load_alpha_arg(args)
    else:
        constraint = _load_constraint_arg(args)
        if constraint is None:
            raise ValueError("render needs --alpha or --constraint")
        target = constraint
    doc = render(target, RenderSpec(args.format))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    return 0


def cmd_mechanisms(args: argparse.Namespace) -> int:
    name = args.mechanism
    if name in ("da", "ia"):
        spec = fileio.load_school_spec(_read_json(args.spec))
        inst = spec.instance
        profile = fileio.load_profile(_read_json(args.profile), inst)
        if name == "da":
            final, rounds = cumulative_da(spec, profile)
            doc = {"allocation": list(inst.assignment_names(final))}
            if args.rounds:
                doc["rounds"] = [list(inst.assignment_names(r)) for r in rounds]
        else:
            doc = {
                "allocation": list(
                    inst.assignment_names(immediate_acceptance(spec, profile))
                )
            }
    elif name == "sd":
        constraint = _load_constraint_arg(args)
        if constraint is None or not args.order:
            raise ValueError("sd needs --constraint and --order")
        inst = constraint.instance
        order = fileio.load_order(_read_json(args.order), inst)
        profile = fileio.load_profile(_read_json(args.profile), inst)
        doc = {
            "allocation": list(
                inst.assignment_names(serial_dictatorship(constraint, order, profile))
            )
        }
    elif name == "ttc":
        constraint = _load_constraint_arg(args)
        if constraint is None:
            raise ValueError("ttc needs --constraint (a house constraint)")
        inst = constraint.instance
        endowment = fileio.load_endowment(_read_json(args.endowment), inst)
        profile = fileio.load_profile(_read_json(args.profile), inst)
        doc = {"allocation": list(inst.assignment_names(ttc(endowment, profile)))}
    elif name == "marriage":
        spec = fileio.load_marriage_spec(_read_json(args.spec))
        inst = spec.instance
        profile = fileio.load_profile(_read_json(args.profile), inst)
        doc = {"allocation": list(inst.assignment_names(marriage_da(spec, profile)))}
    else:
        raise ValueError(f"unknown mechanism {name!r}")
    _emit(doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lp", description="local priority mechanism workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the local priority algorithm")
    run.add_argument("--constraint")
    run.add_argument("--alpha", required=True)
    run.add_argument("--profile", required=True)
    run.add_argument("--trace", action="store_true")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="check properties of an assignment or mechanism")
    check.add_argument("--props", required=True)
    check.add_argument("--constraint")
    check.add_argument("--alpha")
    check.add_argument("--mechanism", choices=["sd", "da", "ttc", "ia"])
    check.add_argument("--spec")
    check.add_argument("--order")
    check.add_argument("--endowment")
    check.add_argument("--reading", choices=["strict", "relaxed"], default="strict")
    check.add_argument("--exhaustive", action="store_true")
    check.set_defaults(func=cmd_check)

    derive = sub.add_parser("derive", help="build an assignment file from a named mechanism")
    derive.add_argument("--mechanism", required=True, choices=["sd", "da", "ttc"])
    derive.add_argument("--constraint")
    derive.add_argument("--spec")
    derive.add_argument("--order")
    derive.add_argument("--endowment")
    derive.add_argument("--out")
    derive.set_defaults(func=cmd_derive)

    enum = sub.add_parser("enumerate", help="enumerate consistent assignments")
    enum.add_argument("--constraint", required=True)
    enum.add_argument("--forward", action="store_true")
    enum.add_argument("--backward", action="store_true")
    enum.add_argument("--reading", choices=["strict", "relaxed"], default="strict")
    enum.add_argument("--quotient", action="store_true")
    enum.add_argument("--dedupe", action="store_true")
    enum.add_argument("--budget", type=int, default=50_000_000)
    enum.set_defaults(func=cmd_enumerate)

    comp = sub.add_parser("compare", help="welfare comparison between two assignments")
    comp.add_argument("--alpha", required=True)
    comp.add_argument("--alpha2", required=True)
    comp.add_argument("--constraint")
    comp.add_argument("--agent")
    comp.add_argument("--mode", choices=["pointwise", "agent"], default="pointwise")
    comp.add_argument("--reading", choices=["strict", "relaxed"], default="strict")
    comp.set_defaults(func=cmd_compare)

    rend = sub.add_parser("render", help="render a constraint or assignment grid")
    rend.add_argument("--constraint")
    rend.add_argument("--alpha")
    rend.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    rend.add_argument("--out")
    rend.set_defaults(func=cmd_render)

    mech = sub.add_parser("mechanisms", help="run a named mechanism directly")
    mech.add_argument(
        "--mechanism", required=True, choices=["sd", "da", "ttc", "ia", "marriage"]
    )
    mech.add_argument("--constraint")
    mech.add_argument("--spec")
    mech.add_argument("--order")
    mech.add_argument("--endowment")
    mech.add_argument("--profile", required=True)
    mech.add_argument("--rounds", action="store_true")
    mech.set_defaults(func=cmd_mechanisms)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedAssignmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
