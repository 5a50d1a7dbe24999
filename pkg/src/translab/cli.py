"""Command-line entry point.

Exit codes: 0 success, 2 a checked property failed, 3 a search budget was
exceeded, 4 a protocol violation.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import experiments
from .dimensions import DIM_NAMES, DimensionBudget, dimension_report
from .errors import BudgetExceeded, ContractViolation, ProtocolViolation
from .game import DEFAULT_GAME_BUDGET, GameBudget, best_sequence, play_agnostic, run_realizable
from .hypothesis import as_explicit, read_hyp, write_hyp
from .strategies import ADVERSARIES, LEARNERS
from .trees import (bitstring, littlestone_witness_tree, ramsey_guarantee, ramsey_multi_color, ramsey_two_color,
                    read_ltree, shatters, verify_mono_subtree, write_ltree)
from .zoo import ClassSpec

EXIT_OK, EXIT_ASSERT, EXIT_BUDGET, EXIT_PROTOCOL = 0, 2, 3, 4


class CheckFailed(Exception):
    pass


def _int_range(text: str) -> list[int]:
    """'3' or '1..5' (inclusive)."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_class(args):
    if getattr(args, "cls", None):
        return read_hyp(args.cls)
    if getattr(args, "family", None):
        return ClassSpec(args.family, tuple(args.param or ()), args.seed).build()
    raise ContractViolation("give --class FILE or --family NAME --param ...")


def _game_budget(args) -> GameBudget:
    if args.budget_states is None:
        return DEFAULT_GAME_BUDGET
    return GameBudget(DEFAULT_GAME_BUDGET.max_instances, DEFAULT_GAME_BUDGET.max_hypotheses, args.budget_states)


def _dim_budget(args) -> DimensionBudget:
    base = DimensionBudget()
    if args.budget_states is None:
        return base
    return DimensionBudget(base.max_instances, base.max_hypotheses, args.budget_states)


# -- subcommands ------------------------------------------------------------------------

def cmd_dims(args):
    cls = _load_class(args)
    which = args.dim or list(DIM_NAMES)
    if cls.label_count != 2 and "vc" in which and args.dim:
        raise ContractViolation("vc is defined for binary classes only; use nd")
    rep = dimension_report(cls, which, _dim_budget(args), witnesses=args.witness)
    lines = [f"{name} {value}" for name, value in rep.items() if value is not None]
    if args.witness:
        for name, w in rep.witnesses.items():
            lines.append(f"# {name} witness {w}")
    _emit(args, "\n".join(lines) + "\n")


def cmd_value(args):
    cls = _load_class(args)
    if args.bounds:
        lower, upper = experiments.value_bracket(cls, args.n)
        _emit(args, f"lower {lower}\nupper {upper}\n")
        return
    value, seq = best_sequence(cls, args.n, _game_budget(args))
    _emit(args, f"M {value}\nsequence {' '.join(map(str, seq))}\n")


def cmd_play(args):
    cls = _load_class(args)
    learner = LEARNERS[args.learner]()
    adversary = ADVERSARIES[args.adversary]()
    if adversary.realizable:
        tr = run_realizable(cls, adversary, learner, args.n, args.seed)
    else:
        tr = play_agnostic(cls, adversary, learner, args.n, args.seed)
    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(tr.to_csv())
    _emit(args, f"mistakes {tr.mistakes}\n")


def cmd_zoo_emit(args):
    cls = ClassSpec(args.family, tuple(args.param or ()), args.seed).build()
    cls = as_explicit(cls)
    if not args.out:
        raise ContractViolation("zoo emit needs --out FILE.hyp")
    write_hyp(cls, args.out)


def cmd_tree_verify(args):
    cls = _load_class(args)
    tree = read_ltree(args.tree)
    witness = shatters(cls, tree)
    if witness is None:
        _emit(args, "shattered no\n")
        raise CheckFailed("the class does not shatter the tree")
    lines = ["shattered yes"]
    if args.witness:
        lines += [f"# branch {bits} -> h {h}" for bits, h in sorted(witness.items())]
    _emit(args, "\n".join(lines) + "\n")


def cmd_tree_ramsey(args):
    tree = read_ltree(args.tree)
    colors = [int(c) for c in args.colors.split(",")]
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise ContractViolation("give both --p and --q")
        mono = ramsey_two_color(tree, colors, args.p, args.q)
        need = args.p if mono.color == 0 else args.q
    else:
        mono = ramsey_multi_color(tree, colors)
        need = math.ceil(ramsey_guarantee(tree.depth, max(colors) + 1))
    ok = verify_mono_subtree(tree.depth, mono.nodes, colors, mono.color, need)
    nodes = " ".join(bitstring(p) for p in sorted(mono.nodes))
    _emit(args, f"color {mono.color}\nlevels {mono.levels}\nnodes {nodes}\nverified {'yes' if ok else 'no'}\n")
    if not ok:
        raise CheckFailed("monochromatic subtree failed verification")


def cmd_tree_witness(args):
    tree = littlestone_witness_tree(as_explicit(_load_class(args)))
    if not args.out:
        raise ContractViolation("tree witness needs --out FILE.ltree")
    write_ltree(tree, args.out)


def cmd_sweep_trichotomy(args):
    config = experiments.SweepConfig(args.family, args.param_range, args.n_range, args.seed, args.timing,
                                     _game_budget(args))
    rows, bad = experiments.trichotomy_sweep(config)
    _emit(args, experiments.sweep_csv(config, rows))
    if bad:
        raise CheckFailed("\n".join(bad))


def cmd_sweep_agnostic(args):
    spec = ClassSpec(args.family, tuple(args.param or ()), args.seed)
    cases = [experiments.AgnosticCase(spec, n, args.trials, args.adversary, args.seed) for n in args.n_range]
    rows, bad = experiments.agnostic_sweep(cases, args.tolerance)
    _emit(args, experiments.agnostic_csv(cases, rows))
    if bad:
        raise CheckFailed("\n".join(bad))


def cmd_khinchine(args):
    lines = ["k,expected_abs_sum,bound,holds,tight"]
    bad = []
    for k in args.k:
        r = experiments.khinchine_exact(k)
        lines.append(f"{k},{r.expected_abs_sum},{r.bound:.6f},{int(r.holds())},{int(r.is_tight())}")
        if not r.holds():
            bad.append(f"k={k}: E|sum| = {r.expected_abs_sum} < sqrt(k/2)")
    _emit(args, "\n".join(lines) + "\n")
    if bad:
        raise CheckFailed("\n".join(bad))


# -- parser ---------------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--budget-states", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS)
    p.add_argument("--tolerance", type=float, default=argparse.SUPPRESS,
                   help="confidence multiplier in standard errors (default 3)")
    return p


def _class_args(p):
    p.add_argument("--class", dest="cls", metavar="FILE", help="HYP file")
    p.add_argument("--family", help="zoo family instead of a file")
    p.add_argument("--param", type=int, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="translab", parents=[common],
                                     description="Transductive online learning toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", parents=[common], help="combinatorial dimensions of a class")
    _class_args(p)
    p.add_argument("--dim", action="append", choices=DIM_NAMES)
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("value", parents=[common], help="transductive mistake value")
    _class_args(p)
    p.add_argument("--n", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--bounds", action="store_true")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("play", parents=[common], help="play one game and report mistakes")
    _class_args(p)
    p.add_argument("--learner", choices=sorted(LEARNERS), required=True)
    p.add_argument("--adversary", choices=sorted(ADVERSARIES), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--transcript", metavar="CSV")
    p.set_defaults(func=cmd_play)

    zoo = sub.add_parser("zoo", help="class generators").add_subparsers(dest="action", required=True)
    p = zoo.add_parser("emit", parents=[common], help="write a zoo class as HYP")
    p.add_argument("--family", required=True)
    p.add_argument("--param", type=int, nargs="*")
    p.set_defaults(func=cmd_zoo_emit)

    tree = sub.add_parser("tree", help="Littlestone tree tools").add_subparsers(dest="action", required=True)
    p = tree.add_parser("verify", parents=[common], help="check that a class shatters a tree")
    _class_args(p)
    p.add_argument("--tree", required=True)
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_tree_verify)
    p = tree.add_parser("ramsey", parents=[common], help="monochromatic subtree of a colored tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--colors", required=True, help="comma-separated color per node, breadth-first")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.set_defaults(func=cmd_tree_ramsey)
    p = tree.add_parser("witness", parents=[common], help="write a shattered tree of maximal depth")
    _class_args(p)
    p.set_defaults(func=cmd_tree_witness)

    sweep = sub.add_parser("sweep", help="parameter sweeps").add_subparsers(dest="action", required=True)
    p = sweep.add_parser("trichotomy", parents=[common], help="M(H, n) across a family")
    p.add_argument("--family", choices=experiments.SWEEP_FAMILIES, required=True)
    p.add_argument("--param-range", type=_int_range, required=True)
    p.add_argument("--n-range", type=_int_range, required=True)
    p.add_argument("--timing", action="store_true", help="fill the seconds column")
    p.set_defaults(func=cmd_sweep_trichotomy)
    p = sweep.add_parser("agnostic", parents=[common], help="Monte Carlo regret against the bounds")
    p.add_argument("--family", required=True)
    p.add_argument("--param", type=int, nargs="*")
    p.add_argument("--n-range", type=_int_range, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--adversary", choices=("blocks", "uniform"), default="blocks")
    p.set_defaults(func=cmd_sweep_agnostic)

    p = sub.add_parser("khinchine", parents=[common], help="exact E|sum of k signs| against sqrt(k/2)")
    p.add_argument("--k", type=_int_range, required=True)
    p.set_defaults(func=cmd_khinchine)
    return parser


DEFAULTS = {"seed": 0, "budget_states": None, "out": None, "tolerance": 3.0}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        args.func(args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ProtocolViolation as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
