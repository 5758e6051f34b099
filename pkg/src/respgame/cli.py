"""Command-line front end; exit codes: 0 ok, 1 analysis refusal, 2 input error."""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import exports
from .errors import AnalysisTimeout, InputError, RefusalError
from .explicit import build_system, load_explicit, serialize_explicit
from .games import FORWARD, MODES, OPTIMISTIC, PESSIMISTIC
from .generators import FAMILIES, generate
from .grouping import (BY_LABEL, BY_MODULE, EXPLICIT_LIST, GroupingSpec,
                       load_grouping_file, resolve_grouping)
from .model import (BUECHI, OBJECTIVE_KINDS, PARITY, REACHABILITY,
                    LassoRun, NoViolation, Objective, find_violating_run,
                    validate_run, violates)
from .modlang import DEFAULT_STATE_CAP, expand_program, load_program
from .positivity import positivity_buechi_opt_all, positivity_reach_opt
from .refinement import (DEFAULT_BLOCK_CAP, HeuristicsConfig,
                         REFINE_HEURISTICS, SELECT_HEURISTICS, refine_loop,
                         responsibility_via_refinement)
from .shapley import (DEFAULT_ORACLE_CAP, DEFAULT_SHAPLEY_CAP, PayoffGame,
                      PlayerSet, ResponsibilityReport, oracle_minimal_winning,
                      oracle_shapley, prune_dummies, shapley_exact)


def _add_model_flags(sub):
    sub.add_argument("model", help="model file (explicit document or program)")
    sub.add_argument("--lang", choices=("auto", "explicit", "program"),
                     default="auto", help="input format (default: sniff)")
    sub.add_argument("--mode", choices=MODES, default=PESSIMISTIC)
    sub.add_argument("--objective", choices=OBJECTIVE_KINDS,
                     help="override the document objective kind")
    sub.add_argument("--target", action="append", default=None,
                     metavar="STATE", help="objective target state (repeat)")
    sub.add_argument("--target-label", metavar="LABEL",
                     help="objective target via a program label")
    sub.add_argument("--colour", action="append", default=None,
                     metavar="LABEL=N",
                     help="parity colour for label states (repeat)")
    sub.add_argument("--run-prefix", metavar="S1,S2,...",
                     help="counterexample prefix override")
    sub.add_argument("--run-loop", metavar="S1,S2,...",
                     help="counterexample loop override")
    sub.add_argument("--find-run", action="store_true",
                     help="search a violating run instead of requiring one")
    sub.add_argument("--groups", metavar="FILE",
                     help="explicit-list grouping document")
    sub.add_argument("--group-by-module", action="store_true",
                     help="group by program owner declarations")
    sub.add_argument("--group-by-label", action="append", default=None,
                     metavar="LABEL", help="group by label truth (repeat)")
    sub.add_argument("--no-prune", action="store_true",
                     help="keep provably-null states as players")
    sub.add_argument("--player-cap", type=int, default=DEFAULT_SHAPLEY_CAP)
    sub.add_argument("--block-cap", type=int, default=DEFAULT_BLOCK_CAP)
    sub.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP)
    sub.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP,
                     help="program expansion state-space cap")
    sub.add_argument("--preorder-literal", action="store_true",
                     help="use the unmodified graph for the run preorder")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker hint; never changes results")
    sub.add_argument("--timeout-s", type=float, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--format", choices=("table", "records", "dot"),
                     default="table")
    sub.add_argument("-o", "--output", metavar="FILE",
                     help="write the result here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="respgame",
        description="Backward responsibility values for lasso counterexamples "
                    "in finite transition systems.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("analyze", "exact Shapley responsibility for every player"),
            ("positivity", "the set of players with positive responsibility"),
            ("refine", "positivity (and values) via partition refinement"),
            ("oracle", "brute-force reference computation"),
            ("export", "run an analysis and write records or DOT")):
        sub = subs.add_parser(name, help=helptext)
        _add_model_flags(sub)
        if name == "refine":
            sub.add_argument("--initial-blocks", type=int, default=1)
            sub.add_argument("--select", choices=SELECT_HEURISTICS,
                             default="random")
            sub.add_argument("--refine", choices=REFINE_HEURISTICS,
                             default="frontier-random")
            sub.add_argument("--explain", action="store_true",
                             help="print the refinement trace")
            sub.add_argument("--no-values", action="store_true",
                             help="stop after the positivity set")
        if name == "oracle":
            sub.add_argument("--minimal-coalitions", action="store_true",
                             help="also count minimal winning coalitions")
        if name == "export":
            sub.add_argument("--using", choices=("analyze", "refine"),
                             default="analyze")
            sub.add_argument("--initial-blocks", type=int, default=1)
            sub.add_argument("--select", choices=SELECT_HEURISTICS,
                             default="random")
            sub.add_argument("--refine", choices=REFINE_HEURISTICS,
                             default="frontier-random")
    gen = subs.add_parser("generate", help="emit a benchmark model document")
    gen.add_argument("--family", choices=FAMILIES, required=True)
    gen.add_argument("--size", type=int, default=0)
    gen.add_argument("--clean", action="store_true",
                     help="centrifuge-analog only: omit the injected bug")
    gen.add_argument("-o", "--output", metavar="FILE")
    return parser


class _Deadline:
    def __init__(self, seconds):
        self.t0 = time.monotonic()
        self.seconds = seconds

    def __call__(self):
        if self.seconds is not None and time.monotonic() - self.t0 > self.seconds:
            raise AnalysisTimeout(f"timeout after {self.seconds} s")


def _split_names(text):
    return [part for part in (text or "").split(",") if part]


class LoadedModel:
    def __init__(self, ts, objective, run, labels, owners, players):
        self.ts = ts
        self.objective = objective
        self.run = run
        self.labels = labels
        self.owners = owners
        self.players = players


def _load_model(args) -> LoadedModel:
    lang = args.lang
    if lang == "auto":
        with open(args.model, "r", encoding="utf-8") as fh:
            head = fh.read(4096).lstrip()
        lang = "explicit" if head.startswith("{") else "program"
    labels = {}
    owners = {}
    doc_run = None
    group_doc = None
    if lang == "explicit":
        doc = load_explicit(args.model)
        ts, objective, doc_run = build_system(doc)
        group_doc = doc.groups
    else:
        prog = load_program(args.model)
        expanded = expand_program(prog, max_states=args.state_cap)
        ts = expanded.ts
        labels = expanded.labels
        owners = expanded.owners
        objective = None
    objective = _objective_from_flags(args, ts, labels, objective)
    if objective is None:
        raise InputError("no objective: pass --objective/--target flags")
    run = _run_from_flags(args, ts, objective, doc_run)
    players = _players_from_flags(args, ts, objective, run, labels, owners,
                                  group_doc)
    return LoadedModel(ts, objective, run, labels, owners, players)


def _objective_from_flags(args, ts, labels, fallback):
    kind = args.objective
    if kind is None and args.target is None and args.target_label is None \
            and args.colour is None:
        return fallback
    if kind is None:
        raise InputError("--target/--colour flags need --objective")
    if kind == PARITY:
        colours = [0] * len(ts)
        for item in args.colour or []:
            if "=" not in item:
                raise InputError(f"bad --colour {item!r}; use LABEL=N")
            label, _, num = item.partition("=")
            if label not in labels:
                raise InputError(f"unknown label {label!r}")
            for s in labels[label]:
                colours[s] = max(colours[s], int(num))
        return Objective(PARITY, colours=tuple(colours))
    target = set()
    for name in args.target or []:
        target.add(ts.index_of(name))
    if args.target_label:
        if args.target_label not in labels:
            raise InputError(f"unknown label {args.target_label!r}")
        target |= labels[args.target_label]
    return Objective(kind, target=frozenset(target))


def _run_from_flags(args, ts, objective, doc_run):
    if args.run_loop:
        prefix = tuple(ts.index_of(s) for s in _split_names(args.run_prefix))
        loop = tuple(ts.index_of(s) for s in _split_names(args.run_loop))
        run = LassoRun(prefix, loop)
    elif args.find_run:
        run = None
    else:
        run = doc_run
    if run is None:
        if args.mode == FORWARD:
            return None
        return find_violating_run(ts, objective)
    issue = validate_run(ts, run)
    if issue is not None:
        raise InputError(f"invalid run: {issue.message} (position {issue.position})")
    if not violates(ts, objective, run):
        raise InputError("the given run does not violate the objective")
    return run


def _players_from_flags(args, ts, objective, run, labels, owners, group_doc):
    grouping = None
    if args.groups:
        grouping = load_grouping_file(args.groups)
    elif args.group_by_module:
        grouping = GroupingSpec(BY_MODULE)
    elif args.group_by_label:
        grouping = GroupingSpec(BY_LABEL,
                                label_names=tuple(args.group_by_label))
    elif group_doc:
        grouping = GroupingSpec(EXPLICIT_LIST, blocks=group_doc)
    if grouping is not None:
        return resolve_grouping(grouping, ts, labels=labels, owners=owners)
    if args.no_prune:
        return PlayerSet.of_states(ts, range(len(ts)))
    return prune_dummies(ts, objective, run, args.mode)


def _emit(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _full_report(pg, report) -> ResponsibilityReport:
    """Extend a player-set report with zero rows for pruned states."""
    if pg.players.kind != "states":
        return report
    ts = pg.ts
    values = []
    have = dict(zip(report.names, report.values))
    for name in ts.names:
        values.append(have.get(name, Fraction(0)))
    return ResponsibilityReport("states", report.mode, ts.names, tuple(values),
                                report.games_solved, report.memo_hits)


def _cmd_analyze(args) -> int:
    model = _load_model(args)
    pg = PayoffGame(model.ts, model.objective, model.run, args.mode,
                    model.players)
    note = None
    report = shapley_exact(pg, cap=args.player_cap, threads=args.threads,
                           deadline=_Deadline(args.timeout_s))
    if pg.gamma(pg.full_mask()) == 0:
        note = "objective unsatisfiable; all responsibilities 0"
    report = _full_report(pg, report)
    if args.format == "table":
        _emit(args, exports.render_table(report, note=note))
    elif args.format == "records":
        _emit(args, exports.records_document(report))
    else:
        _emit(args, exports.dot_document(pg, report))
    return 0


def _cmd_positivity(args) -> int:
    model = _load_model(args)
    if args.mode == OPTIMISTIC and model.objective.kind == REACHABILITY \
            and model.players.kind == "states":
        positive = positivity_reach_opt(model.ts, model.objective.target,
                                        model.run)
    elif args.mode == OPTIMISTIC and model.objective.kind == BUECHI \
            and model.players.kind == "states":
        positive = positivity_buechi_opt_all(
            model.ts, model.objective.target, model.run,
            preorder_literal=args.preorder_literal)
    else:
        pg = PayoffGame(model.ts, model.objective, model.run, args.mode,
                        model.players)
        config = HeuristicsConfig(rng_seed=args.seed)
        result = refine_loop(pg, config, cap=args.block_cap)
        positive = frozenset(pg.players.names[p] for p in result.responsible)
    lines = [f"positive responsibility: "
             f"{{{', '.join(sorted(positive)) if positive else ''}}}"]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_refine(args) -> int:
    model = _load_model(args)
    pg = PayoffGame(model.ts, model.objective, model.run, args.mode,
                    model.players)
    config = HeuristicsConfig(initial_blocks=args.initial_blocks,
                              select=args.select, refine=args.refine,
                              rng_seed=args.seed)
    deadline = _Deadline(args.timeout_s)
    if args.no_values:
        result = refine_loop(pg, config, cap=args.block_cap,
                             deadline=deadline)
        names = sorted(pg.players.names[p] for p in result.responsible)
        text = ""
        if args.explain:
            text += exports.render_trace_text(result.trace)
        text += (f"responsible ({len(names)} of {len(pg.players)} players, "
                 f"{result.split_count} splits): {{{', '.join(names)}}}\n")
        _emit(args, text)
        return 0
    report, result = responsibility_via_refinement(
        pg, config, block_cap=args.block_cap, shapley_cap=args.player_cap,
        deadline=deadline)
    report = _full_report(pg, report)
    if args.format == "records":
        _emit(args, exports.records_document(report, refinement=result))
    elif args.format == "dot":
        _emit(args, exports.dot_document(pg, report))
    else:
        text = ""
        if args.explain:
            text = exports.render_trace_text(result.trace)
        text += exports.render_table(report)
        _emit(args, text)
    return 0


def _cmd_oracle(args) -> int:
    model = _load_model(args)
    if model.players.kind != "states":
        raise InputError("the oracle works on state players")
    indices = [model.ts.index_of(n) for n in model.players.names]
    report = oracle_shapley(model.ts, model.objective, model.run, args.mode,
                            indices, cap=args.oracle_cap)
    report = _full_report(
        PayoffGame(model.ts, model.objective, model.run, args.mode,
                   model.players), report)
    text = exports.render_table(report)
    if args.minimal_coalitions:
        minimal = oracle_minimal_winning(model.ts, model.objective, model.run,
                                         args.mode, indices,
                                         cap=args.oracle_cap)
        text += f"minimal winning coalitions: {len(minimal)}\n"
    _emit(args, text)
    return 0


def _cmd_export(args) -> int:
    args.format = "records" if args.format == "table" else args.format
    if args.using == "refine":
        args.explain = False
        args.no_values = False
        return _cmd_refine(args)
    return _cmd_analyze(args)


def _cmd_generate(args) -> int:
    doc = generate(args.family, args.size, bug=not args.clean)
    text = serialize_explicit(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "positivity": _cmd_positivity,
    "refine": _cmd_refine,
    "oracle": _cmd_oracle,
    "export": _cmd_export,
    "generate": _cmd_generate,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return _COMMANDS[args.command](args)
    except NoViolation as exc:
        sys.stdout.write(f"nothing to explain: {exc}\n")
        return 0
    except RefusalError as exc:
        sys.stderr.write(f"refused: {exc}\n")
        if exc.guidance:
            sys.stderr.write(f"hint: {exc.guidance}\n")
        return 1
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
