"""Explicit-graph model documents: parsing, validation and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import InputError
from .model import (OBJECTIVE_KINDS, PARITY, LassoRun, Objective,
                    TransitionSystem)

_TOP_FIELDS = {"states", "initial", "transitions", "objective", "run", "groups"}
_OBJECTIVE_FIELDS = {"kind", "target", "colours"}
_RUN_FIELDS = {"prefix", "loop"}


@dataclass
class ExplicitModelDoc:
    """Name-based surface of a model file; see README for the schema.

    Kept deliberately close to the wire format so parse -> serialize ->
    parse is a fixpoint.
    """

    states: List[str]
    initial: str
    transitions: List[Tuple[str, str]]
    objective_kind: str
    target: Optional[List[str]] = None
    colours: Optional[Dict[str, int]] = None
    run_prefix: Optional[List[str]] = None
    run_loop: Optional[List[str]] = None
    groups: Optional[Dict[str, List[str]]] = None

    def has_run(self) -> bool:
        return self.run_loop is not None


def parse_explicit(text: str) -> ExplicitModelDoc:
    """Parse and structurally validate an explicit model document.

    Syntax errors carry line/column; semantic errors name the offending
    state or field.  Unknown fields are rejected.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise InputError("document must be an object")
    unknown = set(raw) - _TOP_FIELDS
    if unknown:
        raise InputError(f"unknown fields: {', '.join(sorted(unknown))}")
    for required in ("states", "initial", "transitions", "objective"):
        if required not in raw:
            raise InputError(f"missing field {required!r}")
    states = raw["states"]
    if (not isinstance(states, list) or not states
            or not all(isinstance(s, str) for s in states)):
        raise InputError("states must be a non-empty list of names")
    if len(set(states)) != len(states):
        raise InputError("state names must be unique")
    known = set(states)

    def resolve(name, where):
        if not isinstance(name, str) or name not in known:
            raise InputError(f"unknown state {name!r} in {where}")
        return name

    initial = resolve(raw["initial"], "initial")
    transitions = []
    if not isinstance(raw["transitions"], list):
        raise InputError("transitions must be a list of [src, dst] pairs")
    for i, pair in enumerate(raw["transitions"]):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise InputError(f"transition #{i} must be a [src, dst] pair")
        transitions.append((resolve(pair[0], f"transition #{i}"),
                            resolve(pair[1], f"transition #{i}")))
    obj = raw["objective"]
    if not isinstance(obj, dict):
        raise InputError("objective must be an object")
    unknown = set(obj) - _OBJECTIVE_FIELDS
    if unknown:
        raise InputError(f"unknown objective fields: {', '.join(sorted(unknown))}")
    kind = obj.get("kind")
    if kind not in OBJECTIVE_KINDS:
        raise InputError(f"unknown objective kind {kind!r}")
    target = colours = None
    if kind == PARITY:
        colours = obj.get("colours")
        if not isinstance(colours, dict):
            raise InputError("parity objectives need a colours map")
        for name, c in colours.items():
            resolve(name, "colours")
            if not isinstance(c, int) or c < 0:
                raise InputError(f"colour of {name!r} must be a non-negative integer")
        missing = known - set(colours)
        if missing:
            raise InputError(
                "colours missing for: " + ", ".join(sorted(missing)))
        if "target" in obj:
            raise InputError("parity objectives take colours, not a target")
    else:
        target = obj.get("target")
        if not isinstance(target, list):
            raise InputError(f"{kind} objectives need a target list")
        target = [resolve(s, "objective target") for s in target]
        if "colours" in obj:
            raise InputError(f"{kind} objectives take a target, not colours")
    run_prefix = run_loop = None
    if "run" in raw:
        run = raw["run"]
        if not isinstance(run, dict) or set(run) - _RUN_FIELDS:
            raise InputError("run must be an object with prefix and loop")
        run_prefix = [resolve(s, "run prefix") for s in run.get("prefix", [])]
        run_loop = [resolve(s, "run loop") for s in run.get("loop", [])]
        if not run_loop:
            raise InputError("run loop must be non-empty")
    groups = None
    if "groups" in raw:
        if not isinstance(raw["groups"], dict):
            raise InputError("groups must map block names to state lists")
        groups = {}
        covered = set()
        for block, members in raw["groups"].items():
            if not isinstance(members, list) or not members:
                raise InputError(f"group {block!r} must be a non-empty list")
            members = [resolve(s, f"group {block!r}") for s in members]
            overlap = covered & set(members)
            if overlap:
                raise InputError(
                    f"group {block!r} overlaps: " + ", ".join(sorted(overlap)))
            covered |= set(members)
            groups[block] = members
        if covered != known:
            missing = sorted(known - covered)
            raise InputError("groups do not partition the states; missing: "
                             + ", ".join(missing))
    doc = ExplicitModelDoc(states=list(states), initial=initial,
                           transitions=transitions, objective_kind=kind,
                           target=target, colours=colours,
                           run_prefix=run_prefix, run_loop=run_loop,
                           groups=groups)
    build_system(doc)  # totality and run validity are part of parsing
    return doc


def serialize_explicit(doc: ExplicitModelDoc) -> str:
    """Canonical rendering; parse(serialize(doc)) is structurally equal."""
    out: Dict[str, object] = {
        "states": list(doc.states),
        "initial": doc.initial,
        "transitions": [[s, t] for s, t in doc.transitions],
    }
    if doc.objective_kind == PARITY:
        out["objective"] = {"kind": doc.objective_kind,
                            "colours": {s: doc.colours[s] for s in doc.states}}
    else:
        out["objective"] = {"kind": doc.objective_kind,
                            "target": list(doc.target)}
    if doc.has_run():
        out["run"] = {"prefix": list(doc.run_prefix or []),
                      "loop": list(doc.run_loop)}
    if doc.groups is not None:
        out["groups"] = {b: list(ms) for b, ms in sorted(doc.groups.items())}
    return json.dumps(out, indent=2) + "\n"


def build_system(doc: ExplicitModelDoc):
    """Materialize (TransitionSystem, Objective, run or None) from a document."""
    idx = {name: i for i, name in enumerate(doc.states)}
    ts = TransitionSystem(
        doc.states, idx[doc.initial],
        [(idx[s], idx[t]) for s, t in doc.transitions])
    if doc.objective_kind == PARITY:
        obj = Objective(PARITY, colours=tuple(doc.colours[s] for s in doc.states))
    else:
        obj = Objective(doc.objective_kind,
                        target=frozenset(idx[s] for s in doc.target))
    run = None
    if doc.has_run():
        run = LassoRun(tuple(idx[s] for s in doc.run_prefix or ()),
                       tuple(idx[s] for s in doc.run_loop))
    return ts, obj, run


def load_explicit(path) -> ExplicitModelDoc:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_explicit(fh.read())
