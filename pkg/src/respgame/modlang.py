"""Guarded-command modelling language: parser and explicit-state expansion.

The accepted subset has integer/boolean constants, modules with bounded
integer and boolean variables, guarded commands with optional synchronising
action labels, named formulas (macros), labels and per-module owner
predicates.  No probabilities, no clocks, no unbounded variables.  The full
grammar is documented in docs/lang.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import InputError
from .model import TransitionSystem

DEFAULT_STATE_CAP = 10_000_000

_PUNCT = ("->", "..", "!=", "<=", ">=", "(", ")", "[", "]", ";", ":", "'",
          "=", "<", ">", "+", "-", "*", "&", "|", "!")
_KEYWORDS = {"const", "int", "bool", "module", "endmodule", "init", "label",
             "formula", "owner", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | punct | keyword | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> List[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise InputError(f"line {line}, column {col}: unterminated string")
            tokens.append(Token("string", text[i + 1:j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in _KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise InputError(f"line {line}, column {col}: unexpected character {c!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


# expression AST: ("int", v) ("bool", v) ("var", name) ("unop", op, e)
# ("binop", op, a, b)

_COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take()
        if tok.text != text:
            raise InputError(
                f"line {tok.line}, column {tok.col}: expected {text!r}, "
                f"found {tok.text!r}")
        return tok

    def expect_kind(self, kind: str) -> Token:
        tok = self.take()
        if tok.kind != kind:
            raise InputError(
                f"line {tok.line}, column {tok.col}: expected {kind}, "
                f"found {tok.text!r}")
        return tok

    # expression parsing, loosest binding first
    def parse_expr(self):
        return self._parse_or()

    def _parse_or(self):
        e = self._parse_and()
        while self.peek().text == "|":
            self.take()
            e = ("binop", "|", e, self._parse_and())
        return e

    def _parse_and(self):
        e = self._parse_cmp()
        while self.peek().text == "&":
            self.take()
            e = ("binop", "&", e, self._parse_cmp())
        return e

    def _parse_cmp(self):
        e = self._parse_add()
        if self.peek().text in _COMPARISONS:
            op = self.take().text
            e = ("binop", op, e, self._parse_add())
        return e

    def _parse_add(self):
        e = self._parse_mul()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            e = ("binop", op, e, self._parse_mul())
        return e

    def _parse_mul(self):
        e = self._parse_unary()
        while self.peek().text == "*":
            self.take()
            e = ("binop", "*", e, self._parse_unary())
        return e

    def _parse_unary(self):
        tok = self.peek()
        if tok.text == "!":
            self.take()
            return ("unop", "!", self._parse_unary())
        if tok.text == "-":
            self.take()
            return ("unop", "-", self._parse_unary())
        return self._parse_atom()

    def _parse_atom(self):
        tok = self.take()
        if tok.kind == "int":
            return ("int", int(tok.text))
        if tok.text == "true":
            return ("bool", True)
        if tok.text == "false":
            return ("bool", False)
        if tok.kind == "ident":
            return ("var", tok.text)
        if tok.text == "(":
            e = self.parse_expr()
            self.expect(")")
            return e
        raise InputError(
            f"line {tok.line}, column {tok.col}: unexpected {tok.text!r} "
            "in expression")


@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str  # int | bool
    lo: int
    hi: int
    init: object
    module: str


@dataclass
class Command:
    module: str
    action: Optional[str]
    guard: object
    updates: List[Tuple[str, object]]  # (variable, expression)
    line: int

    def describe(self) -> str:
        tag = f"[{self.action or ''}]"
        return f"{tag} command of module {self.module} (line {self.line})"


@dataclass
class ModuleDef:
    name: str
    variables: List[VarDecl] = field(default_factory=list)
    commands: List[Command] = field(default_factory=list)


@dataclass
class ModuleLangProgram:
    constants: Dict[str, object]
    formulas: Dict[str, object]
    modules: List[ModuleDef]
    labels: Dict[str, object]  # label name -> boolean expression
    owners: Dict[str, object]  # module name -> boolean expression

    def variables(self) -> List[VarDecl]:
        out = []
        for mod in self.modules:
            out.extend(mod.variables)
        return out


def _eval(expr, env, formulas, visiting=None):
    tag = expr[0]
    if tag in ("int", "bool"):
        return expr[1]
    if tag == "var":
        name = expr[1]
        if name in env:
            return env[name]
        if name in formulas:
            visiting = visiting or set()
            if name in visiting:
                raise InputError(f"formula {name!r} is defined in terms of itself")
            return _eval(formulas[name], env, formulas, visiting | {name})
        raise InputError(f"unknown identifier {name!r}")
    if tag == "unop":
        v = _eval(expr[2], env, formulas, visiting)
        if expr[1] == "!":
            _want(bool, v, "!")
            return not v
        _want(int, v, "-")
        return -v
    op, a, b = expr[1], expr[2], expr[3]
    va = _eval(a, env, formulas, visiting)
    vb = _eval(b, env, formulas, visiting)
    if op in ("+", "-", "*"):
        _want(int, va, op)
        _want(int, vb, op)
        return {"+": va + vb, "-": va - vb, "*": va * vb}[op]
    if op in ("&", "|"):
        _want(bool, va, op)
        _want(bool, vb, op)
        return (va and vb) if op == "&" else (va or vb)
    if op in ("=", "!="):
        if isinstance(va, bool) != isinstance(vb, bool):
            raise InputError(f"comparison {op} mixes boolean and integer")
        return (va == vb) if op == "=" else (va != vb)
    _want(int, va, op)
    _want(int, vb, op)
    return {"<": va < vb, "<=": va <= vb, ">": va > vb, ">=": va >= vb}[op]


def _want(kind, value, op):
    ok = isinstance(value, bool) if kind is bool else (
        isinstance(value, int) and not isinstance(value, bool))
    if not ok:
        want = "boolean" if kind is bool else "integer"
        raise InputError(f"operator {op!r} needs {want} operands")


def parse_program(text: str) -> ModuleLangProgram:
    p = _Parser(text)
    constants: Dict[str, object] = {}
    formulas: Dict[str, object] = {}
    modules: List[ModuleDef] = []
    labels: Dict[str, object] = {}
    owners: Dict[str, object] = {}
    var_names = set()
    while p.peek().kind != "eof":
        tok = p.peek()
        if tok.text == "const":
            p.take()
            kind_tok = p.take()
            if kind_tok.text not in ("int", "bool"):
                raise InputError(
                    f"line {kind_tok.line}: const needs int or bool")
            name = p.expect_kind("ident").text
            p.expect("=")
            expr = p.parse_expr()
            p.expect(";")
            value = _eval(expr, constants, {})
            if kind_tok.text == "int":
                _want(int, value, "const")
            else:
                _want(bool, value, "const")
            constants[name] = value
        elif tok.text == "formula":
            p.take()
            name = p.expect_kind("ident").text
            p.expect("=")
            formulas[name] = p.parse_expr()
            p.expect(";")
        elif tok.text == "label":
            p.take()
            name_tok = p.take()
            if name_tok.kind not in ("string", "ident"):
                raise InputError(f"line {name_tok.line}: label needs a name")
            p.expect("=")
            labels[name_tok.text] = p.parse_expr()
            p.expect(";")
        elif tok.text == "owner":
            p.take()
            name = p.expect_kind("ident").text
            p.expect("=")
            owners[name] = p.parse_expr()
            p.expect(";")
        elif tok.text == "module":
            modules.append(_parse_module(p, constants, var_names))
        else:
            raise InputError(
                f"line {tok.line}, column {tok.col}: unexpected {tok.text!r}")
    for mod_name in owners:
        if mod_name not in {m.name for m in modules}:
            raise InputError(f"owner declared for unknown module {mod_name!r}")
    return ModuleLangProgram(constants, formulas, modules, labels, owners)


def _parse_module(p: _Parser, constants, var_names) -> ModuleDef:
    p.expect("module")
    name = p.expect_kind("ident").text
    mod = ModuleDef(name)
    local = set()
    while p.peek().text != "endmodule":
        tok = p.peek()
        if tok.kind == "ident" and p.tokens[p.pos + 1].text == ":":
            decl = _parse_decl(p, constants, name)
            if decl.name in var_names:
                raise InputError(
                    f"line {tok.line}: variable {decl.name!r} already declared")
            var_names.add(decl.name)
            local.add(decl.name)
            mod.variables.append(decl)
        elif tok.text == "[":
            mod.commands.append(_parse_command(p, name, local))
        else:
            raise InputError(
                f"line {tok.line}, column {tok.col}: unexpected {tok.text!r} "
                "inside module")
    p.expect("endmodule")
    return mod


def _parse_decl(p: _Parser, constants, module_name) -> VarDecl:
    name = p.expect_kind("ident").text
    p.expect(":")
    tok = p.peek()
    if tok.text == "bool":
        p.take()
        p.expect("init")
        init = _eval(p.parse_expr(), constants, {})
        _want(bool, init, "init")
        p.expect(";")
        return VarDecl(name, "bool", 0, 1, init, module_name)
    p.expect("[")
    lo = _eval(p.parse_expr(), constants, {})
    p.expect("..")
    hi = _eval(p.parse_expr(), constants, {})
    p.expect("]")
    _want(int, lo, "range")
    _want(int, hi, "range")
    if hi < lo:
        raise InputError(f"variable {name!r} has an empty range [{lo}..{hi}]")
    p.expect("init")
    init = _eval(p.parse_expr(), constants, {})
    _want(int, init, "init")
    if not lo <= init <= hi:
        raise InputError(f"initial value {init} of {name!r} outside [{lo}..{hi}]")
    p.expect(";")
    return VarDecl(name, "int", lo, hi, init, module_name)


def _parse_command(p: _Parser, module_name, local_vars) -> Command:
    open_tok = p.expect("[")
    action = None
    if p.peek().kind == "ident":
        action = p.take().text
    p.expect("]")
    guard = p.parse_expr()
    p.expect("->")
    updates: List[Tuple[str, object]] = []
    if p.peek().text == "true":
        p.take()
    else:
        while True:
            p.expect("(")
            var = p.expect_kind("ident").text
            p.expect("'")
            p.expect("=")
            expr = p.parse_expr()
            p.expect(")")
            if var not in local_vars:
                raise InputError(
                    f"line {open_tok.line}: command of module {module_name} "
                    f"assigns foreign variable {var!r}")
            updates.append((var, expr))
            if p.peek().text == "&":
                p.take()
                continue
            break
    p.expect(";")
    return Command(module_name, action, guard, updates, open_tok.line)


@dataclass
class ExpandedModel:
    """Explicit reachable state space of a program.

    State names are canonical `var=value` listings in declaration order;
    numbering is breadth-first discovery order from the initial valuation.
    """

    ts: TransitionSystem
    variables: List[VarDecl]
    valuations: List[tuple]
    labels: Dict[str, frozenset]
    owners: Dict[str, frozenset]


def expand_program(prog: ModuleLangProgram,
                   max_states: int = DEFAULT_STATE_CAP) -> ExpandedModel:
    """Breadth-first expansion under interleaving + synchronisation.

    A command without an action interleaves on its own; commands sharing an
    action fire together, one enabled command per module owning the action.
    Updates read the pre-state (snapshot semantics).  Updates leaving a
    variable's range and reachable deadlock valuations are errors.
    """
    variables = prog.variables()
    if not variables:
        raise InputError("program declares no variables")
    var_index = {v.name: i for i, v in enumerate(variables)}
    owning: Dict[str, List[str]] = {}
    for mod in prog.modules:
        for cmd in mod.commands:
            if cmd.action is not None:
                mods = owning.setdefault(cmd.action, [])
                if mod.name not in mods:
                    mods.append(mod.name)

    def env_of(valuation):
        env = dict(prog.constants)
        for v, value in zip(variables, valuation):
            env[v.name] = value
        return env

    def apply_updates(valuation, env, commands):
        new = list(valuation)
        for cmd in commands:
            for var, expr in cmd.updates:
                value = _eval(expr, env, prog.formulas)
                decl = variables[var_index[var]]
                if decl.kind == "bool":
                    _want(bool, value, "update")
                else:
                    _want(int, value, "update")
                    if not decl.lo <= value <= decl.hi:
                        raise InputError(
                            f"update drives {var!r} to {value}, outside "
                            f"[{decl.lo}..{decl.hi}], in {cmd.describe()}")
                new[var_index[var]] = value
        return tuple(new)

    def successors(valuation):
        env = env_of(valuation)
        out = []
        enabled_by_action: Dict[str, Dict[str, List[Command]]] = {}
        for mod in prog.modules:
            for cmd in mod.commands:
                try:
                    guard = _eval(cmd.guard, env, prog.formulas)
                except InputError as exc:
                    raise InputError(f"{exc} in {cmd.describe()}") from None
                _want(bool, guard, "guard")
                if not guard:
                    continue
                if cmd.action is None:
                    out.append(apply_updates(valuation, env, [cmd]))
                else:
                    slot = enabled_by_action.setdefault(cmd.action, {})
                    slot.setdefault(mod.name, []).append(cmd)
        for action, owners_ in sorted(owning.items()):
            slot = enabled_by_action.get(action, {})
            if set(slot) != set(owners_):
                continue  # some owning module blocks the action
            combos = [slot[m] for m in owners_]
            picks = [[]]
            for cmds in combos:
                picks = [chosen + [c] for chosen in picks for c in cmds]
            for chosen in picks:
                out.append(apply_updates(valuation, env, chosen))
        return out

    def name_of(valuation):
        parts = []
        for v, value in zip(variables, valuation):
            text = ("true" if value else "false") if v.kind == "bool" else str(value)
            parts.append(f"{v.name}={text}")
        return ",".join(parts)

    init = tuple(v.init for v in variables)
    index = {init: 0}
    order = [init]
    adjacency: List[List[int]] = []
    frontier = [init]
    while frontier:
        next_frontier = []
        for valuation in frontier:
            succs = successors(valuation)
            if not succs:
                raise InputError(
                    f"deadlock: no command enabled in state {name_of(valuation)}")
            row = []
            for nxt in succs:
                if nxt not in index:
                    if len(index) >= max_states:
                        raise InputError(
                            f"state space exceeds the cap of {max_states}")
                    index[nxt] = len(order)
                    order.append(nxt)
                    next_frontier.append(nxt)
                row.append(index[nxt])
            adjacency.append(sorted(set(row)))
        frontier = next_frontier
    names = [name_of(v) for v in order]
    edges = [(s, t) for s, row in enumerate(adjacency) for t in row]
    ts = TransitionSystem(names, 0, edges)
    labels = {}
    for label, expr in prog.labels.items():
        members = set()
        for i, valuation in enumerate(order):
            value = _eval(expr, env_of(valuation), prog.formulas)
            _want(bool, value, f"label {label!r}")
            if value:
                members.add(i)
        labels[label] = frozenset(members)
    owners = {}
    for mod_name, expr in prog.owners.items():
        members = set()
        for i, valuation in enumerate(order):
            value = _eval(expr, env_of(valuation), prog.formulas)
            _want(bool, value, f"owner {mod_name!r}")
            if value:
                members.add(i)
        owners[mod_name] = frozenset(members)
    return ExpandedModel(ts, variables, order, labels, owners)


def _render_expr(expr, parent_prec=0) -> str:
    prec = {"|": 1, "&": 2, "=": 3, "!=": 3, "<": 3, "<=": 3, ">": 3,
            ">=": 3, "+": 4, "-": 4, "*": 5}
    tag = expr[0]
    if tag == "int":
        return str(expr[1])
    if tag == "bool":
        return "true" if expr[1] else "false"
    if tag == "var":
        return expr[1]
    if tag == "unop":
        inner = _render_expr(expr[2], 6)
        return f"{expr[1]}{inner}"
    op, a, b = expr[1], expr[2], expr[3]
    p = prec[op]
    text = f"{_render_expr(a, p)} {op} {_render_expr(b, p + 1)}"
    return f"({text})" if p < parent_prec else text


def serialize_program(prog: ModuleLangProgram) -> str:
    """Canonical program text; parse -> serialize -> parse is a fixpoint."""
    out = []
    for name, value in prog.constants.items():
        kind = "bool" if isinstance(value, bool) else "int"
        text = ("true" if value else "false") if kind == "bool" else str(value)
        out.append(f"const {kind} {name} = {text};")
    for name, expr in prog.formulas.items():
        out.append(f"formula {name} = {_render_expr(expr)};")
    for mod in prog.modules:
        out.append(f"module {mod.name}")
        for v in mod.variables:
            if v.kind == "bool":
                init = "true" if v.init else "false"
                out.append(f"  {v.name} : bool init {init};")
            else:
                out.append(f"  {v.name} : [{v.lo}..{v.hi}] init {v.init};")
        for cmd in mod.commands:
            action = cmd.action or ""
            guard = _render_expr(cmd.guard)
            if cmd.updates:
                updates = " & ".join(f"({var}' = {_render_expr(expr)})"
                                     for var, expr in cmd.updates)
            else:
                updates = "true"
            out.append(f"  [{action}] {guard} -> {updates};")
        out.append("endmodule")
    for name, expr in prog.labels.items():
        out.append(f'label "{name}" = {_render_expr(expr)};')
    for name, expr in prog.owners.items():
        out.append(f"owner {name} = {_render_expr(expr)};")
    return "\n".join(out) + "\n"


def load_program(path) -> ModuleLangProgram:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_program(fh.read())
