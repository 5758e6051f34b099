"""Transition systems, omega-regular objectives and lasso-shaped counterexamples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

from .errors import InputError

SAFETY = "safety"
REACHABILITY = "reachability"
BUECHI = "buechi"
PARITY = "parity"

OBJECTIVE_KINDS = (SAFETY, REACHABILITY, BUECHI, PARITY)


class NoViolation(Exception):
    """The system satisfies the objective; there is nothing to explain."""


class TransitionSystem:
    """Finite directed state graph with a single initial state.

    States are dense integer indices 0..n-1 with unique display names.
    Successor lists are duplicate-free and sorted.  Every state must have
    at least one successor; deadlocked models are rejected at construction
    with a listing of the offending states.
    """

    __slots__ = ("names", "initial", "succ", "_index")

    def __init__(self, names: Sequence[str], initial: int,
                 edges: Iterable[Tuple[int, int]]):
        names = tuple(names)
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise InputError(f"duplicate state names: {', '.join(dupes)}")
        n = len(names)
        if not 0 <= initial < n:
            raise InputError(f"initial state index {initial} out of range")
        adj = [set() for _ in range(n)]
        for src, dst in edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise InputError(f"transition ({src}, {dst}) out of range")
            adj[src].add(dst)
        dead = [names[s] for s in range(n) if not adj[s]]
        if dead:
            raise InputError(
                "deadlocked states (no outgoing transition): " + ", ".join(dead))
        self.names = names
        self.initial = initial
        self.succ = tuple(tuple(sorted(a)) for a in adj)
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InputError(f"unknown state {name!r}") from None

    def edges(self):
        for s, ts in enumerate(self.succ):
            for t in ts:
                yield s, t

    def num_edges(self) -> int:
        return sum(len(ts) for ts in self.succ)

    def preds(self):
        pred = [[] for _ in range(len(self.names))]
        for s, t in self.edges():
            pred[t].append(s)
        return pred

    def __repr__(self):
        return (f"TransitionSystem({len(self.names)} states, "
                f"{self.num_edges()} transitions, initial={self.names[self.initial]})")


@dataclass(frozen=True)
class Objective:
    """Safety / reachability / Buechi target set, or a parity colouring.

    Exactly one payload is populated: `target` for the set-based kinds,
    `colours` (one non-negative integer per state) for parity.  A parity
    run is accepted when the maximal colour among the states visited
    infinitely often is even.
    """

    kind: str
    target: Optional[frozenset] = None
    colours: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise InputError(f"unknown objective kind {self.kind!r}")
        if self.kind == PARITY:
            if self.colours is None or self.target is not None:
                raise InputError("parity objectives take a colour map only")
            if any(c < 0 for c in self.colours):
                raise InputError("parity colours must be non-negative")
        else:
            if self.target is None or self.colours is not None:
                raise InputError(f"{self.kind} objectives take a target set only")

    def check_against(self, ts: TransitionSystem):
        n = len(ts)
        if self.kind == PARITY:
            if len(self.colours) != n:
                raise InputError("colour map must cover every state")
        else:
            bad = [s for s in self.target if not 0 <= s < n]
            if bad:
                raise InputError(f"objective target out of range: {bad}")


@dataclass(frozen=True)
class LassoRun:
    """Simple lasso-shaped run: finite prefix followed by a repeated loop.

    The loop is non-empty and repeats no state; no loop state occurs in the
    prefix and the prefix itself is duplicate-free, so every state on the
    run has a unique successor along it.
    """

    prefix: Tuple[int, ...]
    loop: Tuple[int, ...]

    def states(self) -> frozenset:
        return frozenset(self.prefix) | frozenset(self.loop)

    def sequence(self) -> Tuple[int, ...]:
        return self.prefix + self.loop

    def position(self, state: int) -> int:
        """Index of `state` along the run; prefix first, then loop order."""
        seq = self.sequence()
        return seq.index(state)

    def run_successor(self, state: int) -> int:
        """The unique successor of a run state along the run."""
        if state in self.prefix:
            i = self.prefix.index(state)
            if i + 1 < len(self.prefix):
                return self.prefix[i + 1]
            return self.loop[0]
        j = self.loop.index(state)
        return self.loop[(j + 1) % len(self.loop)]


@dataclass(frozen=True)
class RunIssue:
    """First violated run invariant, with the offending position."""

    code: str
    message: str
    position: int


def validate_run(ts: TransitionSystem, run: LassoRun) -> Optional[RunIssue]:
    """Check all LassoRun invariants against `ts`; None means the run is ok."""
    name = ts.names.__getitem__
    if not run.loop:
        return RunIssue("empty-loop", "loop must be non-empty", 0)
    seq = run.sequence()
    for pos, s in enumerate(seq):
        if not 0 <= s < len(ts):
            return RunIssue("bad-state", f"state index {s} out of range", pos)
    start = run.prefix[0] if run.prefix else run.loop[0]
    if start != ts.initial:
        return RunIssue(
            "bad-start",
            f"run starts in {name(start)}, not the initial state {name(ts.initial)}",
            0)
    seen = {}
    for i, s in enumerate(run.loop):
        if s in seen:
            return RunIssue("loop-repeat", f"loop repeats {name(s)}",
                            len(run.prefix) + i)
        seen[s] = i
    pseen = {}
    for i, s in enumerate(run.prefix):
        if s in seen:
            return RunIssue("prefix-in-loop",
                            f"prefix state {name(s)} also occurs in the loop", i)
        if s in pseen:
            return RunIssue("prefix-repeat", f"prefix repeats {name(s)}", i)
        pseen[s] = i
    for pos in range(len(seq)):
        s = seq[pos]
        t = seq[pos + 1] if pos + 1 < len(seq) else run.loop[0]
        if t not in ts.succ[s]:
            return RunIssue(
                "not-a-transition",
                f"{name(s)} -> {name(t)} is not a transition", pos)
    return None


def violates(ts: TransitionSystem, obj: Objective, run: LassoRun) -> bool:
    """True iff the infinite unrolling of `run` does not satisfy `obj`.

    The loop determines the infinitely-visited states, so Buechi violation
    depends on the loop only; prefix visits are irrelevant.
    """
    obj.check_against(ts)
    loop = set(run.loop)
    if obj.kind == SAFETY:
        return bool((set(run.prefix) | loop) & obj.target)
    if obj.kind == REACHABILITY:
        return not ((set(run.prefix) | loop) & obj.target)
    if obj.kind == BUECHI:
        return not (loop & obj.target)
    return max(obj.colours[s] for s in loop) % 2 == 1


def _bfs_path(succ, source: int, targets, allowed=None):
    """Shortest path source -> first target hit, successors in index order.

    Returns the path as a list including both endpoints, or None.
    `allowed` restricts the states the path may use (source exempt).
    """
    targets = set(targets)
    if source in targets:
        return [source]
    parent = {source: None}
    frontier = [source]
    while frontier:
        nxt = []
        for s in frontier:
            for t in succ[s]:
                if t in parent or (allowed is not None and t not in allowed):
                    continue
                parent[t] = s
                if t in targets:
                    path = [t]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                nxt.append(t)
        frontier = nxt
    return None


def _reachable(succ, source: int, allowed=None):
    seen = {source}
    stack = [source]
    while stack:
        s = stack.pop()
        for t in succ[s]:
            if t not in seen and (allowed is None or t in allowed):
                seen.add(t)
                stack.append(t)
    return seen


def _sccs(succ, allowed):
    """Tarjan over the subgraph induced by `allowed`; returns state -> scc id."""
    allowed = set(allowed)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comp = {}
    counter = [0]
    ncomp = [0]

    def strongconnect(v):
        work = [(v, iter([t for t in succ[v] if t in allowed]))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter([t for t in succ[w] if t in allowed])))
                    advanced = True
                    break
                elif w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = ncomp[0]
                    if w == node:
                        break
                ncomp[0] += 1

    for v in sorted(allowed):
        if v not in index:
            strongconnect(v)
    return comp


def _cycle_through(succ, state: int, allowed) -> Optional[list]:
    """Shortest cycle through `state` inside `allowed`, as [state, ..., last]."""
    allowed = set(allowed)
    starts = [t for t in succ[state] if t in allowed]
    if state in starts:
        return [state]
    comp = _sccs(succ, allowed)
    cid = comp.get(state)
    if cid is None:
        return None
    members = {s for s, c in comp.items() if c == cid}
    if len(members) == 1:
        return None
    # shortest path from a successor of `state` back to `state` within the SCC
    best = None
    for t in sorted(starts):
        if t not in members:
            continue
        back = _bfs_path(succ, t, {state}, allowed=members | {state})
        if back is not None and (best is None or len(back) < len(best)):
            best = back
    if best is None:
        return None
    return [state] + best[:-1]


def _canonical_lasso(seq_prefix, cycle) -> LassoRun:
    """Trim prefix/loop overlap and internal prefix cycles into a simple lasso.

    `seq_prefix` is a duplicate-free path ending just before the cycle
    entry; `cycle` is a duplicate-free cycle.  If the prefix touches the
    cycle, it is cut there and the cycle rotated to start at that state.
    """
    cycle = list(cycle)
    cycle_set = set(cycle)
    prefix = []
    for s in seq_prefix:
        if s in cycle_set:
            k = cycle.index(s)
            cycle = cycle[k:] + cycle[:k]
            return LassoRun(tuple(prefix), tuple(cycle))
        prefix.append(s)
    return LassoRun(tuple(prefix), tuple(cycle))


def find_violating_run(ts: TransitionSystem, obj: Objective) -> LassoRun:
    """Deterministically construct a simple lasso run violating `obj`.

    Search order is by ascending state index throughout, so the result is
    reproducible.  Raises NoViolation when every run satisfies the
    objective.
    """
    obj.check_against(ts)
    succ = ts.succ
    n = len(ts)

    if obj.kind == SAFETY:
        # shortest path into the target, then walk until a state repeats
        path = _bfs_path(succ, ts.initial, obj.target)
        if path is None:
            raise NoViolation("the target set is unreachable")
        seq = list(path)
        seen = {s: i for i, s in enumerate(seq)}
        cur = seq[-1]
        while True:
            nxt = succ[cur][0]
            if nxt in seen:
                k = seen[nxt]
                return LassoRun(tuple(seq[:k]), tuple(seq[k:]))
            seen[nxt] = len(seq)
            seq.append(nxt)
            cur = nxt

    if obj.kind == REACHABILITY:
        # an entire run avoiding the target: cycle reachable within S \ F
        if ts.initial in obj.target:
            raise NoViolation("the initial state is already in the target")
        allowed = set(range(n)) - set(obj.target)
        reach = _reachable(succ, ts.initial, allowed=allowed)
        for w in sorted(reach):
            cycle = _cycle_through(succ, w, reach)
            if cycle is not None:
                path = _bfs_path(succ, ts.initial, {w}, allowed=reach)
                return _canonical_lasso(path[:-1], cycle)
        raise NoViolation("every run eventually reaches the target")

    if obj.kind == BUECHI:
        # loop avoiding the target, reachable through anything
        allowed = set(range(n)) - set(obj.target)
        reach = _reachable(succ, ts.initial)
        for w in sorted(reach & allowed):
            cycle = _cycle_through(succ, w, allowed)
            if cycle is not None:
                path = _bfs_path(succ, ts.initial, {w})
                return _canonical_lasso(path[:-1], cycle)
        raise NoViolation("every reachable cycle meets the target set")

    # parity: a reachable cycle whose maximal colour is odd
    reach = _reachable(succ, ts.initial)
    for w in sorted(reach):
        c = obj.colours[w]
        if c % 2 == 0:
            continue
        allowed = {s for s in range(n) if obj.colours[s] <= c}
        cycle = _cycle_through(succ, w, allowed)
        if cycle is not None:
            path = _bfs_path(succ, ts.initial, {w})
            return _canonical_lasso(path[:-1], cycle)
    raise NoViolation("no reachable odd-dominated cycle exists")
