"""Shared fixtures: the worked-example systems, random instances and the
exhaustive oracles the derived expectations are computed with."""

import random
from itertools import product

from respgame import (BUECHI, PARITY, REACHABILITY, SAFETY, FORWARD,
                      OPTIMISTIC, PESSIMISTIC, LassoRun, NoViolation,
                      Objective, TransitionSystem, find_violating_run,
                      validate_run, violates)


def engraving_example():
    """Safety system whose run deviations are pruned by engraving."""
    names = ["s0", "s1", "s2", "s3", "s4", "s5", "bad"]
    edges = [(0, 1), (0, 2), (1, 0), (1, 3), (2, 1), (2, 3), (2, 4), (3, 5),
             (4, 3), (4, 5), (4, 6), (5, 6), (6, 6)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(SAFETY, target=frozenset({6}))
    run = LassoRun((0, 2, 4), (6,))
    return ts, obj, run


def recurrence_example():
    """Six-state recurrence example with known exact values."""
    names = ["s0", "s1", "s2", "s3", "s4", "s5"]
    edges = [(0, 1), (0, 5), (1, 2), (1, 4), (2, 2), (2, 3), (3, 3), (4, 0),
             (4, 1), (5, 1)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(BUECHI, target=frozenset({2, 5}))
    run = LassoRun((0, 1, 2), (3,))
    return ts, obj, run


def parity_jump_example():
    """Parity system where winning needs a forward jump over a bad colour."""
    names = ["s0", "s1", "s2", "s3", "s4", "s5"]
    edges = [(0, 1), (0, 5), (1, 2), (1, 3), (2, 3), (3, 0), (3, 4), (4, 1),
             (4, 4), (5, 4)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(PARITY, colours=(1, 1, 3, 1, 1, 2))
    run = LassoRun((0, 1, 2, 3), (4,))
    return ts, obj, run


def diamond_example():
    """Diamond with a looping run; the grouping examples live here."""
    names = ["s0", "s1", "s2", "s3"]
    edges = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 3), (2, 2), (2, 3), (3, 3)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(REACHABILITY, target=frozenset({3}))
    run = LassoRun((), (0,))
    return ts, obj, run


def refinement_example():
    """Eleven-state safety system driving the refinement worked example."""
    names = ["s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "bad"]
    edges = [(0, 1), (0, 2), (1, 2), (2, 1), (2, 3), (3, 4), (3, 5), (3, 6),
             (4, 7), (5, 6), (6, 8), (6, 9), (7, 4), (8, 7), (8, 9), (9, 10),
             (10, 10)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(SAFETY, target=frozenset({10}))
    run = LassoRun((0, 2, 3, 6, 9), (10,))
    return ts, obj, run


def decoy_frontier_example():
    """Frontier containing a state with zero responsibility."""
    names = ["s0", "s1", "s2", "bad"]
    edges = [(0, 1), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(SAFETY, target=frozenset({3}))
    run = LassoRun((0, 1), (3,))
    return ts, obj, run


def empty_frontier_example():
    """Recurrence instance whose first witness has an empty frontier."""
    names = ["s0", "s1", "s2", "s3"]
    edges = [(0, 1), (1, 1), (1, 2), (1, 3), (2, 0), (3, 0)]
    ts = TransitionSystem(names, 0, edges)
    obj = Objective(BUECHI, target=frozenset({3}))
    run = LassoRun((0,), (1,))
    return ts, obj, run


FIXTURES = {"engraving_example": engraving_example, "recurrence_example": recurrence_example, "parity_jump_example": parity_jump_example, "diamond_example": diamond_example,
            "refinement_example": refinement_example, "decoy_frontier_example": decoy_frontier_example, "empty_frontier_example": empty_frontier_example}


def random_total_system(rng: random.Random, max_states: int = 9,
                        min_states: int = 2) -> TransitionSystem:
    n = rng.randint(min_states, max_states)
    edges = []
    for s in range(n):
        out = rng.randint(1, min(3, n))
        edges.extend((s, t) for t in rng.sample(range(n), out))
    return TransitionSystem([f"q{i}" for i in range(n)], 0, edges)


def random_objective(rng: random.Random, ts: TransitionSystem,
                     kind=None) -> Objective:
    n = len(ts)
    kind = kind or rng.choice((SAFETY, REACHABILITY, BUECHI, PARITY))
    if kind == PARITY:
        return Objective(PARITY,
                         colours=tuple(rng.randint(0, 3) for _ in range(n)))
    size = rng.randint(0 if kind == REACHABILITY else 1, max(1, n // 2))
    return Objective(kind, target=frozenset(rng.sample(range(n),
                                                       min(size, n))))


def random_instance(rng: random.Random, max_states: int = 9, kind=None,
                    mode=None):
    """(ts, obj, run, mode) with a violating run, or None when satisfied."""
    ts = random_total_system(rng, max_states)
    obj = random_objective(rng, ts, kind)
    try:
        run = find_violating_run(ts, obj)
    except NoViolation:
        return None
    assert validate_run(ts, run) is None
    assert violates(ts, obj, run)
    mode = mode or rng.choice((OPTIMISTIC, PESSIMISTIC, FORWARD))
    return ts, obj, run, mode


def instances(seed: int, count: int, max_states: int = 9, kind=None,
              mode=None):
    """Yield `count` violating instances deterministically."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        inst = random_instance(rng, max_states, kind=kind, mode=mode)
        if inst is None:
            continue
        made += 1
        yield inst


def all_simple_lassos(ts: TransitionSystem):
    """Every simple lasso run of the system, by exhaustive path search."""
    succ = ts.succ
    found = []

    def extend(path, on_path):
        last = path[-1]
        for t in succ[last]:
            if t in on_path:
                j = path.index(t)
                found.append(LassoRun(tuple(path[:j]), tuple(path[j:])))
            else:
                path.append(t)
                on_path.add(t)
                extend(path, on_path)
                on_path.discard(t)
                path.pop()

    extend([ts.initial], {ts.initial})
    return found


def exhaustive_violation_exists(ts, obj) -> bool:
    return any(violates(ts, obj, run) for run in all_simple_lassos(ts))


def _play_outcome(arena, obj, start, strat_sat, strat_unsat):
    """Simulate the positional strategies from `start`; True iff the
    satisfying player wins the induced lasso."""
    seen = {}
    play = []
    cur = start
    while cur not in seen:
        seen[cur] = len(play)
        play.append(cur)
        if obj.kind == REACHABILITY and cur in obj.target:
            return True
        if obj.kind == SAFETY and cur in obj.target:
            return False
        if cur in arena.sat:
            nxt = strat_sat.get(cur)
            assert nxt is not None, f"strategy undefined at {cur}"
        else:
            nxt = strat_unsat[cur]
        cur = nxt
    k = seen[cur]
    loop = play[k:]
    prefix = play[:k]
    if obj.kind == SAFETY:
        return not (set(prefix) | set(loop)) & obj.target
    if obj.kind == REACHABILITY:
        return bool((set(prefix) | set(loop)) & obj.target)
    if obj.kind == BUECHI:
        return bool(set(loop) & obj.target)
    return max(obj.colours[s] for s in loop) % 2 == 0


def enumerate_unsat_strategies(arena, cap: int = 1500):
    """All positional opponent strategies, or None when too many."""
    unsat = sorted(set(range(len(arena))) - arena.sat)
    total = 1
    for s in unsat:
        total *= len(arena.succ[s])
        if total > cap:
            return None
    out = []
    for picks in product(*(arena.succ[s] for s in unsat)):
        out.append(dict(zip(unsat, picks)))
    return out
