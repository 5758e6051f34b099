"""Iterative partition refinement for the set of responsible players."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BlockCapExceeded, InputError, PlayerCapExceeded
from .games import build_game, solve
from .shapley import (DEFAULT_SHAPLEY_CAP, PayoffGame, PlayerSet,
                      ResponsibilityReport, shapley_exact)

SELECT_HEURISTICS = ("random", "max-delta", "min-delta", "min-frontier")
REFINE_HEURISTICS = ("random", "frontier-random", "frontier-first",
                     "frontier-max", "frontier-losing", "frontier-winning")

DEFAULT_BLOCK_CAP = 24


@dataclass(frozen=True)
class HeuristicsConfig:
    initial_blocks: int = 1
    select: str = "random"
    refine: str = "frontier-random"
    rng_seed: int = 0

    def __post_init__(self):
        if self.initial_blocks < 1:
            raise InputError("initial_blocks must be >= 1")
        if self.select not in SELECT_HEURISTICS:
            raise InputError(f"unknown select heuristic {self.select!r}")
        if self.refine not in REFINE_HEURISTICS:
            raise InputError(f"unknown refine heuristic {self.refine!r}")


class Partition:
    """Disjoint non-empty blocks of player positions covering the universe.

    Block ids are stable: a split retires the old id and mints two fresh
    ones, so trace records stay unambiguous across iterations.
    """

    def __init__(self, blocks: Sequence[frozenset]):
        self.blocks: Dict[int, frozenset] = {}
        self._next = 0
        seen = set()
        for b in blocks:
            b = frozenset(b)
            if not b:
                raise InputError("empty block")
            if b & seen:
                raise InputError("blocks overlap")
            seen |= b
            self.blocks[self._next] = b
            self._next += 1
        self.universe = frozenset(seen)

    def split(self, block_id: int, part: frozenset) -> Tuple[int, int]:
        b = self.blocks.pop(block_id)
        part = frozenset(part)
        rest = b - part
        if not part or not rest:
            raise InputError("split must produce two non-empty blocks")
        a_id, b_id = self._next, self._next + 1
        self._next += 2
        self.blocks[a_id] = part
        self.blocks[b_id] = rest
        return a_id, b_id

    def sorted_ids(self) -> List[int]:
        return sorted(self.blocks)

    def players_of(self, ids) -> frozenset:
        players = set()
        for bid in ids:
            players |= self.blocks[bid]
        return frozenset(players)

    def snapshot(self) -> Dict[int, Tuple[int, ...]]:
        return {bid: tuple(sorted(b)) for bid, b in sorted(self.blocks.items())}


@dataclass
class BspWitness:
    """Concrete block-switching pair with both winning regions.

    gamma of `coalition_ids` is 0 and flips to 1 once `block_id` joins.
    The winning regions hold state indices; `delta` is their difference,
    which meets the block's states for all four objective classes.
    """

    block_id: int
    coalition_ids: Tuple[int, ...]
    win_with: frozenset
    win_without: frozenset

    @property
    def delta(self) -> frozenset:
        return self.win_with - self.win_without


def _mask_of(players) -> int:
    mask = 0
    for p in players:
        mask |= 1 << p
    return mask


def _flatten(pg: PayoffGame, players) -> frozenset:
    states = set()
    for p in players:
        states |= pg.players.members[p]
    return frozenset(states)


def _gamma_players(pg: PayoffGame, players) -> int:
    return pg.gamma(_mask_of(players))


def _win_region(pg: PayoffGame, players) -> frozenset:
    game = build_game(pg.ts, pg.objective, pg.run, _flatten(pg, players),
                      pg.mode)
    return solve(game).sat_wins


def find_witness(pg: PayoffGame, partition: Partition,
                 block_id: int) -> Optional[BspWitness]:
    """Search one block for a block-switching pair.

    Coalitions of the other blocks are enumerated by ascending popcount
    with monotone pruning (supersets of a winning coalition cannot be the
    losing half).  The full complement is probed first as a cheap hit, and
    a losing grand coalition settles the answer immediately.  Exact: None
    means no witness exists under the current partition.
    """
    others = [bid for bid in partition.sorted_ids() if bid != block_id]
    n = len(others)
    block_players = partition.blocks[block_id]

    def g(ids) -> int:
        return _gamma_players(pg, partition.players_of(ids))

    def witness(ids) -> BspWitness:
        base = partition.players_of(ids)
        return BspWitness(block_id, tuple(ids),
                          win_with=_win_region(pg, base | block_players),
                          win_without=_win_region(pg, base))

    if g(others + [block_id]) == 0:
        return None  # even the grand coalition loses; nothing can switch
    if g(others) == 0:
        return witness(tuple(others))
    winning: List[frozenset] = [frozenset(others)]
    for k in range(n):
        for combo in combinations(range(n), k):
            chosen = frozenset(combo)
            if any(w <= chosen for w in winning):
                continue
            ids = [others[i] for i in combo]
            if g(ids) == 1:
                winning.append(chosen)
                continue
            if g(ids + [block_id]) == 1:
                return witness(tuple(ids))
    return None


def compute_has_bsp(pg: PayoffGame, partition: Partition,
                    skip: Sequence[int] = (),
                    known: Optional[Dict[int, BspWitness]] = None,
                    cap: int = DEFAULT_BLOCK_CAP) -> Dict[int, Optional[BspWitness]]:
    """Witness (or None) per block id, excluding the ids in `skip`.

    `known` carries witnesses from earlier rounds: refining other blocks
    keeps a recorded coalition a valid union of blocks, so those witnesses
    are reused rather than re-searched.
    """
    nblocks = len(partition.blocks)
    if nblocks > cap:
        raise BlockCapExceeded(
            f"{nblocks} blocks exceed the witness-search cap of {cap}",
            guidance="raise --block-cap, start from fewer initial blocks, "
                     "or group states first")
    out: Dict[int, Optional[BspWitness]] = {}
    skip = set(skip)
    known = known or {}
    for bid in partition.sorted_ids():
        if bid in skip:
            continue
        if bid in known:
            out[bid] = known[bid]
            continue
        out[bid] = find_witness(pg, partition, bid)
    return out


def frontier(pg: PayoffGame, partition: Partition,
             witness: BspWitness) -> frozenset:
    """Block states inside the region difference with an edge leaving it,
    evaluated in the engraved graph of the larger-coalition game.  May be
    empty for Buechi and parity objectives."""
    fr, _counts = _frontier_with_counts(pg, partition, witness)
    return fr


def _frontier_with_counts(pg: PayoffGame, partition: Partition,
                          witness: BspWitness):
    delta = witness.delta
    block_players = partition.blocks[witness.block_id]
    block_states = _flatten(pg, block_players)
    coalition_players = partition.players_of(witness.coalition_ids)
    coalition_states = _flatten(pg, coalition_players) | block_states
    game = build_game(pg.ts, pg.objective, pg.run, coalition_states, pg.mode)
    succ = game.arena.succ
    losing = frozenset(range(len(pg.ts))) - witness.win_with
    fr = set()
    counts = {}
    for s in sorted(delta & block_states):
        if any(t not in delta for t in succ[s]):
            fr.add(s)
            to_win = sum(1 for t in succ[s] if t in witness.win_without)
            to_lose = sum(1 for t in succ[s] if t in losing)
            counts[s] = (to_win, to_lose)
    return frozenset(fr), counts


def _rng_for(seed: int, iteration: int, purpose: int) -> random.Random:
    # integer mixing only: string seeds would depend on per-process hashing
    return random.Random((seed * 1_000_003 + iteration) * 31 + purpose)


def _player_of_state(pg: PayoffGame, partition: Partition, block_id: int,
                     state: int) -> int:
    for p in sorted(partition.blocks[block_id]):
        if state in pg.players.members[p]:
            return p
    raise AssertionError("state not in the block")


def refine_block(pg: PayoffGame, partition: Partition, witness: BspWitness,
                 config: HeuristicsConfig, iteration: int):
    """Split one player off the witness block per the configured heuristic.

    Frontier variants pick a state from the frontier (falling back to a
    uniform pick from the region difference inside the block, which is
    never empty); the player owning the chosen state is split off.
    Returns (chosen state, frontier states, new singleton id, rest id).
    """
    block_players = partition.blocks[witness.block_id]
    block_states = _flatten(pg, block_players)
    delta_in_block = witness.delta & block_states
    assert delta_in_block, "region difference misses the block"
    fr, counts = _frontier_with_counts(pg, partition, witness)
    how = config.refine
    if how == "random":
        chosen = _rng_for(config.rng_seed, iteration, 1).choice(
            sorted(delta_in_block))
    elif not fr:
        if how == "frontier-first":
            chosen = min(delta_in_block)
        else:
            chosen = _rng_for(config.rng_seed, iteration, 1).choice(
                sorted(delta_in_block))
    elif how == "frontier-random":
        chosen = _rng_for(config.rng_seed, iteration, 1).choice(sorted(fr))
    elif how == "frontier-first":
        chosen = min(fr)
    elif how == "frontier-max":
        chosen = max(sorted(fr),
                     key=lambda s: (counts[s][0] + counts[s][1], -s))
    elif how == "frontier-losing":
        chosen = max(sorted(fr), key=lambda s: (counts[s][1], -s))
    else:  # frontier-winning
        chosen = max(sorted(fr), key=lambda s: (counts[s][0], -s))
    player = _player_of_state(pg, partition, witness.block_id, chosen)
    single_id, rest_id = partition.split(witness.block_id,
                                         frozenset([player]))
    return chosen, fr, single_id, rest_id


def select_blocks(pg: PayoffGame, partition: Partition,
                  candidates: Dict[int, BspWitness],
                  config: HeuristicsConfig, iteration: int) -> List[int]:
    """Pick exactly one non-singleton witness block for refinement."""
    if not candidates:
        raise InputError("no candidate blocks")
    ids = sorted(candidates)
    how = config.select
    if how == "random":
        return [_rng_for(config.rng_seed, iteration, 2).choice(ids)]
    if how == "max-delta":
        return [max(ids, key=lambda b: (len(candidates[b].delta), -b))]
    if how == "min-delta":
        return [min(ids, key=lambda b: (len(candidates[b].delta), b))]
    # min-frontier
    return [min(ids, key=lambda b: (len(frontier(pg, partition,
                                                 candidates[b])), b))]


@dataclass
class IterationRecord:
    """One loop pass: the partition seen, the witnesses known so far, and
    the split performed (absent on the terminal pass).  Player and state
    references are recorded by display name."""

    index: int
    partition: Dict[int, Tuple[str, ...]]
    witnesses: Dict[int, Tuple[int, ...]]
    selected: Optional[int] = None
    delta: Tuple[str, ...] = ()
    frontier: Tuple[str, ...] = ()
    split_state: Optional[str] = None


@dataclass
class RefinementResult:
    responsible: frozenset  # player positions
    trace: List[IterationRecord]
    witnesses: Dict[int, BspWitness]

    @property
    def split_count(self) -> int:
        return sum(1 for r in self.trace if r.split_state is not None)


def _remap_known(known: Dict[int, BspWitness], retired: int,
                 replacement: Tuple[int, int]):
    """Keep stored witnesses valid after a split: a coalition naming the
    retired block now names its two children (same player set)."""
    for w in known.values():
        if retired in w.coalition_ids:
            ids = [b for b in w.coalition_ids if b != retired]
            ids.extend(replacement)
            w.coalition_ids = tuple(sorted(ids))


def refine_loop(pg: PayoffGame, config: HeuristicsConfig,
                cap: int = DEFAULT_BLOCK_CAP, deadline=None) -> RefinementResult:
    """Refine a seeded random initial partition until every witness block
    is a singleton; the members of the final witness blocks are exactly
    the players with positive responsibility.

    Singleton blocks are skipped while the loop runs and settled in one
    final pass; witnesses found earlier are carried across iterations.
    `deadline`, when given, is called once per iteration and may abort the
    run by raising.
    """
    players = list(range(len(pg.players)))
    if not players:
        return RefinementResult(frozenset(), [], {})
    names = pg.players.names
    state_names = pg.ts.names
    rng = _rng_for(config.rng_seed, 0, 0)
    assignment = [rng.randrange(config.initial_blocks) for _ in players]
    blocks = [frozenset(p for p, b in zip(players, assignment) if b == i)
              for i in range(config.initial_blocks)]
    partition = Partition([b for b in blocks if b])
    trace: List[IterationRecord] = []
    known: Dict[int, BspWitness] = {}
    iteration = 0
    while True:
        iteration += 1
        if deadline is not None:
            deadline()
        singles = [bid for bid, b in partition.blocks.items() if len(b) == 1]
        found = compute_has_bsp(pg, partition, skip=singles, known=known,
                                cap=cap)
        for bid, w in found.items():
            if w is not None:
                known[bid] = w
        record = IterationRecord(
            index=iteration,
            partition={bid: tuple(names[p] for p in members)
                       for bid, members in partition.snapshot().items()},
            witnesses={bid: w.coalition_ids
                       for bid, w in sorted(known.items())})
        candidates = {bid: w for bid, w in known.items()
                      if len(partition.blocks[bid]) > 1}
        if not candidates:
            trace.append(record)
            break
        selected = select_blocks(pg, partition, candidates, config,
                                 iteration)[0]
        witness = candidates[selected]
        chosen, fr, single_id, rest_id = refine_block(
            pg, partition, witness, config, iteration)
        record.selected = selected
        record.delta = tuple(state_names[s] for s in sorted(witness.delta))
        record.frontier = tuple(state_names[s] for s in sorted(fr))
        record.split_state = state_names[chosen]
        trace.append(record)
        known.pop(selected, None)
        _remap_known(known, selected, (single_id, rest_id))
    final = compute_has_bsp(pg, partition, known=known, cap=cap)
    witnesses = {bid: w for bid, w in final.items() if w is not None}
    responsible = set()
    for bid in witnesses:
        responsible |= partition.blocks[bid]
    return RefinementResult(frozenset(responsible), trace, witnesses)


def responsibility_via_refinement(pg: PayoffGame, config: HeuristicsConfig,
                                  block_cap: int = DEFAULT_BLOCK_CAP,
                                  shapley_cap: int = DEFAULT_SHAPLEY_CAP,
                                  deadline=None,
                                  ) -> Tuple[ResponsibilityReport, RefinementResult]:
    """Exact values via refinement: identify the responsible players, then
    run the exact Shapley computation with them as the whole player
    universe (removing null players leaves the other values unchanged)."""
    result = refine_loop(pg, config, cap=block_cap, deadline=deadline)
    responsible = sorted(result.responsible)
    if len(responsible) > shapley_cap:
        raise PlayerCapExceeded(
            f"{len(responsible)} responsible players exceed the exact-Shapley "
            f"cap of {shapley_cap}",
            guidance="the positivity set was computed; rerun with a higher "
                     "--player-cap to obtain values")
    sub_players = PlayerSet(
        pg.players.kind,
        tuple(pg.players.names[p] for p in responsible),
        tuple(pg.players.members[p] for p in responsible))
    sub_pg = PayoffGame(pg.ts, pg.objective, pg.run, pg.mode, sub_players)
    sub_report = shapley_exact(sub_pg, cap=shapley_cap, deadline=deadline)
    sub_names = set(sub_report.names)
    values = tuple(
        sub_report.value_of(name) if name in sub_names else Fraction(0)
        for name in pg.players.names)
    report = ResponsibilityReport(
        pg.players.kind, pg.mode, pg.players.names, values,
        games_solved=pg.games_solved + sub_pg.games_solved,
        memo_hits=pg.memo_hits + sub_pg.memo_hits)
    return report, result
