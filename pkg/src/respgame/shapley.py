"""Coalition payoff games and exact Shapley responsibility values."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import PlayerCapExceeded
from .games import OPTIMISTIC, build_game, game_value, solve
from .model import LassoRun, Objective, TransitionSystem

STATE_PLAYERS = "states"
BLOCK_PLAYERS = "blocks"

DEFAULT_SHAPLEY_CAP = 24
DEFAULT_ORACLE_CAP = 20


@dataclass(frozen=True)
class PlayerSet:
    """Ordered player identities: individual states or blocks of states.

    For block players, `members[i]` is the state set of player i and the
    blocks partition the full state space.  For state players, `members[i]`
    is the singleton of the state itself.
    """

    kind: str
    names: Tuple[str, ...]
    members: Tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.names) != len(set(self.names)):
            raise ValueError("duplicate player names")

    def __len__(self):
        return len(self.names)

    @staticmethod
    def of_states(ts: TransitionSystem, indices: Sequence[int]) -> "PlayerSet":
        indices = tuple(sorted(indices))
        return PlayerSet(STATE_PLAYERS,
                         tuple(ts.names[i] for i in indices),
                         tuple(frozenset([i]) for i in indices))

    @staticmethod
    def of_blocks(names: Sequence[str], members: Sequence[frozenset]) -> "PlayerSet":
        order = sorted(range(len(names)), key=lambda i: names[i])
        return PlayerSet(BLOCK_PLAYERS,
                         tuple(names[i] for i in order),
                         tuple(frozenset(members[i]) for i in order))


@dataclass
class PayoffGame:
    """Monotone 0/1 coalition game induced by a model, objective and run.

    gamma() is memoised per coalition bitmask; the memo is shared by every
    caller holding this object (Shapley enumeration, refinement, the
    polynomial positivity algorithms).
    """

    ts: TransitionSystem
    objective: Objective
    run: Optional[LassoRun]
    mode: str
    players: PlayerSet
    memo: Dict[int, int] = field(default_factory=dict)
    games_solved: int = 0
    memo_hits: int = 0

    def flatten(self, mask: int) -> frozenset:
        states = set()
        i = 0
        m = mask
        while m:
            if m & 1:
                states |= self.players.members[i]
            m >>= 1
            i += 1
        return frozenset(states)

    def mask_of_names(self, names) -> int:
        mask = 0
        for name in names:
            mask |= 1 << self.players.names.index(name)
        return mask

    def gamma(self, mask: int) -> int:
        hit = self.memo.get(mask)
        if hit is not None:
            self.memo_hits += 1
            return hit
        game = build_game(self.ts, self.objective, self.run,
                          self.flatten(mask), self.mode)
        value = game_value(game)
        self.games_solved += 1
        self.memo[mask] = value
        return value

    def full_mask(self) -> int:
        return (1 << len(self.players)) - 1


def is_switching_pair(pg: PayoffGame, coalition_mask: int, player: int) -> bool:
    """gamma(C) = 0 and gamma(C + player) = 1; the player must be outside C."""
    bit = 1 << player
    if coalition_mask & bit:
        raise ValueError("player already in the coalition")
    return pg.gamma(coalition_mask) == 0 and pg.gamma(coalition_mask | bit) == 1


@dataclass(frozen=True)
class ResponsibilityReport:
    """Exact rational responsibility per player plus the positivity set."""

    player_kind: str
    mode: str
    names: Tuple[str, ...]
    values: Tuple[Fraction, ...]
    games_solved: int = 0
    memo_hits: int = 0

    def value_of(self, name: str) -> Fraction:
        return self.values[self.names.index(name)]

    def positivity(self) -> frozenset:
        return frozenset(n for n, v in zip(self.names, self.values) if v > 0)

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(zip(self.names, self.values))


def threshold(report: ResponsibilityReport, player: str, bound: Fraction) -> bool:
    """Strict exact comparison value(player) > bound."""
    return report.value_of(player) > Fraction(bound)


def _shapley_weights(n: int) -> List[Fraction]:
    # k!(n-k-1)!/n! == 1 / (n * C(n-1, k)), kept exact via integers
    return [Fraction(1, n * math.comb(n - 1, k)) for k in range(n)]


def shapley_exact(pg: PayoffGame, cap: int = DEFAULT_SHAPLEY_CAP,
                  threads: int = 1, deadline=None) -> ResponsibilityReport:
    """Exact Shapley values by one pass over all coalitions.

    Evaluates gamma once per coalition into a bit table, then counts
    switching pairs per (player, coalition size).  Exact big-rational
    arithmetic throughout; the result does not depend on enumeration order
    or on `threads`.  `deadline`, when given, is called periodically and
    may abort the run by raising.
    """
    n = len(pg.players)
    if n > cap:
        raise PlayerCapExceeded(
            f"{n} players exceed the exact-Shapley cap of {cap}",
            guidance="use the refinement analysis, a state grouping, "
                     "or raise --player-cap")
    if n == 0:
        return ResponsibilityReport(pg.players.kind, pg.mode, (), (),
                                    pg.games_solved, pg.memo_hits)
    total = 1 << n
    table = bytearray(total)
    if threads > 1:
        chunk = max(1, total // (threads * 8))
        ranges = [(lo, min(lo + chunk, total))
                  for lo in range(0, total, chunk)]

        def fill(rng):
            lo, hi = rng
            if deadline is not None:
                deadline()
            for mask in range(lo, hi):
                table[mask] = pg.gamma(mask)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, ranges))
    else:
        for mask in range(total):
            if deadline is not None and mask % 1024 == 0:
                deadline()
            table[mask] = pg.gamma(mask)
    counts = [[0] * n for _ in range(n)]  # player -> |C| -> switching pairs
    for mask in range(total):
        if table[mask]:
            continue
        k = mask.bit_count()
        for p in range(n):
            bit = 1 << p
            if mask & bit:
                continue
            if table[mask | bit]:
                counts[p][k] += 1
    weights = _shapley_weights(n)
    values = tuple(sum((weights[k] * c for k, c in enumerate(counts[p]) if c),
                       Fraction(0)) for p in range(n))
    return ResponsibilityReport(pg.players.kind, pg.mode, pg.players.names,
                                values, pg.games_solved, pg.memo_hits)


def prune_dummies(ts: TransitionSystem, obj: Objective, run: Optional[LassoRun],
                  mode: str) -> PlayerSet:
    """Player set with provably-null states removed.

    Removes states with a single outgoing transition, states off the run in
    optimistic mode, and states inside Sat's winning region when Sat
    controls nothing or outside it when Sat controls everything.  Every
    removed state is a null player, so the Shapley values of the remaining
    players are unchanged.
    """
    n = len(ts)
    candidates = set(range(n))
    if mode == OPTIMISTIC and run is not None:
        candidates &= run.states()
    candidates = {s for s in candidates if len(ts.succ[s]) > 1}
    if candidates:
        empty = solve(build_game(ts, obj, run, frozenset(), mode)).sat_wins
        full = solve(build_game(ts, obj, run, frozenset(range(n)), mode)).sat_wins
        candidates = {s for s in candidates if s not in empty and s in full}
    return PlayerSet.of_states(ts, sorted(candidates))


def state_payoff_game(ts: TransitionSystem, obj: Objective,
                      run: Optional[LassoRun], mode: str,
                      prune: bool = True) -> PayoffGame:
    """Convenience constructor for the state-player coalition game."""
    if prune:
        players = prune_dummies(ts, obj, run, mode)
    else:
        players = PlayerSet.of_states(ts, range(len(ts)))
    return PayoffGame(ts, obj, run, mode, players)


def oracle_shapley(ts: TransitionSystem, obj: Objective,
                   run: Optional[LassoRun], mode: str,
                   player_indices: Optional[Sequence[int]] = None,
                   cap: int = DEFAULT_ORACLE_CAP) -> ResponsibilityReport:
    """Reference implementation: direct evaluation of the defining sum.

    Deliberately naive and independent of the production path: it keeps its
    own per-call gamma table (no memo sharing) and applies the factorial
    formula term by term.  Intended for tests and the `oracle` CLI command.
    """
    if player_indices is None:
        player_indices = range(len(ts))
    players = PlayerSet.of_states(ts, player_indices)
    n = len(players)
    if n > cap:
        raise PlayerCapExceeded(f"{n} players exceed the oracle cap of {cap}")
    if n == 0:
        return ResponsibilityReport(players.kind, mode, (), ())
    gamma = {}
    for mask in range(1 << n):
        states = set()
        for i in range(n):
            if mask >> i & 1:
                states |= players.members[i]
        gamma[mask] = game_value(build_game(ts, obj, run, states, mode))
    fact = math.factorial
    values = []
    for p in range(n):
        bit = 1 << p
        acc = Fraction(0)
        for mask in range(1 << n):
            if mask & bit:
                continue
            k = mask.bit_count()
            acc += Fraction(fact(k) * fact(n - k - 1), fact(n)) * (
                gamma[mask | bit] - gamma[mask])
        values.append(acc)
    return ResponsibilityReport(players.kind, mode, players.names,
                                tuple(values), games_solved=1 << n)


def oracle_minimal_winning(ts: TransitionSystem, obj: Objective,
                           run: Optional[LassoRun], mode: str,
                           player_indices: Optional[Sequence[int]] = None,
                           cap: int = DEFAULT_ORACLE_CAP) -> List[frozenset]:
    """All minimal winning coalitions, as sets of player names."""
    if player_indices is None:
        player_indices = range(len(ts))
    players = PlayerSet.of_states(ts, player_indices)
    n = len(players)
    if n > cap:
        raise PlayerCapExceeded(f"{n} players exceed the oracle cap of {cap}")
    gamma = {}
    for mask in range(1 << n):
        states = set()
        for i in range(n):
            if mask >> i & 1:
                states |= players.members[i]
        gamma[mask] = game_value(build_game(ts, obj, run, states, mode))
    minimal = []
    for mask in range(1 << n):
        if not gamma[mask]:
            continue
        if all(gamma[mask & ~(1 << p)] == 0
               for p in range(n) if mask >> p & 1):
            minimal.append(frozenset(players.names[p]
                                     for p in range(n) if mask >> p & 1))
    return minimal
