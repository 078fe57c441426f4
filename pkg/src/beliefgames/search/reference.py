"""Pure-Python search over any perfect-information state.

This is both the fallback backend and the executable specification for the
compiled kernels: the Cython code mirrors these loops draw-for-draw, so
results must match bit-for-bit for the same seed (covered by tests).

States follow the :class:`beliefgames.model.PerfectState` protocol and are
treated as immutable. Canonical action order is the order returned by
``legal_actions``.
"""

from __future__ import annotations

from math import log, sqrt

from ..rng import SplitMix64


def random_playout(state, rng: SplitMix64) -> tuple[float, float]:
    """Play uniformly random actions (all players) to a terminal state."""
    while not state.is_terminal():
        joint = []
        for q in state.acting_players():
            legal = state.legal_actions(q)
            joint.append(legal[rng.below(len(legal))])
        state = state.apply(tuple(joint))
    return state.returns()


def pmc_total(state, hero: int, first_action, n_playouts: int, seed: int) -> float:
    """Sum of the hero's returns over n playouts opening with one action.

    The hero's first action is fixed; any simultaneous co-actor answers
    uniformly at random, as does everyone thereafter.
    """
    rng = SplitMix64(seed)
    total = 0.0
    for _ in range(n_playouts):
        joint = []
        for q in state.acting_players():
            if q == hero:
                joint.append(first_action)
            else:
                legal = state.legal_actions(q)
                joint.append(legal[rng.below(len(legal))])
        total += random_playout(state.apply(tuple(joint)), rng)[hero]
    return total


class _Node:
    """One tree node: per-acting-player visit/value statistics."""

    __slots__ = ("state", "terminal", "actors", "legal", "n", "w", "visits", "children")

    def __init__(self, state):
        self.state = state
        self.terminal = state.is_terminal()
        self.actors = () if self.terminal else state.acting_players()
        self.legal = {q: list(state.legal_actions(q)) for q in self.actors}
        self.n = {q: [0] * len(self.legal[q]) for q in self.actors}
        self.w = {q: [0.0] * len(self.legal[q]) for q in self.actors}
        self.visits = 0
        self.children = {}


def _select_index(node: _Node, q: int, c_uct: float) -> int:
    """UCB1 pick over the player's own statistics.

    Unvisited actions first in canonical order; ties keep the earliest
    maximum, which makes selection deterministic.
    """
    counts = node.n[q]
    for i, cnt in enumerate(counts):
        if cnt == 0:
            return i
    log_total = log(node.visits)
    values = node.w[q]
    best_i = 0
    best = -1.0
    for i, cnt in enumerate(counts):
        u = values[i] / cnt + c_uct * sqrt(log_total / cnt)
        if u > best:
            best = u
            best_i = i
    return best_i


def duct_visits(state, hero: int, iterations: int, c_uct: float, seed: int) -> list[int]:
    """Decoupled-UCT search; returns root visit counts for the hero.

    Each iteration descends the tree with every acting player selecting
    independently over its own statistics, expands one new node, evaluates
    it with a uniform random rollout, and backpropagates each player's
    return into that player's statistics along the path. The result is
    aligned with the hero's canonical legal action list at the root.
    """
    rng = SplitMix64(seed)
    root = _Node(state)
    for _ in range(iterations):
        node = root
        path = []
        while True:
            if node.terminal:
                ret = node.state.returns()
                break
            choice = {q: _select_index(node, q, c_uct) for q in node.actors}
            path.append((node, choice))
            key = tuple(choice[q] for q in node.actors)
            child = node.children.get(key)
            if child is None:
                joint = tuple(node.legal[q][choice[q]] for q in node.actors)
                child = _Node(node.state.apply(joint))
                node.children[key] = child
                if child.terminal:
                    ret = child.state.returns()
                else:
                    ret = random_playout(child.state, rng)
                break
            node = child
        for visited, choice in path:
            visited.visits += 1
            for q in visited.actors:
                i = choice[q]
                visited.n[q][i] += 1
                visited.w[q][i] += ret[q]
    return list(root.n[hero]) if not root.terminal else []


class GenericSearchPosition:
    """Search handle over a resolved perfect-information state."""

    def __init__(self, state, hero: int):
        self.state = state
        self.hero = hero

    def hero_actions(self) -> list:
        return list(self.state.legal_actions(self.hero))

    def pmc_total(self, first_action, n_playouts: int, seed: int) -> float:
        return pmc_total(self.state, self.hero, first_action, n_playouts, seed)

    def duct_visits(self, iterations: int, c_uct: float, seed: int) -> list[int]:
        return duct_visits(self.state, self.hero, iterations, c_uct, seed)
