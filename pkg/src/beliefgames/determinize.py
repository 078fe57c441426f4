"""Sampling complete hidden-identity assignments from a belief state.

A determinization fixes every tracked piece to one identity consistent
with the belief (it always lies in the support), so perfect-information
search can run on it. Two samplers are provided:

* ``sample_uniform`` follows the constraint-only route: randomized
  variable order, values drawn uniformly from the current domain,
  propagation after every choice and chronological backtracking on
  contradiction. Value-uniform sampling with propagation is not exactly
  uniform over *solutions*; ``sample_solution_uniform`` adds a
  rejection step that corrects this for tests that need it.
* ``sample_bp_guided`` follows the probabilistic route: pick the
  unresolved piece whose marginal is most confident, draw its value from
  that marginal, propagate, and rerun damped BP warm-started from the
  previous message table.

Both are pure functions of (belief, seed): the same inputs give the same
sample.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from . import belief as bl
from .belief import BeliefState, Label
from .bp import BpConfig, MessageTable, build_graph, run_bp
from .errors import BudgetExceededError, ContradictionError
from .rng import SplitMix64

log = logging.getLogger(__name__)


class SamplerKind(str, Enum):
    CONSTRAINT_UNIFORM = "constraint"
    BP_GUIDED = "bp"


@dataclass(frozen=True)
class Determinization:
    """A complete piece -> identity assignment drawn from a belief state."""

    assignment: Mapping[int, Label]
    observable: Any = None

    def label(self, piece: int) -> Label:
        return self.assignment[piece]


def _freeze(resolved: BeliefState) -> Determinization:
    assignment = {p: resolved.resolved_label(p) for p in resolved.pieces()}
    return Determinization(assignment, resolved.observable)


def _uniform_complete(state: BeliefState, rng: SplitMix64) -> BeliefState:
    """Randomized backtracking search for one consistent completion."""
    order = list(state.unresolved_pieces())
    rng.shuffle(order)

    def walk(b: BeliefState, k: int) -> BeliefState | None:
        while k < len(order) and b.is_resolved(order[k]):
            k += 1
        if k == len(order):
            return b
        piece = order[k]
        values = list(b.domain_of(piece))
        rng.shuffle(values)
        for label in values:
            try:
                nxt = bl.assign(b, piece, label)
            except ContradictionError:
                continue
            done = walk(nxt, k + 1)
            if done is not None:
                return done
        return None

    done = walk(state, 0)
    if done is None:
        raise ContradictionError("belief state has no consistent completion")
    return done


def sample_uniform(belief: BeliefState, seed: int) -> Determinization:
    """Draw a determinization by value-uniform constrained sampling."""
    rng = SplitMix64(seed)
    return _freeze(_uniform_complete(bl.propagate_counts(belief), rng))


def sample_solution_uniform(
    belief: BeliefState, seed: int, *, max_attempts: int = 200_000
) -> Determinization:
    """Draw a determinization uniformly over the solution set.

    Restart-based rejection: one pass in fixed piece order drawing values
    uniformly from the current domain, accepted with probability
    proportional to the inverse of the branch probability. Intended for
    small test instances; raises BudgetExceededError if acceptance never
    happens within ``max_attempts``.
    """
    start = bl.propagate_counts(belief)
    rng = SplitMix64(seed)
    order = list(start.unresolved_pieces())
    bound = 1.0
    for p in order:
        bound /= bin(start.domain_mask(p)).count("1")
    for _ in range(max_attempts):
        b = start
        q = 1.0
        try:
            for piece in order:
                values = b.domain_of(piece)
                if len(values) > 1:
                    q /= len(values)
                    label = values[rng.below(len(values))]
                else:
                    label = values[0]
                b = bl.assign(b, piece, label)
        except ContradictionError:
            continue
        if rng.uniform() < bound / q:
            return _freeze(b)
    raise BudgetExceededError(f"no accepted sample within {max_attempts} attempts")


def sample_bp_guided(
    belief: BeliefState, config: BpConfig = BpConfig(), seed: int = 0
) -> Determinization:
    """Draw a determinization guided by belief-propagation marginals.

    Repeatedly selects the unresolved piece with the highest maximum
    marginal entry (ties to the lowest piece id), samples its identity
    from that marginal, assigns and propagates, then reruns BP for the
    affected type warm-started from the previous messages. A sampled value
    that contradicts the constraints (possible, BP is approximate) is
    zeroed out and redrawn; if a piece runs out of candidates, or BP
    itself fails, the remainder falls back to uniform constrained sampling.
    """
    rng = SplitMix64(seed)
    work = bl.propagate_counts(belief)
    tables: dict[int, MessageTable | None] = {}
    margs: dict[int, Mapping[int, tuple[float, ...]]] = {}
    dirty = {tid for tid in range(len(work.types))}

    while True:
        unresolved = work.unresolved_pieces()
        if not unresolved:
            return _freeze(work)
        try:
            for tid in sorted(dirty):
                graph = build_graph(work, tid)
                result = run_bp(graph, config, warm_start=tables.get(tid))
                tables[tid] = result.messages
                margs[tid] = result.marginals.probs
            dirty.clear()
        except ContradictionError:
            log.debug("bp failed mid-sample; completing uniformly")
            return _freeze(_uniform_complete(work, rng))

        best_piece, best_conf, best_tid = -1, -1.0, -1
        for piece in unresolved:
            tid, _ = work.locate(piece)
            conf = max(margs[tid][piece])
            if conf > best_conf:
                best_piece, best_conf, best_tid = piece, conf, tid
        weights = list(margs[best_tid][best_piece])
        ptype = work.types[best_tid]

        while True:
            total = sum(weights)
            if total <= 0.0:
                log.debug("piece %d ran out of candidate values; completing uniformly",
                          best_piece)
                return _freeze(_uniform_complete(work, rng))
            target = rng.uniform() * total
            acc = 0.0
            pick = -1
            for v, w in enumerate(weights):
                if w <= 0.0:
                    continue
                acc += w
                pick = v
                if target < acc:
                    break
            try:
                work = bl.assign(work, best_piece, ptype.identities[pick])
            except ContradictionError:
                weights[pick] = 0.0
                continue
            break
        dirty.add(best_tid)


def sample(
    belief: BeliefState,
    kind: SamplerKind,
    seed: int,
    bp_config: BpConfig = BpConfig(),
) -> Determinization:
    """Dispatch on sampler kind."""
    if kind is SamplerKind.BP_GUIDED:
        return sample_bp_guided(belief, bp_config, seed)
    return sample_uniform(belief, seed)
