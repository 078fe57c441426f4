"""Approximate marginals over belief-state domains via belief propagation.

Each per-type cardinality CSP is compiled to a factor graph: one variable
node per unresolved piece and one count factor per identity whose bound can
still bind. A count factor over identity v constrains the sum of the binary
indicators "piece p takes v" across the pieces whose domain contains v, so
its messages are computed with a count-distribution dynamic program instead
of enumerating joint assignments.

Messages are 2-vectors over that indicator, stored in linear space and
normalised on every update. ``run_bp`` runs damped synchronous rounds and
extracts per-piece marginals once the messages settle. Loopy graphs make
the result approximate; ``marginals_exact`` computes the true solution
frequencies by exhaustive enumeration and serves as the test oracle.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .belief import BeliefState, enumerate_support
from .errors import ContradictionError, DegenerateMessageError, InvalidConfigError


@dataclass(frozen=True)
class BpConfig:
    """Damping factor, round limit and convergence threshold.

    ``trace`` prints the per-round maximum message change to stderr.
    """

    damping: float = 0.5
    max_iterations: int = 100
    convergence_epsilon: float = 1e-6
    trace: bool = False

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise InvalidConfigError("damping must be in [0, 1)")
        if self.max_iterations < 1:
            raise InvalidConfigError("max_iterations must be >= 1")
        if self.convergence_epsilon <= 0.0:
            raise InvalidConfigError("convergence_epsilon must be positive")


@dataclass(frozen=True)
class FactorGraph:
    """Bipartite count-constraint graph for one piece type.

    Variables are the type's unresolved pieces; factor ``v`` connects
    exactly the variables whose domain contains identity index ``v``.
    Resolved pieces are folded into the effective bounds instead of
    appearing as frozen variables, and factors that can never bind
    (lower bound met, upper bound at least the factor degree) are omitted
    since they would only ever send uniform messages.
    """

    type_id: int
    identities: tuple
    variables: tuple[int, ...]                       # piece ids, ascending
    var_values: Mapping[int, tuple[int, ...]]        # piece -> identity indices
    factors: tuple[int, ...]                         # identity indices, ascending
    factor_vars: Mapping[int, tuple[int, ...]]       # identity index -> piece ids
    lower: Mapping[int, int]                         # effective bounds per factor
    upper: Mapping[int, int]
    resolved: Mapping[int, int]                      # folded pieces -> identity index

    def edges(self) -> list[tuple[int, int]]:
        """(identity index, piece) pairs in canonical order."""
        return [(v, p) for v in self.factors for p in self.factor_vars[v]]


@dataclass(frozen=True)
class Marginals:
    """Per-piece probability vectors over the type's identity list."""

    type_id: int
    identities: tuple
    probs: Mapping[int, tuple[float, ...]]

    def prob(self, piece: int, label) -> float:
        return self.probs[piece][self.identities.index(label)]

    def confidence(self, piece: int) -> float:
        """Largest marginal entry: how settled the piece is."""
        return max(self.probs[piece])


@dataclass
class MessageTable:
    """All edge messages, keyed by (identity index, piece) per direction."""

    factor_to_var: dict[tuple[int, int], tuple[float, float]] = field(default_factory=dict)
    var_to_factor: dict[tuple[int, int], tuple[float, float]] = field(default_factory=dict)


def build_graph(belief: BeliefState, type_id: int) -> FactorGraph:
    """Compile one type's CSP (assumed feasible and propagated) to a graph."""
    csp = belief.csps[type_id]
    ptype = belief.types[type_id]
    m = len(ptype.identities)

    resolved: dict[int, int] = {}
    variables: list[int] = []
    var_values: dict[int, tuple[int, ...]] = {}
    support: dict[int, list[int]] = {v: [] for v in range(m)}
    assigned = [0] * m
    for p, d in zip(csp.pieces, csp.domains):
        if d & (d - 1) == 0:
            resolved[p] = d.bit_length() - 1
            assigned[d.bit_length() - 1] += 1
        else:
            variables.append(p)
            values = tuple(v for v in range(m) if d >> v & 1)
            var_values[p] = values
            for v in values:
                support[v].append(p)

    factors: list[int] = []
    factor_vars: dict[int, tuple[int, ...]] = {}
    lower: dict[int, int] = {}
    upper: dict[int, int] = {}
    for v in range(m):
        if not support[v]:
            continue
        ub = csp.upper[v] - assigned[v]
        if ub < 0:
            raise ContradictionError("resolved pieces exceed an identity's upper bound")
        lb = max(0, csp.lower[v] - assigned[v])
        if lb == 0 and ub >= len(support[v]):
            continue  # can never bind
        factors.append(v)
        factor_vars[v] = tuple(support[v])
        lower[v] = lb
        upper[v] = ub
    return FactorGraph(
        type_id=type_id,
        identities=ptype.identities,
        variables=tuple(variables),
        var_values=var_values,
        factors=tuple(factors),
        factor_vars=factor_vars,
        lower=lower,
        upper=upper,
        resolved=resolved,
    )


# --------------------------------------------------------------------------
# Message computation
# --------------------------------------------------------------------------


def _count_distribution(messages: Sequence[tuple[float, float]], cap: int) -> list[float]:
    """Distribution of the indicator sum, lumping all counts > cap at cap+1."""
    dist = [0.0] * (cap + 2)
    dist[0] = 1.0
    for m0, m1 in messages:
        new = [0.0] * (cap + 2)
        for s, ps in enumerate(dist):
            if ps == 0.0:
                continue
            new[s] += ps * m0
            t = s + 1 if s < cap + 1 else cap + 1
            new[t] += ps * m1
        dist = new
    return dist


def _message_from_distribution(dist: list[float], lb: int, ub: int) -> tuple[float, float]:
    nu1 = sum(dist[s] for s in range(max(0, lb - 1), ub))
    nu0 = sum(dist[s] for s in range(lb, ub + 1))
    total = nu0 + nu1
    if total <= 0.0:
        raise DegenerateMessageError("count factor admits no assignment on this edge")
    return (nu0 / total, nu1 / total)


def factor_message(
    lb: int, ub: int, others: Sequence[tuple[float, float]]
) -> tuple[float, float]:
    """Message from a count factor to one variable.

    ``others`` holds the incoming messages of the factor's remaining
    neighbours. Entry b of the result is proportional to the probability
    that b plus the neighbours' indicator sum lands inside [lb, ub].
    """
    return _message_from_distribution(_count_distribution(others, ub), lb, ub)


def _factor_messages_all(
    lb: int, ub: int, incoming: Sequence[tuple[float, float]]
) -> list[tuple[float, float]]:
    """All outgoing messages of one factor.

    Shares prefix/suffix count distributions so the factor's whole message
    set costs O(degree * ub^2) instead of re-convolving from scratch per
    edge.
    """
    deg = len(incoming)
    cap = ub
    prefix = [None] * (deg + 1)
    prefix[0] = [1.0] + [0.0] * (cap + 1)
    for i, (m0, m1) in enumerate(incoming):
        cur = prefix[i]
        new = [0.0] * (cap + 2)
        for s, ps in enumerate(cur):
            if ps == 0.0:
                continue
            new[s] += ps * m0
            t = s + 1 if s < cap + 1 else cap + 1
            new[t] += ps * m1
        prefix[i + 1] = new
    suffix = [None] * (deg + 1)
    suffix[deg] = [1.0] + [0.0] * (cap + 1)
    for i in range(deg - 1, -1, -1):
        m0, m1 = incoming[i]
        cur = suffix[i + 1]
        new = [0.0] * (cap + 2)
        for s, ps in enumerate(cur):
            if ps == 0.0:
                continue
            new[s] += ps * m0
            t = s + 1 if s < cap + 1 else cap + 1
            new[t] += ps * m1
        suffix[i] = new
    out = []
    for i in range(deg):
        pre, suf = prefix[i], suffix[i + 1]
        # Lumped entries (index cap+1) never matter: they only reach sums > ub.
        dist = [0.0] * (cap + 2)
        for a in range(cap + 1):
            pa = pre[a]
            if pa == 0.0:
                continue
            for b in range(cap + 1 - a):
                dist[a + b] += pa * suf[b]
        out.append(_message_from_distribution(dist, lb, ub))
    return out


def variable_message(
    values: Sequence[int], to_value: int, incoming: Mapping[int, tuple[float, float]]
) -> tuple[float, float]:
    """Message from a variable to the factor of identity ``to_value``.

    Combines the factor-to-variable messages of every other connected
    identity into an unnormalised belief over the variable's values, then
    collapses it to the indicator "takes to_value or not".
    """
    beliefs = {}
    for u in values:
        prod = 1.0
        for w, (m0, m1) in incoming.items():
            if w == to_value:
                continue
            prod *= m1 if w == u else m0
        beliefs[u] = prod
    mu1 = beliefs[to_value]
    mu0 = sum(b for u, b in beliefs.items() if u != to_value)
    total = mu0 + mu1
    if total <= 0.0:
        raise DegenerateMessageError("variable belief normalised to zero")
    return (mu0 / total, mu1 / total)


# --------------------------------------------------------------------------
# Main loop
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BpResult:
    marginals: Marginals
    messages: MessageTable
    converged: bool
    iterations: int


def run_bp(
    graph: FactorGraph, config: BpConfig = BpConfig(), warm_start: MessageTable | None = None
) -> BpResult:
    """Damped synchronous belief propagation on a count-factor graph.

    Each round recomputes all factor-to-variable messages, then all
    variable-to-factor messages, damping every update by ``config.damping``
    toward the previous value. Stops when the largest absolute message
    change falls below ``config.convergence_epsilon`` or the round limit is
    reached. Warm-starting from a previous table (stale edges are ignored)
    does not change the fixpoint, only how fast it is reached.
    """
    lam = config.damping
    var_factors: dict[int, list[int]] = {p: [] for p in graph.variables}
    for v in graph.factors:
        for p in graph.factor_vars[v]:
            var_factors[p].append(v)

    v2f: dict[tuple[int, int], tuple[float, float]] = {}
    f2v: dict[tuple[int, int], tuple[float, float]] = {}
    for v in graph.factors:
        for p in graph.factor_vars[v]:
            default = (0.5, 0.5)
            if warm_start is not None:
                v2f[(p, v)] = warm_start.var_to_factor.get((p, v), default)
                f2v[(v, p)] = warm_start.factor_to_var.get((v, p), default)
            else:
                v2f[(p, v)] = default
                f2v[(v, p)] = default

    def damp(old: tuple[float, float], new: tuple[float, float]) -> tuple[float, float]:
        return (lam * old[0] + (1.0 - lam) * new[0], lam * old[1] + (1.0 - lam) * new[1])

    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        max_delta = 0.0
        for v in graph.factors:
            neighbours = graph.factor_vars[v]
            incoming = [v2f[(p, v)] for p in neighbours]
            outs = _factor_messages_all(graph.lower[v], graph.upper[v], incoming)
            for p, msg in zip(neighbours, outs):
                old = f2v[(v, p)]
                msg = damp(old, msg)
                delta = max(abs(msg[0] - old[0]), abs(msg[1] - old[1]))
                if delta > max_delta:
                    max_delta = delta
                f2v[(v, p)] = msg
        for p in graph.variables:
            incoming = {w: f2v[(w, p)] for w in var_factors[p]}
            for w in var_factors[p]:
                msg = variable_message(graph.var_values[p], w, incoming)
                old = v2f[(p, w)]
                msg = damp(old, msg)
                delta = max(abs(msg[0] - old[0]), abs(msg[1] - old[1]))
                if delta > max_delta:
                    max_delta = delta
                v2f[(p, w)] = msg
        if config.trace:
            print(f"bp[type {graph.type_id}] round {iterations}: max delta {max_delta:.3e}",
                  file=sys.stderr)
        if max_delta < config.convergence_epsilon:
            converged = True
            break
    if not graph.variables:
        converged = True
        iterations = 0

    probs: dict[int, tuple[float, ...]] = {}
    n_idents = len(graph.identities)
    for p in graph.variables:
        weights = []
        for u in graph.var_values[p]:
            prod = 1.0
            for w in var_factors[p]:
                m0, m1 = f2v[(w, p)]
                prod *= m1 if w == u else m0
            weights.append(prod)
        total = sum(weights)
        if total <= 0.0:
            raise ContradictionError("belief propagation produced an all-zero belief")
        vec = [0.0] * n_idents
        for u, wgt in zip(graph.var_values[p], weights):
            vec[u] = wgt / total
        probs[p] = tuple(vec)
    for p, u in graph.resolved.items():
        vec = [0.0] * n_idents
        vec[u] = 1.0
        probs[p] = tuple(vec)

    marginals = Marginals(graph.type_id, graph.identities, probs)
    table = MessageTable(factor_to_var=f2v, var_to_factor=v2f)
    return BpResult(marginals, table, converged, iterations)


def marginals_exact(
    belief: BeliefState, type_id: int, *, max_nodes: int = 1_000_000
) -> Marginals:
    """Exact per-piece marginals: identity frequencies over all solutions.

    This is the enumeration approach BP replaces; kept as the oracle for
    tolerance tests. Raises ContradictionError on empty support.
    """
    solutions = enumerate_support(belief, type_id, max_nodes=max_nodes)
    if not solutions:
        raise ContradictionError("no assignment satisfies the CSP")
    ptype = belief.types[type_id]
    csp = belief.csps[type_id]
    index = {lab: i for i, lab in enumerate(ptype.identities)}
    counts = [[0] * len(ptype.identities) for _ in csp.pieces]
    for sol in solutions:
        for pos, lab in enumerate(sol):
            counts[pos][index[lab]] += 1
    total = float(len(solutions))
    probs = {
        p: tuple(c / total for c in counts[pos]) for pos, p in enumerate(csp.pieces)
    }
    return Marginals(type_id, ptype.identities, probs)
