"""Shared test helpers: seeded instance generators and brute-force oracles."""

from __future__ import annotations

from itertools import product

from beliefgames.belief import BeliefState, TypeSpec, build_belief
from beliefgames.rng import SplitMix64

LETTERS = "abcd"


def random_instance(rng: SplitMix64, max_pieces: int = 8, max_identities: int = 4,
                    min_pieces: int = 3) -> BeliefState | None:
    """One random per-type CSP with mixed exact/interval bounds.

    Returns None when the drawn instance is infeasible; callers that need
    feasible instances retry, others use the raw draw.
    """
    n = min_pieces + rng.below(max_pieces - min_pieces + 1)
    m = 2 + rng.below(max_identities - 1)
    identities = tuple(LETTERS[:m])
    # Bounds around a hidden witness multiset so most draws are feasible.
    witness = [rng.below(m) for _ in range(n)]
    counts = [witness.count(v) for v in range(m)]
    bounds = {}
    for v in range(m):
        if rng.below(2):
            bounds[identities[v]] = (counts[v], counts[v])  # exact
        else:
            lb = max(0, counts[v] - rng.below(2))
            ub = counts[v] + rng.below(3)
            bounds[identities[v]] = (lb, ub)
    pieces = {}
    for p in range(n):
        domain = {identities[witness[p]]}
        for v in range(m):
            if rng.below(100) < 55:
                domain.add(identities[v])
        pieces[p] = sorted(domain)
    try:
        return build_belief([TypeSpec(identities, bounds, pieces)])
    except Exception:
        return None


def feasible_instance(rng: SplitMix64, **kwargs) -> BeliefState:
    while True:
        inst = random_instance(rng, **kwargs)
        if inst is not None:
            return inst


def brute_force_support(belief: BeliefState, type_id: int) -> list[tuple]:
    """Independent oracle: filter the full cartesian product of domains."""
    csp = belief.csps[type_id]
    ptype = belief.types[type_id]
    domains = [ptype.labels_of(d) for d in csp.domains]
    out = []
    for combo in product(*domains):
        ok = True
        for v, label in enumerate(ptype.identities):
            c = combo.count(label)
            if not csp.lower[v] <= c <= csp.upper[v]:
                ok = False
                break
        if ok:
            out.append(combo)
    return out


def support_per_piece(solutions: list[tuple], n_pieces: int) -> list[set]:
    """Per-variable value supports from a solution list."""
    return [{sol[i] for sol in solutions} for i in range(n_pieces)]
