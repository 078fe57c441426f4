"""Constraint-based belief states over hidden piece identities.

A belief state describes what a player knows about every piece whose
identity is hidden. Pieces are grouped by type; pieces of one type share a
set of valid identity labels and a per-identity count bound (a global
cardinality constraint). Each piece keeps a domain: the subset of labels it
may still have. Observations shrink domains, and count-based propagation
prunes further, possibly forcing pieces to a single identity.

Domains are bitmasks over the identity indices of the piece's type (up to
64 identities per type, far above what the supported games need). All
operations are pure: they return a new ``BeliefState`` and leave the input
untouched, so snapshots can be copied and shared freely.

``enumerate_support`` is the exhaustive oracle used throughout the tests:
it lists every complete identity assignment consistent with the domains and
count bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .errors import BudgetExceededError, ContradictionError

Label = Hashable

MAX_IDENTITIES = 64


@dataclass(frozen=True)
class PieceType:
    """A piece type: an ordered list of valid identity labels."""

    type_id: int
    identities: tuple[Label, ...]
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.identities:
            raise ValueError("a piece type needs at least one identity")
        if len(self.identities) > MAX_IDENTITIES:
            raise ValueError(f"at most {MAX_IDENTITIES} identities per type")
        index = {label: i for i, label in enumerate(self.identities)}
        if len(index) != len(self.identities):
            raise ValueError("identity labels must be unique within a type")
        object.__setattr__(self, "_index", index)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.identities)) - 1

    def index_of(self, label: Label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown identity {label!r} for type {self.type_id}") from None

    def mask_of(self, labels: Iterable[Label]) -> int:
        mask = 0
        for label in labels:
            mask |= 1 << self.index_of(label)
        return mask

    def labels_of(self, mask: int) -> tuple[Label, ...]:
        return tuple(lab for i, lab in enumerate(self.identities) if mask >> i & 1)


@dataclass(frozen=True)
class _TypeCsp:
    """Per-type CSP: pieces, domain bitmasks and count bounds."""

    pieces: tuple[int, ...]        # piece ids, ascending
    domains: tuple[int, ...]       # bitmask per piece, aligned with `pieces`
    lower: tuple[int, ...]         # per identity index
    upper: tuple[int, ...]

    def position(self, piece: int) -> int:
        # Types hold at most a couple dozen pieces; linear scan is fine.
        for pos, p in enumerate(self.pieces):
            if p == piece:
                return pos
        raise KeyError(f"piece {piece} not tracked by this type")


@dataclass(frozen=True)
class TypeSpec:
    """Construction-time description of one piece type.

    ``bounds`` maps each identity label to its (lower, upper) occurrence
    count; ``pieces`` maps piece id to its initial domain (``None`` means
    the full identity set).
    """

    identities: Sequence[Label]
    bounds: Mapping[Label, tuple[int, int]]
    pieces: Mapping[int, Iterable[Label] | None] = field(default_factory=dict)


@dataclass(frozen=True)
class BeliefState:
    """One player's belief: a cardinality-constrained CSP per piece type.

    Exposed belief states are always propagated and feasible; a piece
    whose domain is a single label is called resolved.
    """

    types: tuple[PieceType, ...]
    csps: tuple[_TypeCsp, ...]
    observable: Any = None

    # -- lookup helpers ----------------------------------------------------

    def locate(self, piece: int) -> tuple[int, int]:
        """Return (type_id, position) for a piece."""
        for tid, csp in enumerate(self.csps):
            for pos, p in enumerate(csp.pieces):
                if p == piece:
                    return tid, pos
        raise KeyError(f"unknown piece {piece}")

    def pieces(self) -> tuple[int, ...]:
        out = []
        for csp in self.csps:
            out.extend(csp.pieces)
        return tuple(sorted(out))

    def type_of(self, piece: int) -> PieceType:
        tid, _ = self.locate(piece)
        return self.types[tid]

    def domain_mask(self, piece: int) -> int:
        tid, pos = self.locate(piece)
        return self.csps[tid].domains[pos]

    def domain_of(self, piece: int) -> tuple[Label, ...]:
        tid, pos = self.locate(piece)
        return self.types[tid].labels_of(self.csps[tid].domains[pos])

    def is_resolved(self, piece: int) -> bool:
        mask = self.domain_mask(piece)
        return mask & (mask - 1) == 0

    def resolved_label(self, piece: int) -> Label:
        tid, pos = self.locate(piece)
        mask = self.csps[tid].domains[pos]
        if mask & (mask - 1) != 0:
            raise ValueError(f"piece {piece} is not resolved")
        return self.types[tid].identities[mask.bit_length() - 1]

    def unresolved_pieces(self) -> tuple[int, ...]:
        out = []
        for csp in self.csps:
            for p, d in zip(csp.pieces, csp.domains):
                if d & (d - 1) != 0:
                    out.append(p)
        return tuple(sorted(out))

    def with_observable(self, observable: Any) -> "BeliefState":
        return BeliefState(self.types, self.csps, observable)

    def _replace_csp(self, tid: int, csp: _TypeCsp) -> "BeliefState":
        csps = list(self.csps)
        csps[tid] = csp
        return BeliefState(self.types, tuple(csps), self.observable)


def build_belief(specs: Sequence[TypeSpec], observable: Any = None) -> BeliefState:
    """Create a propagated belief state from per-type specifications."""
    types: list[PieceType] = []
    csps: list[_TypeCsp] = []
    seen: set[int] = set()
    for tid, spec in enumerate(specs):
        ptype = PieceType(tid, tuple(spec.identities))
        lower, upper = [], []
        for label in ptype.identities:
            lb, ub = spec.bounds.get(label, (0, len(spec.pieces)))
            if lb < 0 or ub < lb:
                raise ValueError(f"bad bounds for {label!r}: [{lb}, {ub}]")
            lower.append(lb)
            upper.append(ub)
        pieces = tuple(sorted(spec.pieces))
        if any(p < 0 for p in pieces):
            raise ValueError("piece ids must be non-negative")
        if seen & set(pieces):
            raise ValueError("piece ids must be unique across types")
        seen |= set(pieces)
        domains = []
        for p in pieces:
            allowed = spec.pieces[p]
            domains.append(ptype.full_mask if allowed is None else ptype.mask_of(allowed))
        types.append(ptype)
        csps.append(_TypeCsp(pieces, tuple(domains), tuple(lower), tuple(upper)))
    return propagate_counts(BeliefState(tuple(types), tuple(csps), observable))


# --------------------------------------------------------------------------
# Core operations
# --------------------------------------------------------------------------


def restrict_domain_mask(belief: BeliefState, piece: int, allowed_mask: int) -> BeliefState:
    """Intersect a piece's domain with a bitmask of allowed identities."""
    tid, pos = belief.locate(piece)
    csp = belief.csps[tid]
    new_domain = csp.domains[pos] & allowed_mask
    if new_domain == csp.domains[pos]:
        return propagate_counts(belief)
    domains = list(csp.domains)
    domains[pos] = new_domain
    updated = belief._replace_csp(tid, _TypeCsp(csp.pieces, tuple(domains), csp.lower, csp.upper))
    return propagate_counts(updated)


def restrict_domain(belief: BeliefState, piece: int, allowed: Iterable[Label]) -> BeliefState:
    """Intersect a piece's domain with ``allowed`` and re-propagate.

    Raises ContradictionError if the intersection empties the domain or the
    count bounds become unsatisfiable: the observation contradicts the
    belief, which indicates a game-model bug.
    """
    tid, _ = belief.locate(piece)
    return restrict_domain_mask(belief, piece, belief.types[tid].mask_of(allowed))


def assign(belief: BeliefState, piece: int, identity: Label) -> BeliefState:
    """Force a piece to one identity (must be in its current domain)."""
    tid, pos = belief.locate(piece)
    bit = 1 << belief.types[tid].index_of(identity)
    if not belief.csps[tid].domains[pos] & bit:
        raise ContradictionError(
            f"cannot assign piece {piece} to {identity!r}: not in its domain"
        )
    return restrict_domain_mask(belief, piece, bit)


def propagate_counts(belief: BeliefState) -> BeliefState:
    """Run count-based filtering to a fixpoint on every type.

    Per sweep and identity v (with lb/ub its bounds):
      1. if the pieces already resolved to v reach ub, v is removed from
         every other domain;
      2. if the pieces that still may take v are exactly lb, they are all
         fixed to v;
      3. feasibility: resolved counts within ub, possible counts above lb,
         no empty domain, sum of lower bounds at most the piece count, and
         the per-identity achievable counts must cover all pieces.

    This is deliberately weaker than full matching-based filtering: it is
    sound (never prunes a supported value; checked against the enumeration
    oracle) and catches every forced singleton the games rely on.
    """
    new_csps = list(belief.csps)
    changed_any = False
    for tid, csp in enumerate(belief.csps):
        domains = list(csp.domains)
        if _propagate_type(domains, csp.lower, csp.upper):
            new_csps[tid] = _TypeCsp(csp.pieces, tuple(domains), csp.lower, csp.upper)
            changed_any = True
    if not changed_any:
        return belief
    return BeliefState(belief.types, tuple(new_csps), belief.observable)


def _propagate_type(domains: list[int], lower: tuple[int, ...], upper: tuple[int, ...]) -> bool:
    """Fixpoint filtering over one type's domains, in place."""
    n = len(domains)
    m = len(lower)
    if sum(lower) > n:
        raise ContradictionError("sum of lower bounds exceeds piece count")
    changed_any = False
    while True:
        possible = [0] * m
        assigned = [0] * m
        for d in domains:
            if d == 0:
                raise ContradictionError("a piece has an empty domain")
            dd = d
            while dd:
                low = dd & -dd
                possible[low.bit_length() - 1] += 1
                dd ^= low
            if d & (d - 1) == 0:
                assigned[d.bit_length() - 1] += 1
        achievable = 0
        for v in range(m):
            if assigned[v] > upper[v]:
                raise ContradictionError("more pieces resolved to an identity than allowed")
            if possible[v] < lower[v]:
                raise ContradictionError("too few pieces can take a required identity")
            achievable += min(upper[v], possible[v])
        if achievable < n:
            raise ContradictionError("count bounds cannot cover all pieces")
        changed = False
        for v in range(m):
            bit = 1 << v
            if assigned[v] == upper[v]:
                for i, d in enumerate(domains):
                    if d & bit and d != bit:
                        domains[i] = d & ~bit
                        changed = True
            if 0 < lower[v] == possible[v]:
                for i, d in enumerate(domains):
                    if d & bit and d != bit:
                        domains[i] = bit
                        changed = True
        if not changed:
            return changed_any
        changed_any = True


def is_feasible(belief: BeliefState) -> bool:
    """True iff propagation succeeds (some assignment may satisfy the CSP)."""
    try:
        propagate_counts(belief)
        return True
    except ContradictionError:
        return False


def enumerate_support(
    belief: BeliefState, type_id: int, *, max_nodes: int = 1_000_000
) -> list[tuple[Label, ...]]:
    """Exhaustively list the assignments satisfying one type's CSP.

    Returns complete assignments (one label per piece, in piece order),
    lexicographically ordered by identity index. This is the testing
    oracle; the guard raises BudgetExceededError after ``max_nodes``
    explored branches.
    """
    csp = belief.csps[type_id]
    ptype = belief.types[type_id]
    n = len(csp.pieces)
    m = len(ptype.identities)
    lower, upper = csp.lower, csp.upper

    # possible-count suffixes for pruning: suffix[i][v] = pieces >= i with v
    suffix = [[0] * m for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        d = csp.domains[i]
        for v in range(m):
            suffix[i][v] = suffix[i + 1][v] + (1 if d >> v & 1 else 0)

    counts = [0] * m
    chosen: list[int] = []
    out: list[tuple[Label, ...]] = []
    explored = 0

    def viable(i: int) -> bool:
        room = 0
        for v in range(m):
            if counts[v] + suffix[i][v] < lower[v]:
                return False
            room += min(upper[v] - counts[v], suffix[i][v])
        return room >= n - i

    def walk(i: int) -> None:
        nonlocal explored
        if i == n:
            out.append(tuple(ptype.identities[v] for v in chosen))
            return
        d = csp.domains[i]
        for v in range(m):
            if not d >> v & 1:
                continue
            explored += 1
            if explored > max_nodes:
                raise BudgetExceededError(
                    f"support enumeration exceeded {max_nodes} explored branches"
                )
            if counts[v] == upper[v]:
                continue
            counts[v] += 1
            chosen.append(v)
            if viable(i + 1):
                walk(i + 1)
            chosen.pop()
            counts[v] -= 1

    if n > 0 and viable(0):
        walk(0)
    elif n == 0:
        out.append(())
    return out


# --------------------------------------------------------------------------
# Piece lifecycle
# --------------------------------------------------------------------------


def add_piece(
    belief: BeliefState, piece: int, type_id: int, domain: Iterable[Label] | None = None
) -> BeliefState:
    """Start tracking a new hidden piece of an existing type."""
    for csp in belief.csps:
        if piece in csp.pieces:
            raise ValueError(f"piece {piece} already tracked")
    ptype = belief.types[type_id]
    csp = belief.csps[type_id]
    mask = ptype.full_mask if domain is None else ptype.mask_of(domain)
    pieces = sorted(csp.pieces + (piece,))
    pos = pieces.index(piece)
    domains = list(csp.domains)
    domains.insert(pos, mask)
    updated = belief._replace_csp(
        type_id, _TypeCsp(tuple(pieces), tuple(domains), csp.lower, csp.upper)
    )
    return propagate_counts(updated)


def remove_piece(belief: BeliefState, piece: int, identity: Label) -> BeliefState:
    """Drop a piece whose identity became public and which left play.

    The identity's count bounds are decremented so the remaining pieces
    keep a consistent cardinality constraint. Piece ids of the remaining
    pieces are unchanged.
    """
    tid, pos = belief.locate(piece)
    csp = belief.csps[tid]
    ptype = belief.types[tid]
    v = ptype.index_of(identity)
    if not csp.domains[pos] >> v & 1:
        raise ContradictionError(
            f"cannot remove piece {piece} as {identity!r}: not in its domain"
        )
    if csp.upper[v] == 0:
        raise ContradictionError(f"no occurrences of {identity!r} left to remove")
    pieces = csp.pieces[:pos] + csp.pieces[pos + 1 :]
    domains = csp.domains[:pos] + csp.domains[pos + 1 :]
    lower = list(csp.lower)
    upper = list(csp.upper)
    lower[v] = max(0, lower[v] - 1)
    upper[v] -= 1
    updated = belief._replace_csp(tid, _TypeCsp(pieces, domains, tuple(lower), tuple(upper)))
    return propagate_counts(updated)


# --------------------------------------------------------------------------
# Debug serialization (human-readable; used for golden-file tests)
# --------------------------------------------------------------------------


def belief_debug_dict(belief: BeliefState) -> dict:
    out = {"types": []}
    for ptype, csp in zip(belief.types, belief.csps):
        out["types"].append(
            {
                "type_id": ptype.type_id,
                "identities": list(ptype.identities),
                "bounds": [
                    {"identity": lab, "lower": lb, "upper": ub}
                    for lab, lb, ub in zip(ptype.identities, csp.lower, csp.upper)
                ],
                "pieces": [
                    {"piece": p, "domain": list(ptype.labels_of(d))}
                    for p, d in zip(csp.pieces, csp.domains)
                ],
            }
        )
    return out


def belief_debug_text(belief: BeliefState) -> str:
    lines = []
    for ptype, csp in zip(belief.types, belief.csps):
        bounds = ", ".join(
            f"{lab}:[{lb},{ub}]" for lab, lb, ub in zip(ptype.identities, csp.lower, csp.upper)
        )
        lines.append(f"type {ptype.type_id} ({bounds})")
        for p, d in zip(csp.pieces, csp.domains):
            labels = ", ".join(str(lab) for lab in ptype.labels_of(d))
            lines.append(f"  piece {p}: {{{labels}}}")
    return "\n".join(lines)
