"""Game interface: observable state, per-player beliefs, transitions.

A game exposes fully observable mechanics plus one belief state per
player. The engine privately holds the true hidden assignment; agents only
ever see their belief view, and every transition updates each view with
exactly what that player observed. Sequential games take a single-action
joint tuple, simultaneous games one action per player.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Protocol, Sequence

from .belief import BeliefState
from .determinize import Determinization
from .errors import IllegalActionError

NUM_PLAYERS = 2


class PerfectState(Protocol):
    """A perfect-information position playable without belief machinery."""

    def acting_players(self) -> tuple[int, ...]: ...

    def legal_actions(self, player: int) -> Sequence: ...

    def apply(self, joint: tuple) -> "PerfectState": ...

    def is_terminal(self) -> bool: ...

    def returns(self) -> tuple[float, float]: ...


class GameModel(ABC):
    """Rules plus belief bookkeeping for one game."""

    game_id: str = "?"

    @abstractmethod
    def initial_state(self, seed: int):
        """Draw the hidden setup and initialise both players' beliefs."""

    @abstractmethod
    def acting_players(self, state) -> tuple[int, ...]:
        """Players who must commit an action in this state."""

    @abstractmethod
    def legal_actions(self, state, player: int) -> list:
        """Legal actions for a player, in canonical order."""

    @abstractmethod
    def apply(self, state, joint: tuple):
        """Apply one joint action; returns (next_state, per-player observations)."""

    @abstractmethod
    def is_terminal(self, state) -> bool: ...

    @abstractmethod
    def returns(self, state) -> tuple[float, float]:
        """Per-player payoff in [0, 1]; win 1, loss 0, draw 0.5. Sums to 1."""

    @abstractmethod
    def belief_view(self, state, player: int) -> BeliefState:
        """The belief state exposed to one player."""

    @abstractmethod
    def resolve_determinization(self, state, player: int, det: Determinization) -> PerfectState:
        """Fix all hidden identities to ``det`` and return a playable position."""

    def search_position(self, state, player: int, det: Determinization):
        """A search handle over the determinized position.

        Games with a compiled kernel override this; the default wraps the
        resolved perfect-information state with the generic implementation.
        """
        from .search import reference

        return reference.GenericSearchPosition(
            self.resolve_determinization(state, player, det), player
        )

    def encode_action(self, action) -> Any:
        """JSON-compatible encoding of an action (default: identity)."""
        return action

    def decode_action(self, data):
        return data


# --------------------------------------------------------------------------
# Transcripts: line-delimited JSON replay format
# --------------------------------------------------------------------------

TRANSCRIPT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Transcript:
    """One finished game: seed, joint actions in order, final returns."""

    game_id: str
    seed: int
    actions: tuple[tuple, ...]
    returns: tuple[float, float]

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": TRANSCRIPT_SCHEMA_VERSION,
                "game": self.game_id,
                "seed": self.seed,
                "actions": [list(joint) for joint in self.actions],
                "returns": list(self.returns),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "Transcript":
        data = json.loads(line)
        return cls(
            game_id=data["game"],
            seed=data["seed"],
            actions=tuple(tuple(joint) for joint in data["actions"]),
            returns=tuple(data["returns"]),
        )


def save_transcripts(path: str | Path, transcripts: Iterable[Transcript]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in transcripts:
            fh.write(t.to_json() + "\n")


def load_transcripts(path: str | Path) -> Iterator[Transcript]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield Transcript.from_json(line)


def replay(model: GameModel, transcript: Transcript):
    """Re-run a transcript through the model; returns the final state.

    Raises IllegalActionError if the recorded actions do not fit the rules,
    which makes transcripts an end-to-end determinism check.
    """
    state = model.initial_state(transcript.seed)
    for joint in transcript.actions:
        decoded = tuple(model.decode_action(a) for a in joint)
        actors = model.acting_players(state)
        if len(decoded) != len(actors):
            raise IllegalActionError(
                f"joint action arity {len(decoded)} != {len(actors)} acting players"
            )
        state, _ = model.apply(state, decoded)
    return state
