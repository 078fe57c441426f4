"""Exception hierarchy shared across the engine."""


class BeliefGamesError(Exception):
    """Base class for all engine errors."""


class ContradictionError(BeliefGamesError):
    """An observation or assignment is inconsistent with the belief state.

    Raised when a domain wipes out or count bounds become unsatisfiable.
    A contradiction always indicates a bug in the caller (the game model
    guarantees the true assignment stays in every player's support), so it
    is never silently repaired.
    """


class DegenerateMessageError(ContradictionError):
    """A belief-propagation message normalised to all zeros."""


class BudgetExceededError(BeliefGamesError):
    """An enumeration guard tripped before the search space was exhausted."""


class IllegalActionError(BeliefGamesError):
    """An action violates the game rules in the current state."""


class TerminalStateError(BeliefGamesError):
    """An operation requiring a live state was called on a terminal one."""


class NonTerminalError(BeliefGamesError):
    """Returns were requested for a state that is not terminal."""


class InvalidConfigError(BeliefGamesError):
    """A configuration object violates its invariants."""


class InconsistentDeterminizationError(BeliefGamesError):
    """A determinization does not fit the belief state it claims to refine."""
