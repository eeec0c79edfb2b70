"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class CountMechError(Exception):
    """Base class for all library errors."""


class InputError(CountMechError, ValueError):
    """Malformed or out-of-domain input (CLI exit code 2)."""


class CapacityError(CountMechError):
    """A size guard was exceeded (CLI exit code 3)."""


class InvariantViolation(CountMechError, AssertionError):
    """An internal invariant failed; indicates a bug (CLI exit code 4)."""


class MembershipError(InputError):
    """A matrix is not a member of the polytope it was tested against."""


class Infeasible(CountMechError):
    """The linear program has no feasible point."""


class Unbounded(CountMechError):
    """The linear program objective is unbounded below."""
