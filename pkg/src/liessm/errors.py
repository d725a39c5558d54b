"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class LiessmError(Exception):
    """Base class for all library errors."""


class ValidationError(LiessmError, ValueError):
    """Bad input: wrong shapes, unknown symbols, violated preconditions.

    CLI exit code 2.
    """


class GuardError(LiessmError, RuntimeError):
    """A numerical guard tripped (e.g. generator mass >= 1, closure cap
    exceeded, log outside its convergence domain).

    CLI exit code 3.
    """


class InvariantError(LiessmError, RuntimeError):
    """An internal invariant that should hold by construction failed.

    CLI exit code 4.
    """
