"""Exception hierarchy. Each class carries the CLI exit code for its error class."""


class PushdimError(Exception):
    exit_code = 1


class ParameterError(PushdimError, ValueError):
    exit_code = 3


class GamblerFormatError(PushdimError, ValueError):
    """Malformed gambler document; ``location`` points at the offending field."""

    exit_code = 4

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SizeError(PushdimError):
    exit_code = 5


class StreamExhausted(PushdimError):
    """Input ran out before the requested length. ``trace`` holds what was computed."""

    exit_code = 6

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class LambdaDivergence(PushdimError):
    exit_code = 7


class IrrationalScaling(PushdimError, ArithmeticError):
    exit_code = 8


class PrefixSetError(PushdimError, ValueError):
    exit_code = 10


class MissingWordError(PushdimError, KeyError):
    exit_code = 11

    def __init__(self, word):
        self.word = word
        super().__init__(f"no gale value for word {word!r}")

    def __str__(self):
        return self.args[0]


class UndefinedInput(PushdimError, ValueError):
    exit_code = 12
