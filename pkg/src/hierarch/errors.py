"""Exception types shared across the package."""


class HierarchError(Exception):
    """Base class for every error raised by this package."""


class ParseError(HierarchError, SyntaxError):
    """Malformed regex, formula or language reference.

    Also a ``SyntaxError`` so callers may catch either.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position

    def __str__(self) -> str:
        return self.args[0]


class UnknownLetter(HierarchError):
    pass


class AlphabetMismatch(HierarchError):
    pass


class InvalidDfa(HierarchError):
    pass


class NotSurjective(HierarchError):
    pass


class MissingOrder(HierarchError):
    pass


class NotSubmonoid(HierarchError):
    pass


class NotSubsemigroup(HierarchError):
    pass


class UnsupportedClass(HierarchError):
    pass


class SizeGuard(HierarchError):
    pass


class Unsupported(HierarchError):
    pass


class UnknownLanguage(HierarchError):
    pass


class NotWellSuited(HierarchError):
    pass


class TlxNotSupported(HierarchError):
    pass
