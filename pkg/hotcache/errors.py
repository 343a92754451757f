"""Exception types raised by hotcache."""

from typing import Optional


class HotcacheError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(HotcacheError, ValueError):
    """A precondition or bound on the inputs does not hold."""


class ShapeError(HotcacheError, ValueError):
    """Packets or files have incompatible lengths."""


class FieldError(HotcacheError, ArithmeticError):
    """Domain error in GF(2^8) arithmetic (inverse of zero)."""


class InsufficientSharesError(HotcacheError):
    """Fewer distinct coded packets than the code dimension."""


class CorruptionError(HotcacheError):
    """Coded packets disagree with the decoded information packets."""


class LookupFailure(HotcacheError, KeyError):
    """Unknown catalog identifier."""


class InfeasibleError(HotcacheError):
    """No row assignment exists for the requested active set."""


class ConsistencyError(HotcacheError):
    """A projected array does not star-match the inner PDA."""


class ProtocolViolation(HotcacheError):
    """A user is left with more than one unknown packet in a transmission."""


class UndecodableError(HotcacheError):
    """A user collected fewer coded packets than the subpacketization."""


class ParseError(HotcacheError, ValueError):
    """Malformed input file."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ) -> None:
        self.path = path
        self.field = field
        self.line = line
        context = []
        if path:
            context.append(str(path))
        if line is not None:
            context.append(f"line {line}")
        if field:
            context.append(f"field {field}")
        prefix = f"{': '.join(context)}: " if context else ""
        super().__init__(f"{prefix}{message}")
