"""Exception hierarchy for the botdna pipeline.

Two families matter to callers: ``InputError`` covers everything caused by
bad input data or configuration (CLI exit code 2), everything else under
``BotDnaError`` is a runtime failure (CLI exit code 1).
"""


class BotDnaError(Exception):
    """Base class for all botdna errors."""


class InputError(BotDnaError):
    """Bad input data or configuration; maps to CLI exit code 2."""


class UnknownActionKind(InputError):
    """A timeline event kind has no symbol in the alphabet."""

    def __init__(self, kind: str, index: int, account_id: str = ""):
        self.kind = kind
        self.index = index
        self.account_id = account_id
        where = f" of account '{account_id}'" if account_id else ""
        super().__init__(
            f"event {index}{where} has kind '{kind}' with no alphabet symbol"
        )


class InvalidLength(InputError):
    """A sequence length outside the valid domain."""


class SequenceTooLong(InputError):
    """Sequence does not fit the requested image side."""


class UnknownSymbol(InputError):
    """A sequence character has no palette entry."""


class UnmappableIntensity(InputError):
    """A non-padding pixel intensity is not in the palette."""


class LayoutOverflow(InputError):
    """Feature-panel text or DNA panel cannot fit the configured canvas."""


class ShapeMismatch(InputError):
    """Tensor or image shapes do not compose."""


class ParseError(InputError):
    """A record failed to parse; carries line number and field name."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field:
            loc.append(f"field '{field}'")
        prefix = f"{', '.join(loc)}: " if loc else ""
        super().__init__(f"{prefix}{message}")


class SchemaError(InputError):
    """A record is missing a required field."""


class EmptyClass(InputError):
    """A label class has zero accounts; stratified splitting impossible."""


class EmptySplit(InputError):
    """A train or validation split is empty."""


class LengthMismatch(InputError):
    """Prediction and truth vectors differ in length."""


class EmptyMatrix(InputError):
    """Confusion matrix with zero total count."""


class ConfigError(InputError):
    """Invalid run configuration."""


class IoFailure(BotDnaError):
    """File read/write failed; carries the destination context."""

    def __init__(self, destination, cause: BaseException):
        self.destination = destination
        super().__init__(f"I/O failure on '{destination}': {cause}")


class NonFiniteLoss(BotDnaError):
    """Loss became NaN or infinite during training."""


class NonFiniteGradient(BotDnaError):
    """A gradient became NaN or infinite; names the offending layer."""
