"""Custom exception hierarchy for raggednn."""


class RaggedNNError(Exception):
    """Base exception for all raggednn errors."""

    def __init__(self, message: str = "", detail: str = ""):
        self.message = message
        self.detail = detail
        super().__init__(message)


class DimensionError(RaggedNNError):
    """Raised when array shapes or feature widths do not line up."""


class GraphValidationError(RaggedNNError):
    """Raised when a batch, index list or adjacency violates its structural invariants."""


class ContractError(RaggedNNError):
    """Raised when an operation is called outside its preconditions."""


class NumericError(RaggedNNError):
    """Raised when a computation produces non-finite values."""


class ConfigError(RaggedNNError):
    """Raised when a model spec or run configuration is invalid."""


class CheckpointError(RaggedNNError):
    """Raised when a checkpoint cannot be read back."""


class DataFormatError(RaggedNNError):
    """Raised when a dataset file is malformed. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.reason = message
        super().__init__(message=f"line {line}: {message}", detail=str(line))


class NotRegisteredError(RaggedNNError):
    """Raised when a model, layer or kernel name is unknown."""

    def __init__(self, kind: str, name: str, available: list[str] | None = None):
        self.kind = kind
        self.name = name
        self.available = available or []
        avail_str = ", ".join(self.available) if self.available else "none"
        super().__init__(
            message=f"Unknown {kind} '{name}'. Valid names: {avail_str}",
            detail=name,
        )
