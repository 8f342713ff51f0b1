"""Exception types shared across the toolkit."""


class SurrokitError(Exception):
    """Base class for all toolkit errors."""


class NonFinite(SurrokitError):
    """Input value is NaN or infinite."""


class ExponentOutOfRange(SurrokitError):
    """Value's decimal exponent falls outside the configured token range."""


class MalformedToken(SurrokitError):
    """Token text does not follow the sign/exponent/digits layout."""


class BudgetExhausted(SurrokitError):
    """Token budget leaves no room for even a one-dimensional vector."""


class MismatchedDim(SurrokitError):
    """Metadata dimensionality disagrees with the decision vector length."""


class UnparseableOutput(SurrokitError):
    """No valid encoded scalar could be recovered from generated text."""


class LengthMismatch(SurrokitError):
    """Two aligned sequences have different lengths."""


class ZeroProbabilityTarget(SurrokitError):
    """A target token was assigned probability zero (log undefined)."""

    def __init__(self, position: int):
        super().__init__(f"target token has zero probability at position {position}")
        self.position = position


class NeedTwoTokensForMargin(SurrokitError):
    """Top-2 margin requires a vocabulary of at least two tokens."""


class DimMismatch(SurrokitError):
    """Query vector length disagrees with the surrogate's expected dimension."""


class RemoteUnavailable(SurrokitError):
    """Remote surrogate endpoint could not be reached."""


class ProtocolError(SurrokitError):
    """Remote surrogate reply violates the wire schema."""


class ServerError(SurrokitError):
    """Remote surrogate returned a 5xx status."""


class PortInUse(SurrokitError):
    """Requested server port is already bound."""


class TooFewPoints(SurrokitError):
    """Not enough training points for the requested number of centers."""


class UnknownFunction(SurrokitError):
    """Objective name is not in the registry."""


class DegenerateRange(SurrokitError):
    """Target range is zero; range-normalized error undefined."""


class DegenerateVariance(SurrokitError):
    """Sample variance is zero; statistic undefined."""


class ZeroBaseline(SurrokitError):
    """Single-task baseline error is zero; relative reduction undefined."""


class DegeneratePool(SurrokitError):
    """Pooled result distribution has fewer than two values or zero spread."""


class MissingProbs(SurrokitError):
    """Surrogate reply carries no step probabilities or uncertainty report."""


class SurrogateFailure(SurrokitError):
    """Surrogate failed mid-run; partial results are flagged."""


class ConfigError(SurrokitError):
    """Invalid experiment configuration."""
