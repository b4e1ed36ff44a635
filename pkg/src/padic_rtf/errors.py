"""Exception hierarchy shared by every module of the toolkit."""


class PadicRTFError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientPrecision(PadicRTFError):
    """An operation needs p-adic digits beyond the working precision."""


class UnsupportedPrime(PadicRTFError):
    """The prime is even, composite, or otherwise out of scope."""


class ZeroArgument(PadicRTFError):
    """A character or germ was evaluated at zero."""


class DivergentIntegral(PadicRTFError):
    """A germ term is not integrable over the requested region."""


class CoordinateMismatch(PadicRTFError):
    """Two measures live on different coordinates or primes."""


class KindMismatch(PadicRTFError):
    """Additive and multiplicative measures were mixed."""


class AnchorCollision(PadicRTFError):
    """A coordinate shift moved two germ anchors onto one point."""


class LevelExceedsBound(PadicRTFError):
    """Input data is finer than the requested conductor bound."""


class PoleOnContour(PadicRTFError):
    """A rational symbol has a pole that cannot be read as a germ."""


class NonconvergentTail(PadicRTFError):
    """A germ tail cannot be handled by the chosen convolution mode."""


class ParamsInconsistent(PadicRTFError):
    """Transfer parameters do not fit the input measure or the row."""


class IllConditionedFit(PadicRTFError):
    """The germ fit has too few independent equations."""


class InstanceTooLarge(PadicRTFError):
    """A brute-force enumeration would exceed its point budget."""


class UnboundedSupport(PadicRTFError):
    """A measure that must be compactly supported is not."""


class NonFactorizableInput(PadicRTFError):
    """A lattice measure does not split along the Witt decomposition."""


class DepthExceeded(PadicRTFError):
    """An enumeration was asked for more depth than it supports."""


class UnderivedRow(PadicRTFError):
    """A table row is missing derived parameters."""


class ConsistencyFailure(PadicRTFError):
    """Derived root data contradicts a structural identity."""


class InvalidSubset(PadicRTFError):
    """A Levi subset names simple roots that do not exist."""


class ZeroRoot(PadicRTFError):
    """A coroot pairing was requested against the zero vector."""
