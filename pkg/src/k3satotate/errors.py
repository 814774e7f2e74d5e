"""Exception hierarchy.

Every error carries a short ``category`` string; the command line prints it
on stderr so callers can dispatch on failures without parsing prose.
"""


class K3STError(Exception):
    category = "error"


class DomainError(K3STError, ValueError):
    category = "domain"


class EmptyRangeError(DomainError):
    category = "empty-range"


class SizeError(K3STError, ValueError):
    category = "size"


class ConstructionError(K3STError):
    category = "construction"


class BadPrimeError(DomainError):
    category = "bad-prime"


class WeilBoundError(K3STError, ArithmeticError):
    category = "weil-bound"


class StaleCacheError(K3STError):
    category = "stale-cache"


class UnsupportedCosetError(DomainError):
    category = "unsupported-coset"


class UnsupportedComponentError(DomainError):
    category = "unsupported-component"


class ConditioningError(K3STError, ArithmeticError):
    category = "conditioning"


class ToleranceError(K3STError, ArithmeticError):
    category = "tolerance"


class SampleError(K3STError, ValueError):
    category = "sample"


class ConfigurationError(K3STError, ValueError):
    category = "configuration"


class MethodUnsupportedError(K3STError, ValueError):
    category = "method-unsupported"


class UnknownLabelError(K3STError, KeyError):
    category = "unknown-label"

    def __str__(self):
        return str(self.args[0]) if self.args else ""
