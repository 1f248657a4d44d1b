"""Exception hierarchy shared by all qmarket modules."""


class QMarketError(Exception):
    """Base class for all qmarket errors."""


class ValidationError(QMarketError):
    """An input violates a construction invariant (bad matrix, bad spec field, ...)."""


class SolverError(QMarketError):
    """A numerical routine failed to converge or produce a usable answer."""


class InternalConsistencyError(QMarketError):
    """Two independent computation paths disagree beyond tolerance."""


class ArbitrageError(QMarketError):
    """An operation that requires an arbitrage-free market was called on one that is not.

    Carries the arbitrage certificate (a positive attainable claim) when available.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
