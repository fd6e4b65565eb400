"""Exception types raised by the sampler library."""


class SingularCovarianceError(ValueError):
    """Covariance matrix is not positive definite, even after jitter."""


class InsufficientSamplesError(ValueError):
    """Too few samples for the requested density fit."""


class DegenerateWeightsError(RuntimeError):
    """All importance weights are zero (log weights all -inf)."""


class GmmFitError(RuntimeError):
    """EM failed: empty-component recovery was exhausted."""


class SmcRunError(RuntimeError):
    """A sampler run aborted; carries the record built so far."""

    def __init__(self, message, partial_record=None):
        super().__init__(message)
        self.partial_record = partial_record
