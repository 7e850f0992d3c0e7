"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid model or simulation configuration.

    Parameters
    ----------
    field:
        Dotted path of the offending field, e.g. ``"tiers[1].alpha"``.
    message:
        Human-readable description of the constraint that was violated.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the best available estimate so callers can inspect how far the
    integration got before giving up.
    """

    def __init__(self, message: str, estimate, error_estimate):
        self.estimate = estimate
        self.error_estimate = error_estimate
        super().__init__(
            f"{message} (achieved estimate {estimate!r}, "
            f"error estimate {error_estimate!r})"
        )


class OrderError(ValueError):
    """A series/derivative order outside the supported range was requested."""

    def __init__(self, order: int, limit: int, message: str = ""):
        self.order = order
        self.limit = limit
        detail = message or "order out of supported range"
        super().__init__(f"{detail}: got {order}, limit {limit}")


class NumericOverflowError(OverflowError):
    """A recursion magnitude exceeded the overflow guard threshold."""

    def __init__(self, where: str, magnitude: float):
        self.where = where
        self.magnitude = magnitude
        super().__init__(f"{where}: magnitude {magnitude:.3e} exceeds overflow guard")


class InsufficientSamplesError(RuntimeError):
    """A conditional estimator found too few qualifying trials.

    The number of qualifying trials actually found is carried in ``count``.
    """

    def __init__(self, count: int, required: int):
        self.count = count
        self.required = required
        super().__init__(
            f"only {count} conditioning trials available, {required} required"
        )
