"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """An enumeration grew past its element cap."""

    def __init__(self, message: str, partial_size: int):
        super().__init__(f"{message} (partial size {partial_size})")
        self.partial_size = partial_size


class ContainmentError(ValueError):
    """A supposed subgroup has elements outside the ambient group."""


class PreconditionError(ValueError):
    pass


class WitnessViolation(AssertionError):
    """An element over a bad coset failed to fix a vertex.

    This signals a defect in the implementation, never a mathematical outcome.
    """


class ConfigError(ValueError):
    pass


class SamplerError(RuntimeError):
    pass
