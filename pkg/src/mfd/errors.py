"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, MomentConditionError -> 3,
numeric failures (TruncationError, DimensionError, QuadratureError) -> 4.
"""


class MfdError(Exception):
    pass


class ConfigError(MfdError):
    """Malformed or schema-violating run configuration."""


class MomentConditionError(MfdError):
    """A particle state fails the vanishing-odd-moment requirement."""

    def __init__(self, particle_index, worst):
        self.particle_index = particle_index
        self.worst = worst
        super().__init__(
            f"particle {particle_index} violates the vanishing odd-moment "
            f"condition (largest odd moment {worst:.3e}); the expansion "
            f"coefficients are not defined for this initial state"
        )


class TruncationError(MfdError):
    """Fock-space truncation certificate failed (top levels populated)."""


class DimensionError(MfdError):
    """Dense tensor space exceeds the configured size cap."""


class QuadratureError(MfdError):
    """Requested integration tolerance could not be met."""
