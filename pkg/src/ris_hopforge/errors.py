"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain of the operation."""


class DimensionMismatchError(InvalidArgumentError):
    """Operand shapes do not agree with each other or with the topology."""


class DegenerateInputError(ValueError):
    """Input has no usable direction (e.g. an all-zero precoder)."""


class SingularChannelError(ValueError):
    """Stacked channel matrix is rank deficient; zero-forcing is undefined."""


class UnsupportedScenarioError(ValueError):
    """The requested algorithm does not support this topology."""


class ConfigError(ValueError):
    """Experiment configuration failed validation."""


class TrainingDivergedError(RuntimeError):
    """A training loss became non-finite.

    ``dump`` holds the diagnostic snapshot taken at the failing step.
    """

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}
