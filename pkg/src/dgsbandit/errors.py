"""Error types shared across the package.

The CLI maps these onto exit codes: configuration / usage problems exit
with 1, data problems with 2, numerical failures with 3.
"""


class ConfigError(ValueError):
    """A parameter or configuration value is out of its admissible range."""


class InputError(ValueError):
    """A runtime input (feature vector, reward, round index) is invalid."""


class DataError(Exception):
    """An input file is missing, malformed, or inconsistent."""


class NumericalError(Exception):
    """A numerical invariant was violated (non-finite values, negative quadratic forms)."""
