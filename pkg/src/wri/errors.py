"""Exception hierarchy shared by the pipeline stages."""


class WriError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ParseError(WriError):
    """A catalog, universe, snapshot or config file could not be parsed."""


class ValidationError(WriError):
    """Parsed data violates a model invariant (duplicate ids, bad enum...)."""


class ConfigError(WriError):
    """The run is misconfigured (unknown source, no positive indicators...)."""


class IntegrityError(WriError):
    """A matrix handed to aggregation is not dense."""


class DegenerateError(WriError):
    """A vector has no spread, so min-max scaling is undefined."""


class FixtureIOError(WriError):
    """Reading or writing a fixture file failed."""

    exit_code = 2
