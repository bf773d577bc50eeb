class ABFPError(Exception):
    """ base class for all library errors """


class DimensionError(ABFPError, ValueError):
    pass


class DomainError(ABFPError, ValueError):
    pass


class SingularityError(ABFPError, ArithmeticError):
    pass


class DegenerateError(ABFPError, ValueError):
    pass


class PotentialRangeError(ABFPError, OverflowError):
    pass


class PreconditionError(ABFPError):
    """ raised when conservation p1 == p0 is required but not imposed """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic


class ConfigError(ABFPError, ValueError):
    def __init__(self, key, message):
        super().__init__("{}: {}".format(key, message))
        self.key = key


class MeasureFormatError(ConfigError):
    def __init__(self, path, lineno, message):
        super().__init__("MEASURE_FILE", "{}:{}: {}".format(path, lineno, message))
        self.lineno = lineno
