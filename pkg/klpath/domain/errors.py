"""exception hierarchy for klpath"""


class KlPathError(Exception):
    """base class for every klpath error"""

    exit_code = 1


class ConfigError(KlPathError):
    """experiment configuration is invalid"""

    exit_code = 2


class InvalidModulusError(ConfigError):
    """p is not an odd prime, n < 1, or p^n does not fit 64 bits"""


class NotAUnitError(ConfigError):
    """a residue divisible by p was given where a unit is required"""


class DomainError(ConfigError):
    """an argument lies outside the range an operation is defined on"""


class InputFormatError(ConfigError):
    """an artifact handed to the plotter is malformed"""


class HypothesisViolation(KlPathError):
    """the hypotheses of a stated bound are not met"""

    exit_code = 3


class ConsistencyError(KlPathError):
    """two independent evaluations of the same quantity disagree"""

    exit_code = 1
