"""Exception hierarchy.

Input problems (bad matrices, bad configs, unsupported forms) derive from
:class:`InputError`; the command line maps them to exit code 2.
"""


class TLFockError(Exception):
    """Base class for all package errors."""


class InputError(TLFockError):
    pass


class DimensionOverflowError(InputError):
    pass


class ShapeError(InputError):
    pass


class SingularityError(InputError):
    pass


class NotTemperleyLiebError(InputError):
    pass


class DegenerateError(TLFockError):
    pass


class FusionMismatchError(TLFockError):
    """Computed kernel dimension disagrees with the fusion-rule count."""


class BudgetError(InputError):
    pass


class RangeError(InputError):
    """A level or bi-level lies outside what the truncation supports."""


class FormError(InputError):
    """The operation needs a coefficient matrix in a particular form."""


class AssumptionError(InputError):
    pass


class ConfigError(InputError):
    pass


class ParseError(ConfigError):
    def __init__(self, msg, line=None, column=None):
        super().__init__(msg)
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    pass
