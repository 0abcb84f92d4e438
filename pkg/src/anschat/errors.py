"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``InputError`` (unreadable or malformed files, exit 1) and
``PreconditionError`` (data that is well-formed but unusable by an
algorithm, exit 2).
"""


class AnsChatError(Exception):
    pass


class InputError(AnsChatError):
    pass


class IoError(InputError):
    pass


class FormatError(InputError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class DuplicateId(FormatError):
    pass


class ConfigError(InputError):
    pass


class PreconditionError(AnsChatError, ValueError):
    pass


class SchemaMismatch(PreconditionError):
    pass


class EmptyCluster(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class NonPositiveBandwidth(PreconditionError):
    pass


class TooFewPoints(PreconditionError):
    pass


class EmptySeedCluster(PreconditionError):
    pass


class DegenerateInit(PreconditionError):
    pass


class DegenerateData(PreconditionError):
    pass


class UndefinedKappa(PreconditionError):
    pass
