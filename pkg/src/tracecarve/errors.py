class CarveError(Exception):
    """Base class for pipeline errors."""


class ParseFailure(CarveError):
    pass


class UnsupportedShape(CarveError):
    pass


class BaselineSuiteFails(CarveError):
    pass


class UnresolvedTarget(CarveError):
    pass


class RewriteConflict(CarveError):
    pass


class NotInstrumented(CarveError):
    pass


class MixedMethods(CarveError):
    pass


class CorruptRecord(CarveError):
    pass


class UnreconstructibleProfile(CarveError):
    pass


class BaselineMissing(CarveError):
    pass


class MissingPrerequisite(CarveError):
    pass


class ConfigInvalid(CarveError):
    pass
