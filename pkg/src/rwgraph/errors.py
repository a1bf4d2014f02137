"""Exception hierarchy shared by the library and the CLI."""


class DomainError(ValueError):
    """A request that is well-formed but outside an operation's domain."""


class InvalidParameter(DomainError):
    pass


class DegenerateProbability(DomainError):
    pass


class PatternTooLarge(DomainError):
    pass


class InstanceTooLarge(DomainError):
    pass
