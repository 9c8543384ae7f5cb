"""Exception hierarchy shared by all modules."""


class AtlabError(Exception):
    pass


class DomainError(AtlabError, ValueError):
    """An argument lies outside the domain of the operation (negative density, t < 0, ...)."""


class ConditioningError(AtlabError, ValueError):
    """Conditioning on a configuration slice of zero mass."""


class ValidationError(AtlabError, ValueError):
    """A model, cover or file fails structural validation."""


class CapacityError(AtlabError, RuntimeError):
    """The state space is too large for dense desk-scale computation."""
