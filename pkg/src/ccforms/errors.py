"""Exception types shared across the package."""


class CCFormsError(Exception):
    pass


class DomainError(CCFormsError):
    """A point left the admissible domain of the model space."""


class IntegrationError(CCFormsError):
    """Adaptive integration could not proceed (step underflow, too many steps)."""

    def __init__(self, msg, s=None, state=None):
        super().__init__(msg)
        self.s = s
        self.state = state


class SingularityError(CCFormsError):
    """Requested quantity is undefined at a singular point of the surface."""


class InputError(CCFormsError, ValueError):
    pass


class QuadratureError(CCFormsError):
    def __init__(self, msg, history=()):
        super().__init__(msg)
        self.history = list(history)


class UnsupportedError(CCFormsError):
    pass


class ConfigError(CCFormsError):
    pass
