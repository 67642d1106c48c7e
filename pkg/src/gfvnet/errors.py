"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Matrix shapes do not conform."""


class InfeasibleDesign(ValueError):
    """No admissible target set or gain exists for the requested design."""


class Uncontrollable(InfeasibleDesign):
    """Pole placement was asked for on an uncontrollable (or unobservable) pair.

    The PBH witness is attached as ``certificate`` so callers can report it.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
