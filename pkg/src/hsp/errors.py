"""Exception types raised across the package."""


class HSpError(ValueError):
    """Base class for every error raised by :mod:`hsp`."""


class DimensionError(HSpError):
    pass


class NotSymplecticError(HSpError):
    pass


class StructureError(HSpError):
    """A matrix fails one of the block conditions of the extended group."""


class NotConnectedComponentError(StructureError):
    """The time-reversing component (bottom-right entry -1)."""


class NotHeisenbergError(HSpError):
    pass


class NotOrthogonalError(HSpError):
    pass


class DecompositionError(HSpError):
    pass


class UnknownNameError(HSpError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InvalidParamsError(HSpError):
    pass


class NonseparableError(HSpError):
    """Stormer-Verlet requested for a Hamiltonian not of the form K(p) + V(q, t)."""


class ConvergenceError(HSpError, ArithmeticError):
    pass


class InversionError(HSpError):
    pass


class TooFewSamplesError(HSpError):
    pass
