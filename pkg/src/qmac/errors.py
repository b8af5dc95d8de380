"""Exception types shared across the package."""


class QmacError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeError(QmacError):
    """A bit reference or integer is outside its declared range."""


class OverlappingTargetsError(QmacError):
    """Two operations in one layer touch the same bit."""


class RegisterMismatchError(QmacError):
    """Circuits with different register sizes cannot be composed."""


class InvalidInputError(QmacError):
    """An input value does not fit the register width."""


class TooWideError(QmacError):
    """Dense simulation refused: qubit count exceeds the configured cap."""


class HasClassicalOpsError(QmacError):
    """Unitary extraction requires a purely quantum fragment."""


class ResidualEntanglementError(QmacError):
    """Auxiliary qubits did not return to |0>: the circuit under test is broken."""


class InconsistentStateError(QmacError):
    """Phase accumulators violate the mod-2^j consistency invariant."""


class NormDriftError(QmacError):
    """State norm drifted beyond tolerance during simulation."""


class NoCrossoverError(QmacError):
    """Classical per-step depth does not exceed the hybrid per-step slope."""


class BackendMismatchError(QmacError):
    """Dense and phase backends disagree on a result."""

    def __init__(self, message: str, dense=None, phase=None):
        super().__init__(message)
        self.dense = dense
        self.phase = phase
