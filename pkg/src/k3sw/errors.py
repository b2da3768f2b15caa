"""Exception hierarchy.

Every exception carries the CLI exit code it maps to: 1 for bad input,
2 for resource limits, 3 for computational inconsistencies.
"""


class K3SWError(Exception):
    exit_code = 3


class InputError(K3SWError, ValueError):
    exit_code = 1


class ResourceError(K3SWError):
    exit_code = 2


class ComputationError(K3SWError):
    exit_code = 3


class ConventionError(InputError):
    """A divisibility or parity condition on topological data failed."""


class SplittingError(ComputationError):
    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class GeometryError(ComputationError):
    pass


class ConditioningError(GeometryError):
    pass


class DegenerateMetricError(InputError):
    pass


class ConstructionError(ComputationError):
    def __init__(self, message, nearest_root=None):
        super().__init__(message)
        self.nearest_root = nearest_root


class WallError(ComputationError):
    pass


class VanishingError(ComputationError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonConvergenceError(ComputationError):
    pass


class DegeneracyError(ComputationError):
    pass


class InconsistencyError(ComputationError):
    def __init__(self, message, certificates=()):
        super().__init__(message)
        self.certificates = tuple(certificates)
