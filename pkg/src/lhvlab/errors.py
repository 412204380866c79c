"""Exception hierarchy shared by every lhvlab module."""


class LHVError(ValueError):
    """Base class for all lhvlab errors."""


class InvalidDimension(LHVError):
    pass


class InvalidArgument(LHVError):
    pass


class InvalidMeasurement(LHVError):
    pass


class InvalidChannel(LHVError):
    pass


class InvalidUse(LHVError):
    """A model was handed inputs outside the class it is proven for."""


class TruncationInsufficient(LHVError):
    pass


class CapacityExceeded(LHVError):
    pass
