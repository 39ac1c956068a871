class HconeError(ValueError):
    """Base class for every error raised by the package."""


class BadHalfAngle(HconeError):
    pass


class OverlappingArcs(HconeError):
    pass


class OriginQuery(HconeError):
    pass


class BadTail(HconeError):
    pass


class SingularPoint(HconeError):
    pass


class NotC1(HconeError):
    pass


class NoTail(HconeError):
    pass


class InfiniteFamily(HconeError):
    pass
