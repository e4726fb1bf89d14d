"""Exception hierarchy shared by every hydrograph subsystem."""


class HydrographError(Exception):
    """Base class for all errors raised by this package."""


# --- graph store ---

class UnknownNode(HydrographError):
    pass


class DuplicateDomainId(HydrographError):
    pass


class DuplicateEdge(HydrographError):
    pass


class SchemaViolation(HydrographError):
    pass


class SelfLoop(HydrographError):
    pass


class BadPropertyValue(HydrographError):
    pass


class CorruptSnapshot(HydrographError):
    pass


# --- ingestion ---

class UnrecognizedFile(HydrographError):
    pass


class BadHeader(HydrographError):
    pass


class BadGeoJson(HydrographError):
    pass


class BadGrid(HydrographError):
    pass


class UnknownStation(HydrographError):
    pass


# --- drainage ---

class AllNodata(HydrographError):
    pass


class CycleDetected(HydrographError):
    pass


class OutOfBounds(HydrographError):
    pass


# --- query engine ---

class NotAWaterNode(HydrographError):
    pass


class NotAStretch(HydrographError):
    pass


class NotLandUse(HydrographError):
    pass


class NoWatershed(HydrographError):
    pass


class PathLimitExceeded(HydrographError):
    pass


# --- service ---

class InvalidCredentials(HydrographError):
    pass


class InvalidToken(HydrographError):
    pass


class UnknownJob(HydrographError):
    pass
