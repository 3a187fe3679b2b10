"""Exception hierarchy shared by all debias modules."""


class DebiasError(Exception):
    """Base class for all errors raised by this package."""


# core model
class SingularZone(DebiasError):
    """Zone slope rho is at the -1 singularity; correction undefined."""


class DegenerateGain(DebiasError):
    """Sensor gain alpha too close to zero to invert."""


# zoning
class EmptyNetwork(DebiasError):
    """No generators supplied for the partition."""


class DuplicateLocation(DebiasError):
    """Two generators share identical coordinates."""


# estimation
class NoStationInZone(DebiasError):
    """A zone has no reference-station observation; parameters unidentifiable."""


class Underdetermined(DebiasError):
    """Fewer observations than regression columns."""


class ZeroDof(DebiasError):
    """No residual degrees of freedom for a variance estimate."""


class DegenerateSlope(DebiasError):
    """Leading regression coefficient too close to zero to invert."""


class SingularNormalMatrix(DebiasError):
    """Normal equations are singular; design not full rank."""


# mapops
class MalformedHeader(DebiasError):
    """Grid file header does not match the expected 6-line layout."""


class DimensionMismatch(DebiasError):
    """Grid value count disagrees with the declared dimensions."""


class ExtentNotCovered(DebiasError):
    """Template grid extends outside the source grid."""


class MissingSlot(DebiasError):
    """No coarse map available for the requested time slot."""


class OutOfExtent(DebiasError):
    """Point lies outside the grid extent."""


class UnknownHour(DebiasError):
    """Model was not fitted for the requested hour."""


# evaluation
class EmptySeries(DebiasError):
    """No paired values to score."""


class NoEligibleDevice(DebiasError):
    """No other device of the required type exists."""


class EmptyTestPeriod(DebiasError):
    """Test view contains no measurements."""


# ingest
class ParseError(DebiasError):
    """Malformed input row; message carries the line number."""


class DuplicateId(DebiasError):
    """Device id appears twice in a registry."""


class UnknownDevice(DebiasError):
    """Measurement references a device absent from the registry."""


class DuplicateSlot(DebiasError):
    """Two measurements for the same (device, slot)."""


class OutOfRange(DebiasError):
    """Split timestamp outside the data range."""


class InvalidSpec(DebiasError):
    """Scene specification fails validation."""
