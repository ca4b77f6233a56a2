"""Exception hierarchy shared by all foliageprop modules.

Every error raised by the library derives from FoliagePropError so callers
(and the CLI) can map failures to exit codes without matching on message
strings.
"""


class FoliagePropError(Exception):
    """Base class for all library errors."""


# --- raster / elevation data -------------------------------------------------

class FileMissing(FoliagePropError):
    """Requested raster file does not exist."""


class MalformedRaster(FoliagePropError):
    """Raster lacks georeferencing, has an unsupported CRS, or is not single-band."""


class UnitError(FoliagePropError):
    """Raster declares vertical or linear units other than meters."""


class TransformFailure(FoliagePropError):
    """Coordinate cannot be represented in the grid's reference system."""


class NoCoverage(FoliagePropError):
    """No elevation grid covers the queried point."""


class NegativeInput(FoliagePropError):
    """A rate/offset argument that must be nonnegative was negative."""


# --- path profiles -----------------------------------------------------------

class DegenerateLink(FoliagePropError):
    """Transmitter and receiver coincide."""


class PathTooShort(FoliagePropError):
    """Path length below the propagation model's 0.25 km domain floor."""


# --- propagation engine domain guards ----------------------------------------

class FrequencyOutOfRange(FoliagePropError):
    """Frequency outside the 30-6000 MHz model domain."""


class DistanceOutOfRange(FoliagePropError):
    """Path length outside the 0.25-3000 km model domain."""


class HeightOutOfRange(FoliagePropError):
    """Antenna height outside the (0, 3000] m model domain."""


class InvalidProfile(FoliagePropError):
    """Path profile vectors are inconsistent or too short."""


# --- foliage model -----------------------------------------------------------

class NonpositiveStep(FoliagePropError):
    """Ray-marching step must be > 0."""


class NegativeDepth(FoliagePropError):
    """Foliage depth must be >= 0."""


class ThetaOutOfRange(FoliagePropError):
    """Incidence angle must lie in [0, 90] degrees."""


class UncalibratedParameters(FoliagePropError):
    """No coefficient set available for the requested species/frequency."""


# --- measurement validation ---------------------------------------------------

class CoordinateOutOfRange(FoliagePropError):
    """Latitude/longitude outside [-90, 90] x [-180, 180]."""


class EmptyInput(FoliagePropError):
    """Operation requires at least one record."""


class MixedTransmitters(FoliagePropError):
    """Measurement set mixes records from different transmitters."""


class NoValidBins(FoliagePropError):
    """Statistic requires at least one valid measurement bin."""


class EmptyRegion(FoliagePropError):
    """Coverage region contains no grid cells."""


# --- CLI ----------------------------------------------------------------------

class UsageError(FoliagePropError):
    """Bad command line or configuration input."""
