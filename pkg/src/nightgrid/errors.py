"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
(anything derived from :class:`DataError`) exit 2, everything else exit 3.
"""


class NightgridError(Exception):
    """Base class for all package errors."""


class UsageError(NightgridError):
    """Bad command line or configuration input."""


class DataError(NightgridError):
    """Input data violates a documented contract."""


class GridParseError(DataError):
    """Malformed ASCII grid text."""


class CityTableError(DataError):
    """Malformed or inconsistent city metadata table."""


class DegenerateCityError(DataError):
    """A city raster that cannot be analyzed (no valid or no lit cells)."""


class ProjectionError(DataError):
    """Geographic grid outside the validity range of the local projection."""


class CollinearityError(DataError):
    """Rank-deficient regression design."""
