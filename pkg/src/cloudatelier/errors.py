"""Exception hierarchy shared across the package.

Every error carries a short machine-parsable ``code`` used by the CLI
(``ERROR <code>: <detail>``) and mapped to its exit code there.
"""


class CloudAtelierError(Exception):
    """Base class for all domain errors."""

    code = "DATA"


# --- ingest ---------------------------------------------------------------

class UnsupportedFormat(CloudAtelierError):
    code = "UNSUPPORTED_FORMAT"


class CorruptHeader(CloudAtelierError):
    code = "CORRUPT_HEADER"


class MalformedRecord(CloudAtelierError):
    code = "MALFORMED_RECORD"


class DegenerateExtent(CloudAtelierError):
    code = "DEGENERATE_EXTENT"


# --- octree ---------------------------------------------------------------

class UnknownNode(CloudAtelierError):
    code = "UNKNOWN_NODE"


class TileCorrupt(CloudAtelierError):
    code = "TILE_CORRUPT"


class OutOfDiskSpace(CloudAtelierError):
    code = "OUT_OF_DISK_SPACE"


# --- measurements ----------------------------------------------------------

class DegenerateGeometry(CloudAtelierError):
    code = "DEGENERATE_GEOMETRY"


class ValidationFailed(CloudAtelierError):
    code = "VALIDATION"


class SchemaVersionUnsupported(CloudAtelierError):
    code = "SCHEMA_VERSION"


# --- plane segmentation -----------------------------------------------------

class TooFewPoints(CloudAtelierError):
    code = "TOO_FEW_POINTS"


# --- configuration ----------------------------------------------------------

class ConfigError(CloudAtelierError):
    code = "CONFIG"
