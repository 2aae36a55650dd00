"""Exception hierarchy shared by all fpgm modules."""


class FpgmError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(FpgmError):
    """Input violates an operation's preconditions (dims, range, finiteness)."""


class EmptyEdgeRegion(FpgmError):
    """A mask produced no edge pixels; the sample cannot contribute a signature."""


class NoUsableSamples(FpgmError):
    """A dataset-level operation found zero samples it could use."""


class UnusablePrior(FpgmError):
    """A frequency prior with no accumulated samples was passed to augmentation."""


class EmptyTarget(FpgmError):
    """A loss target carries zero valid pixels."""


class UndefinedDistance(FpgmError):
    """Boundary distances are undefined because a mask is empty."""


class UnsupportedFormat(FpgmError):
    """An image file has a format or bit depth the loader does not accept."""


class UnsupportedVersion(FpgmError):
    """A persisted file declares a format version this build does not know."""
