"""Exception hierarchy shared by the pipeline stages."""


class IrradsimError(Exception):
    """Base class; ``stage`` names the pipeline step that failed."""

    stage = "pipeline"


class InvalidInputError(IrradsimError, ValueError):
    stage = "ingest"


class ParseError(IrradsimError):
    stage = "ingest"


class InsufficientDataError(IrradsimError):
    stage = "smoothing"


class DegenerateDayError(IrradsimError):
    stage = "daily-fit"


class DegenerateFitError(IrradsimError):
    stage = "long-term-trends"


class GumbelFitError(IrradsimError):
    stage = "long-term-trends"


class BinningError(IrradsimError):
    stage = "residual-maps"


class BandwidthError(IrradsimError):
    stage = "residual-maps"


class EmptySupportError(IrradsimError):
    stage = "residual-maps"


class GridError(IrradsimError):
    stage = "residual-maps"


class RealizationError(IrradsimError):
    stage = "stochastic-sim"


class ModelFileError(IrradsimError):
    stage = "model-file"


class ExtractionError(IrradsimError):
    stage = "pv-validation"


class StatisticsError(IrradsimError):
    stage = "pv-validation"


class AlignmentError(IrradsimError):
    stage = "pv-validation"
