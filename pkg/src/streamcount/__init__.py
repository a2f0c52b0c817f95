"""Choose the number of CUDA streams for a chunked copy-compute pipeline.

Fits regression models of the overlapped work and the stream-creation
overhead from profiled timings, then picks the stream count with the largest
predicted saving. A fixed-cost baseline and a discrete-event simulator are
included as cross-checks.
"""

from .errors import (
    ComputationError,
    DuplicateSizeError,
    InvalidStreamCountError,
    MalformedRowError,
    MissingStageTimingsError,
    NegativeDurationError,
    RankDeficiencyError,
    StreamCountError,
    TooFewObservationsError,
    ValidationError,
    ZeroVarianceError,
)
from .predictor import (
    PUBLISHED_BUNDLE,
    ModelBundle,
    Recommendation,
    gomez_luna_optimum,
    predict_overhead,
    predict_sum,
    recommend,
    recommend_fp32,
)
from .simulator import PipelineSpec, SimResult, simulate, verify_lower_bound
from .timing import (
    STREAM_COUNTS,
    StageTimings,
    StreamedRun,
    overhead_from_measurement,
    overlap_benefit,
    overlap_sum,
    streamed_lower_bound,
    total_unstreamed,
)

__version__ = "0.1.0"
