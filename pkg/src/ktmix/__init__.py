"""Compression-based probability estimation, prediction and density
estimation for stationary time series."""

from .alphabet import (
    Alphabet,
    ContextCounts,
    DataError,
    MultiSample,
    Sequence,
    context_counts,
    count_occurrences,
    diamond_concat,
)
from .coding import (
    BuiltinCode,
    CodeMeasure,
    Compressor,
    CompressorError,
    ExternalCompressor,
    KraftResult,
    builtin_code_length,
    code_length,
    conditional_from_code,
    kraft_check,
    measure_from_code,
)
from .density import (
    DyadicPartition,
    MixtureDensity,
    QuantizedSequence,
    quantized_density_level,
)
from .measures import (
    KTMixture,
    Krichevsky,
    Laplace,
    LOG_WEIGHTS,
    WeightSequence,
    kt_cond,
    kt_log2,
    kt_prob,
    laplace_cond,
    laplace_prob,
    mixture_cond,
    mixture_log2,
    mixture_prob,
    mixture_weight,
    mixture_weight_tail,
)
from .prediction import (
    CesaroPoint,
    PairSequence,
    PredictionTrace,
    cesaro_error_curve,
    cesaro_error_exact,
    kl_divergence,
    online_predict,
    pinsker_check,
    side_info_predict,
    variation_distance,
)
from .processes import (
    BernoulliSource,
    MarkovSource,
    ProcessSpec,
    four_mixture_series,
    generate,
    ingest_csv,
    sine_series,
)
from .bench import (
    BenchmarkReport,
    PredictorConfig,
    inertial_predict,
    predict_next,
    run_benchmark,
)

__version__ = "0.1.0"
