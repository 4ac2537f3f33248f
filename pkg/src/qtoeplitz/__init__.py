"""qtoeplitz: streaming Toeplitz-hashing randomness extraction toolkit.

Software model of a multi-channel QRNG post-processing pipeline: blockwise
GF(2) Toeplitz extraction, seed lifecycle with randomized selection and
threshold-triggered refresh, security and entropy parameter math, a
simulated Gaussian entropy source, and statistical output validation.

The hot GF(2) kernels run from a compiled extension when it built,
otherwise from a pure-Python fallback; ``__compiled__`` records which one
is active.
"""

__version__ = "0.1.0"

from . import backend
from .analysis import (
    ChannelPairStats,
    bias_zscore,
    bitmap_render,
    cross_correlation,
    export_for_suites,
    mutual_information,
    statistical_distance,
)
from .bits import BitString, BitWriter, dot_parity
from .extractor import (
    ExtractorState,
    ToeplitzConfig,
    extract_blockwise,
    subseed,
    submatrix_multiply,
    toeplitz_direct,
)
from .params import (
    EntropyEstimate,
    SecuritySpec,
    collision_probability,
    collision_probability_log2,
    compose_security,
    compose_security_log10,
    leftover_hash_output_length,
    min_entropy_from_histogram,
    min_entropy_gaussian_adc,
    throughput_accounting,
)
from .pipeline import ChannelConfig, MemorySink, RunReport, aggregate, run_channels
from .seedbank import LfsrState, SecurityLedger, SeedBank, galois_step, select_seed
from .source import SampleBlock, adc_quantize, gaussian_source, width_convert

__compiled__ = backend.has_compiled() and backend.active_name() == "compiled"

__all__ = [
    "BitString",
    "BitWriter",
    "ChannelConfig",
    "ChannelPairStats",
    "EntropyEstimate",
    "ExtractorState",
    "LfsrState",
    "MemorySink",
    "RunReport",
    "SampleBlock",
    "SecurityLedger",
    "SecuritySpec",
    "SeedBank",
    "ToeplitzConfig",
    "__compiled__",
    "__version__",
    "adc_quantize",
    "aggregate",
    "backend",
    "bias_zscore",
    "bitmap_render",
    "collision_probability",
    "collision_probability_log2",
    "compose_security",
    "compose_security_log10",
    "cross_correlation",
    "dot_parity",
    "export_for_suites",
    "extract_blockwise",
    "galois_step",
    "gaussian_source",
    "leftover_hash_output_length",
    "min_entropy_from_histogram",
    "min_entropy_gaussian_adc",
    "mutual_information",
    "run_channels",
    "select_seed",
    "statistical_distance",
    "submatrix_multiply",
    "subseed",
    "throughput_accounting",
    "toeplitz_direct",
    "width_convert",
]
