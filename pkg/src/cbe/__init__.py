"""Circulant binary embeddings.

k-bit binary codes of d-dimensional vectors through structured sign
projections. The circulant projection runs in O(d log d) time and O(d)
space via the FFT, with either random (CBE-rand) or data-optimized
(CBE-opt) parameters; dense Gaussian (LSH), bilinear, and FJLT encoders
are included as baselines, along with retrieval/statistics/timing
harnesses and bit-exact file formats.
"""

from .codes import BinaryCodes, hamming, hamming_matrix, pack_bits, pack_signs
from .dsp import circulant_multiply, circular_shift, fft, fwht, ifft
from .encoders import (
    BilinearParams,
    CirculantParams,
    FjltParams,
    LshParams,
    bilinear_encode,
    bilinear_random,
    cbe_encode,
    cbe_random,
    encode_matrix,
    fjlt_encode,
    fjlt_random,
    lsh_encode,
    lsh_random,
    precondition,
)
from .estimators import (
    BilinearSignProjection,
    CirculantBinaryEmbedding,
    FjltSignProjection,
    SignRandomProjection,
)
from .evaluation import (
    AngleStats,
    RecallCurve,
    TimingRecord,
    angle_experiment,
    angle_pair,
    calibrate_encode_times,
    fixed_time_bits,
    ground_truth_knn,
    recall_at_m,
    timing_bench,
)
from .optimizer import (
    OptConfig,
    OptState,
    PairConstraints,
    UnboundedObjectiveError,
    accumulate_stats,
    dense_circulant,
    objective,
    solve_dc,
    solve_pair,
    train,
    update_spectrum,
    update_targets,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
