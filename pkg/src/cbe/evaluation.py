"""Empirical harnesses: angle statistics, retrieval recall, timing scaling.

The angle experiment verifies that the normalized Hamming distance between
two circulant codes estimates theta/pi and that its variance shrinks like
1/k. The recall harness implements the exhaustive-scan protocol: exact l2
ground truth, Hamming ranking, recall@1..m. The timing harness measures
per-point encode cost with caches evicted between reps and BLAS pinned to
one thread, so the observed scaling reflects the methods rather than the
memory hierarchy.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import dsp
from .codes import BinaryCodes, hamming_matrix
from .encoders import bilinear_random, cbe_random, encode_matrix, fjlt_random, lsh_random
from .validation import check_data_matrix, check_positive_int, check_power_of_two

_ANGLE_CHUNK = 512
_EVICT_BUFFER = None


@dataclass
class AngleStats:
    """Monte-Carlo statistics of the normalized Hamming distance at one angle."""

    theta: float
    k: int
    trials: int
    mean_normalized_hamming: float
    empirical_variance: float
    rho: float

    def variance_bound(self) -> float:
        """The additive variance bound for a pair with spread ratio rho."""
        p = self.theta / math.pi
        return p * (1.0 - p) / self.k + 32.0 * self.rho


@dataclass
class RecallCurve:
    method: str
    bits: int
    m_values: np.ndarray
    recall_at_m: np.ndarray
    encode_time_ns_per_point: float = float("nan")


@dataclass
class TimingRecord:
    method: str
    d: int
    k: int
    metric: str
    value: float


def ground_truth_knn(X, queries, g: int) -> np.ndarray:
    """Exact g nearest database rows per query by l2 distance, ties to lower index."""
    X = check_data_matrix(X)
    queries = check_data_matrix(queries, d=X.shape[1], name="queries")
    g = check_positive_int(g, "g")
    if g > X.shape[0]:
        raise ValueError(f"g={g} exceeds database size {X.shape[0]}")
    db_sq = np.sum(X * X, axis=1)
    out = np.empty((queries.shape[0], g), dtype=np.int64)
    chunk = max(1, (1 << 22) // max(1, X.shape[0]))
    for start in range(0, queries.shape[0], chunk):
        q = queries[start : start + chunk]
        d2 = np.sum(q * q, axis=1)[:, None] - 2.0 * (q @ X.T) + db_sq[None, :]
        out[start : start + chunk] = np.argsort(d2, axis=1, kind="stable")[:, :g]
    return out


def recall_at_m(codes_db: BinaryCodes, codes_q: BinaryCodes, truth, m_max: int,
                method: str = "") -> RecallCurve:
    """Average recall@1..m_max of Hamming ranking against the l2 ground truth."""
    truth = np.asarray(truth, dtype=np.int64)
    if truth.ndim != 2 or truth.shape[0] != codes_q.n:
        raise ValueError(f"truth must have shape ({codes_q.n}, g), got {truth.shape}")
    m_max = check_positive_int(m_max, "m_max")
    if m_max > codes_db.n:
        raise ValueError(f"m_max={m_max} exceeds database size {codes_db.n}")
    g = truth.shape[1]
    distances = hamming_matrix(codes_q, codes_db)
    ranked = np.argsort(distances, axis=1, kind="stable")[:, :m_max]
    member = np.zeros((codes_q.n, codes_db.n), dtype=bool)
    member[np.repeat(np.arange(codes_q.n), g), truth.ravel()] = True
    hits = np.take_along_axis(member, ranked, axis=1)
    recall = np.cumsum(hits, axis=1).mean(axis=0) / g
    return RecallCurve(method=method, bits=codes_db.k,
                       m_values=np.arange(1, m_max + 1), recall_at_m=recall)


def angle_pair(theta: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    """A fixed well-spread unit pair at angle theta.

    x is the normalized all-ones vector; y is x rotated by theta within the
    plane it spans with the normalized alternating-sign vector, so both
    coordinates stay O(1/sqrt(d)).
    """
    d = check_power_of_two(d, "d")
    x = np.full(d, 1.0 / math.sqrt(d))
    w = np.where(np.arange(d) % 2 == 0, 1.0, -1.0) / math.sqrt(d)
    y = math.cos(theta) * x + math.sin(theta) * w
    return x, y


def angle_experiment(theta: float, d: int, k: int, trials: int, seed: int) -> AngleStats:
    """Draw fresh (r, signs) per trial; report the normalized-Hamming statistics.

    The vector pair is fixed; randomness is entirely in the projection, so
    the mean estimates theta/pi and the empirical variance is on the draw
    of the circulant parameters.
    """
    d = check_power_of_two(d, "d")
    k = check_positive_int(k, "k")
    if k > d:
        raise ValueError(f"k={k} exceeds d={d}")
    trials = int(trials)
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    x, y = angle_pair(theta, d)
    rho = max(np.max(np.abs(x)) / np.linalg.norm(x), np.max(np.abs(y)) / np.linalg.norm(y))
    rng = np.random.default_rng(seed)
    fractions = np.empty(trials)
    done = 0
    while done < trials:
        count = min(_ANGLE_CHUNK, trials - done)
        r = rng.standard_normal((count, d))
        signs = rng.integers(0, 2, size=(count, d)) * 2 - 1
        spectra = dsp.fft(np.concatenate([r, signs * x, signs * y], axis=0))
        fr, fx, fy = spectra[:count], spectra[count : 2 * count], spectra[2 * count :]
        proj = dsp.ifft(np.concatenate([fr * fx, fr * fy], axis=0)).real
        bits_x = proj[:count, :k] >= 0
        bits_y = proj[count:, :k] >= 0
        fractions[done : done + count] = np.mean(bits_x != bits_y, axis=1)
        done += count
    return AngleStats(theta=theta, k=k, trials=trials,
                      mean_normalized_hamming=float(np.mean(fractions)),
                      empirical_variance=float(np.var(fractions, ddof=1)),
                      rho=float(rho))


def _evict_caches():
    global _EVICT_BUFFER
    if _EVICT_BUFFER is None:
        _EVICT_BUFFER = np.zeros(8 << 20)  # 64 MB of float64
    _EVICT_BUFFER += 1.0


def _make_params(method: str, d: int, k: int, seed: int, fjlt_density: float = 0.1):
    if method in ("full", "lsh"):
        return lsh_random(d, k, seed)
    if method in ("circulant", "cbe-rand"):
        return cbe_random(d, k, seed)
    if method == "bilinear":
        return bilinear_random(d, k, seed)
    if method == "fjlt":
        return fjlt_random(d, k, fjlt_density, seed)
    raise ValueError(f"unknown method {method!r}")


def _median_encode_ns(params, point: np.ndarray, reps: int, warmup: int) -> float:
    times = []
    for _ in range(warmup):
        encode_matrix(params, point)
    for _ in range(reps):
        _evict_caches()
        start = time.perf_counter()
        encode_matrix(params, point)
        times.append(time.perf_counter() - start)
    return float(np.median(times)) * 1e9


def timing_bench(d_values, methods, reps: int = 5, warmup: int = 3,
                 seed: int = 0) -> list[TimingRecord]:
    """Median per-point encode time for each (method, d) at k = d.

    Single worker by contract: BLAS pools are pinned to one thread and a
    64 MB buffer is rewritten between timed reps so every measurement runs
    cold-cache. A cell whose parameters do not fit in memory is recorded as
    NaN rather than aborting the sweep.
    """
    reps = check_positive_int(reps, "reps")
    records = []
    rng = np.random.default_rng(seed)
    with threadpool_limits(limits=1):
        for d in d_values:
            d = check_power_of_two(d, "d")
            point = rng.standard_normal((1, d))
            point /= np.linalg.norm(point)
            for method in methods:
                try:
                    params = _make_params(method, d, d, seed)
                    value = _median_encode_ns(params, point, reps, warmup)
                except MemoryError:
                    value = float("nan")
                records.append(TimingRecord(method=method, d=d, k=d,
                                            metric="encode_ns_per_point", value=value))
                params = None
    return records


def calibrate_encode_times(method: str, d: int, k_values=None, reps: int = 5,
                           warmup: int = 2, seed: int = 0) -> dict[int, float]:
    """Measure per-point encode time over a grid of code lengths.

    Returns {k: nanoseconds}; cells that run out of memory are skipped.
    The result feeds fixed_time_bits, which then resolves budgets without
    re-measuring.
    """
    d = check_power_of_two(d, "d")
    if k_values is None:
        k_values = [k for k in (8 << i for i in range(d.bit_length())) if k <= d]
    rng = np.random.default_rng(seed)
    point = rng.standard_normal((1, d))
    point /= np.linalg.norm(point)
    table = {}
    with threadpool_limits(limits=1):
        for k in sorted(k_values):
            try:
                params = _make_params(method, d, int(k), seed)
                table[int(k)] = _median_encode_ns(params, point, reps, warmup)
            except MemoryError:
                break
            params = None
    return table


def fixed_time_bits(method: str, budget_ns: float, d: int,
                    calibration: dict[int, float]) -> int:
    """Largest measured code length whose per-point encode time fits the budget."""
    if not calibration:
        raise ValueError(f"no calibration measurements for {method!r} at d={d}")
    feasible = [k for k, ns in calibration.items() if ns <= budget_ns]
    if not feasible:
        k_min = min(calibration)
        raise ValueError(
            f"budget {budget_ns:.0f} ns is below the fastest measured cell "
            f"(k={k_min}: {calibration[k_min]:.0f} ns)"
        )
    return max(feasible)


def fit_loglog_slope(d_values, times) -> float:
    """Least-squares slope of log2(time) against log2(d)."""
    ld = np.log2(np.asarray(d_values, dtype=np.float64))
    lt = np.log2(np.asarray(times, dtype=np.float64))
    return float(np.polyfit(ld, lt, 1)[0])


def write_timing_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "d", "k", "metric", "value"])
        for rec in records:
            writer.writerow([rec.method, rec.d, rec.k, rec.metric, repr(rec.value)])


def write_angle_csv(path, stats_list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "k", "trials", "mean", "variance", "bound"])
        for s in stats_list:
            writer.writerow([repr(s.theta), s.k, s.trials, repr(s.mean_normalized_hamming),
                             repr(s.empirical_variance), repr(s.variance_bound())])


def write_recall_csv(path, curves) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "k", "m", "recall"])
        for curve in curves:
            for m, recall in zip(curve.m_values, curve.recall_at_m):
                writer.writerow([curve.method, curve.bits, int(m), repr(float(recall))])
