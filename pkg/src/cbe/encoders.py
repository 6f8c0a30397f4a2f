"""Sign-projection encoders: circulant, dense Gaussian, bilinear, and FJLT.

Each encoder is a parameter object plus a pure encode function mapping
d-dimensional real vectors to k-bit codes in {-1, +1}. The sign rule is
uniform across encoders: a projection coordinate of exactly zero maps
to +1. ``encode_matrix`` packs whole datasets row by row into
:class:`~cbe.codes.BinaryCodes`, optionally fanning row blocks out over a
thread pool with bit-identical output for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dsp
from .codes import BinaryCodes, pack_signs
from .validation import (
    check_data_matrix,
    check_positive_int,
    check_power_of_two,
    check_signs,
    check_vector,
)

_ROW_BLOCK = 2048


@dataclass(frozen=True)
class CirculantParams:
    """Parameters of a circulant sign projection.

    ``r`` generates the circulant matrix as its first column; ``signs`` is
    the +-1 diagonal applied to inputs before projecting; ``k`` is the
    number of output bits. The dense matrix is never materialized, so the
    whole projection costs O(d) space. When k > d, ``extra`` holds further
    (r, signs) generator pairs, each contributing up to d more bits.
    """

    r: np.ndarray
    signs: np.ndarray
    k: int
    extra: tuple = ()

    def __post_init__(self):
        r = check_vector(self.r, name="r")
        if not np.all(np.isfinite(r)):
            raise ValueError("r contains non-finite values")
        signs = check_signs(self.signs, d=r.shape[0], name="signs")
        check_positive_int(self.k, "k")
        extra = tuple((check_vector(er, d=r.shape[0]), check_signs(es, d=r.shape[0])) for er, es in self.extra)
        if self.k > r.shape[0] * (1 + len(extra)):
            raise ValueError(
                f"k={self.k} exceeds the {1 + len(extra)} generator(s) x d={r.shape[0]} capacity"
            )
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "extra", extra)

    @property
    def d(self) -> int:
        return self.r.shape[0]

    def generators(self):
        yield self.r, self.signs
        yield from self.extra


@dataclass(frozen=True)
class LshParams:
    """Dense Gaussian sign projection: a full k x d matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float32)
        if m.ndim != 2:
            raise ValueError(f"matrix must be two-dimensional, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class BilinearParams:
    """Two-sided projection of the input reshaped to a near-square matrix."""

    r1: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        r1 = np.asarray(self.r1, dtype=np.float64)
        r2 = np.asarray(self.r2, dtype=np.float64)
        if r1.ndim != 2 or r2.ndim != 2:
            raise ValueError("r1 and r2 must be two-dimensional")
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)

    @property
    def d(self) -> int:
        return self.r1.shape[0] * self.r2.shape[0]

    @property
    def k(self) -> int:
        return self.r1.shape[1] * self.r2.shape[1]


@dataclass(frozen=True)
class FjltParams:
    """Random signs, Walsh-Hadamard transform, then a sparse Gaussian projection.

    The sparse k x d matrix is stored as (rows, cols, values) triples sorted
    by row; ``density`` records the requested nonzero fraction.
    """

    d: int
    k: int
    signs: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    density: float

    def __post_init__(self):
        check_power_of_two(self.d, "d")
        check_positive_int(self.k, "k")
        signs = check_signs(self.signs, d=self.d)
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValueError("rows, cols, values must be 1-D arrays of equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= self.k):
            raise ValueError("row indices out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= self.d):
            raise ValueError("column indices out of range")
        if not 0.0 < self.density <= 1.0:
            raise ValueError(f"density must be in (0, 1], got {self.density}")
        actual = rows.size / (self.k * self.d)
        if abs(actual - self.density) > 0.1 * self.density:
            raise ValueError(
                f"actual nonzero density {actual:.4f} deviates more than 10% from {self.density}"
            )
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)


def _rademacher(rng, d):
    return (rng.integers(0, 2, size=d, dtype=np.int8) * 2 - 1).astype(np.int8)


def cbe_random(d: int, k: int, seed: int) -> CirculantParams:
    """Draw circulant parameters: unit-Gaussian generator, Rademacher signs.

    Deterministic per seed. When k > d, ceil(k/d) - 1 extra generator pairs
    are drawn so their concatenated outputs cover k bits.
    """
    d = check_power_of_two(d, "d")
    k = check_positive_int(k, "k")
    rng = np.random.default_rng(seed)
    n_generators = -(-k // d)
    pairs = [(rng.standard_normal(d), _rademacher(rng, d)) for _ in range(n_generators)]
    return CirculantParams(r=pairs[0][0], signs=pairs[0][1], k=k, extra=tuple(pairs[1:]))


def lsh_random(d: int, k: int, seed: int) -> LshParams:
    """Dense k x d matrix of iid standard normal entries (float32 storage)."""
    d = check_positive_int(d, "d")
    k = check_positive_int(k, "k")
    rng = np.random.default_rng(seed)
    return LshParams(matrix=rng.standard_normal((k, d), dtype=np.float32))


def _near_square_split(n: int) -> tuple[int, int]:
    # n = 2^e; the first factor is 2^ceil(e/2), i.e. 2^ceil(log2 sqrt(n))
    e = n.bit_length() - 1
    first = 1 << ((e + 1) // 2)
    return first, n // first


def bilinear_random(d: int, k: int, seed: int) -> BilinearParams:
    """Gaussian bilinear projection with near-square power-of-two shapes."""
    d = check_power_of_two(d, "d")
    k = check_power_of_two(k, "k")
    d1, d2 = _near_square_split(d)
    k1, k2 = _near_square_split(k)
    rng = np.random.default_rng(seed)
    return BilinearParams(r1=rng.standard_normal((d1, k1)), r2=rng.standard_normal((d2, k2)))


def fjlt_random(d: int, k: int, density: float, seed: int) -> FjltParams:
    """Sparse Gaussian projection after a signed Hadamard transform.

    The sparse matrix gets exactly round(density * k * d) nonzeros (sampled
    without replacement) for moderate sizes, or round(density * d) per row
    for very large ones; either way the realized density matches the request.
    """
    d = check_power_of_two(d, "d")
    k = check_positive_int(k, "k")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    signs = _rademacher(rng, d)
    if k * d <= 1 << 24:
        nnz = max(1, round(density * k * d))
        flat = rng.choice(k * d, size=nnz, replace=False)
        flat.sort()
        rows, cols = flat // d, flat % d
    else:
        per_row = max(1, round(density * d))
        cols = np.concatenate([np.sort(rng.choice(d, size=per_row, replace=False)) for _ in range(k)])
        rows = np.repeat(np.arange(k, dtype=np.int64), per_row)
    values = rng.standard_normal(rows.size)
    return FjltParams(d=d, k=k, signs=signs, rows=rows, cols=cols, values=values, density=density)


def _sign_codes(projections: np.ndarray) -> np.ndarray:
    return np.where(projections >= 0, 1, -1).astype(np.int8)


def cbe_encode(params: CirculantParams, x) -> np.ndarray:
    """k-bit circulant code: sign of circ(r) applied to the sign-flipped input.

    ``x`` may be a single vector or a stack of rows; output has the same
    leading shape with k trailing codes in {-1, +1}. For k < d the first k
    projection coordinates are kept; for k > d successive generators each
    contribute their first d coordinates. O(d log d) per generator via the
    FFT; no dense matrix is ever formed.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.d:
        raise ValueError(f"x has {x.shape[-1]} features, params expect {params.d}")
    pieces = []
    remaining = params.k
    for r, signs in params.generators():
        if remaining <= 0:
            break
        y = dsp.circulant_multiply(r, x * signs)
        take = min(remaining, params.d)
        pieces.append(y[..., :take])
        remaining -= take
    return _sign_codes(np.concatenate(pieces, axis=-1))


def lsh_encode(params: LshParams, x) -> np.ndarray:
    """Dense sign projection: sign(A x)."""
    x = np.asarray(x, dtype=np.float32)
    if x.shape[-1] != params.d:
        raise ValueError(f"x has {x.shape[-1]} features, params expect {params.d}")
    return _sign_codes(x @ params.matrix.T)


def bilinear_encode(params: BilinearParams, x) -> np.ndarray:
    """Bilinear sign projection: sign(R1^T Z R2) with Z = x reshaped row-major."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.d:
        raise ValueError(f"x has {x.shape[-1]} features, params expect {params.d}")
    d1 = params.r1.shape[0]
    d2 = params.r2.shape[0]
    z = x.reshape(x.shape[:-1] + (d1, d2))
    out = (params.r1.T @ z) @ params.r2
    return _sign_codes(out.reshape(x.shape[:-1] + (params.k,)))


def fjlt_encode(params: FjltParams, x) -> np.ndarray:
    """FJLT sign projection: sparse Gaussian matrix times Hadamard-mixed input."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.d:
        raise ValueError(f"x has {x.shape[-1]} features, params expect {params.d}")
    mixed = dsp.fwht(x * params.signs)
    proj = np.zeros(x.shape[:-1] + (params.k,), dtype=np.float64)
    # triples are sorted by row: reduce each row's gathered contributions
    boundaries = np.flatnonzero(np.diff(params.rows)) + 1
    starts = np.concatenate(([0], boundaries))
    row_ids = params.rows[starts]
    contrib = mixed[..., params.cols] * params.values
    proj[..., row_ids] = np.add.reduceat(contrib, starts, axis=-1)
    return _sign_codes(proj)


def precondition(x, signs, block: int) -> np.ndarray:
    """Blockwise signed Hadamard mix that spreads mass across coordinates.

    Each length-``block`` slice is sign-flipped and rotated by the
    orthonormal Hadamard transform, preserving the l2 norm while shrinking
    the l-infinity norm of generic inputs. ``block`` must be a power of two
    dividing d.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[-1]
    block = check_power_of_two(block, "block")
    if d % block:
        raise ValueError(f"block={block} does not divide d={d}")
    signs = check_signs(signs, d=d)
    mixed = (x * signs).reshape(x.shape[:-1] + (d // block, block))
    out = dsp.fwht(mixed) / math.sqrt(block)
    return out.reshape(x.shape)


def _encode_fn(params):
    if isinstance(params, CirculantParams):
        spectra = [dsp.fft(r) for r, _ in params.generators()]
        all_signs = [s for _, s in params.generators()]

        def encode(block):
            pieces = []
            remaining = params.k
            for spec, signs in zip(spectra, all_signs):
                if remaining <= 0:
                    break
                y = dsp.circulant_multiply(None, block * signs, r_spectrum=spec)
                take = min(remaining, params.d)
                pieces.append(y[..., :take])
                remaining -= take
            return _sign_codes(np.concatenate(pieces, axis=-1))

        return encode
    if isinstance(params, LshParams):
        return lambda block: lsh_encode(params, block)
    if isinstance(params, BilinearParams):
        return lambda block: bilinear_encode(params, block)
    if isinstance(params, FjltParams):
        return lambda block: fjlt_encode(params, block)
    raise TypeError(f"unsupported params type {type(params).__name__}")


def encode_matrix(params, X, threads: int = 1) -> BinaryCodes:
    """Encode every row of X, packing the result into BinaryCodes.

    Rows are processed in fixed blocks; with ``threads > 1`` the blocks run
    on a thread pool but land in disjoint output slices, so the packed bytes
    are identical for every thread count.
    """
    X = check_data_matrix(X, d=params.d)
    n = X.shape[0]
    encode = _encode_fn(params)
    out = np.empty((n, params.k), dtype=np.int8)
    blocks = [(start, min(start + _ROW_BLOCK, n)) for start in range(0, n, _ROW_BLOCK)]

    def work(bounds):
        start, stop = bounds
        out[start:stop] = encode(X[start:stop])

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, blocks))
    else:
        for bounds in blocks:
            work(bounds)
    return pack_signs(out)
