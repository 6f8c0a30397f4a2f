"""Fast transform kernels: radix-2 FFT, Walsh-Hadamard, and circulant products.

Every operation acts along the last axis and accepts stacked inputs, so a
batch of signals transforms in a single call. Transform lengths must be
powers of two. Plans (bit-reversal permutations, per-stage twiddle tables)
are cached per length and never mutated after construction, so concurrent
callers can share them freely.

Conventions: the forward transform uses the negative exponent,
``F(x)[l] = sum_m x[m] exp(-2j*pi*l*m/d)``, and the entire ``1/d``
normalization sits on the inverse. The circulant product relies on this
exact convention, as does the frequency-domain optimizer built on top.
"""

from __future__ import annotations

import numpy as np

_PLANS: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}


def _plan(d: int):
    plan = _PLANS.get(d)
    if plan is None:
        levels = d.bit_length() - 1
        idx = np.arange(d)
        rev = np.zeros(d, dtype=np.intp)
        for b in range(levels):
            rev |= ((idx >> b) & 1) << (levels - 1 - b)
        twiddles = []
        m = 2
        while m <= d:
            twiddles.append(np.exp((-2j * np.pi / m) * np.arange(m // 2)))
            m *= 2
        plan = (rev, twiddles)
        _PLANS[d] = plan
    return plan


def _check_length(x: np.ndarray) -> int:
    if x.ndim == 0:
        raise ValueError("transform input must have at least one axis")
    d = x.shape[-1]
    if d < 1:
        raise ValueError("transform length must be at least 1")
    if d & (d - 1):
        raise ValueError(f"transform length must be a power of two, got {d}")
    return d


def fft(signal) -> np.ndarray:
    """Forward DFT along the last axis (iterative radix-2 decimation in time).

    Returns a complex128 array with ``out[l] = sum_m x[m] exp(-2j*pi*l*m/d)``.
    """
    x = np.asarray(signal)
    d = _check_length(x)
    rev, twiddles = _plan(d)
    a = np.ascontiguousarray(x[..., rev], dtype=np.complex128)
    lead = a.shape[:-1]
    m = 2
    for w in twiddles:
        half = m // 2
        blocks = a.reshape(lead + (d // m, m))
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * w
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        m *= 2
    return a


def ifft(spectrum) -> np.ndarray:
    """Inverse DFT along the last axis; ``ifft(fft(x)) == x``."""
    s = np.asarray(spectrum)
    d = _check_length(s)
    return np.conj(fft(np.conj(s))) / d


def circulant_multiply(r, x, r_spectrum=None) -> np.ndarray:
    """Product of the circulant matrix generated by ``r`` with ``x``.

    ``r`` is the first column of the matrix, so entry (i, j) is
    ``r[(i - j) mod d]`` and the product is the circular convolution of
    ``r`` and ``x``, computed as ``ifft(fft(r) * fft(x))``. ``x`` may be a
    stack of vectors. Pass ``r_spectrum=fft(r)`` to reuse a precomputed
    spectrum across calls.

    The imaginary residual of the inverse transform is checked against a
    scale-aware bound before being discarded; exceeding it signals an
    internal inconsistency rather than silent truncation.
    """
    x = np.asarray(x, dtype=np.float64)
    if r_spectrum is None:
        r = np.asarray(r, dtype=np.float64)
        if r.ndim != 1:
            raise ValueError("r must be one-dimensional")
        if x.shape[-1] != r.shape[0]:
            raise ValueError(
                f"length mismatch: r has {r.shape[0]} entries, x has {x.shape[-1]}"
            )
        r_spectrum = fft(r)
    elif x.shape[-1] != r_spectrum.shape[-1]:
        raise ValueError("length mismatch between r_spectrum and x")
    y = ifft(r_spectrum * fft(x))
    residual = float(np.max(np.abs(y.imag))) if y.size else 0.0
    scale = float(np.max(np.abs(y.real))) if y.size else 0.0
    if residual > 1e-7 * max(1.0, scale):
        raise ArithmeticError(
            f"circulant product imaginary residual {residual:.3e} exceeds tolerance"
        )
    return np.ascontiguousarray(y.real)


def fwht(signal) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    Sylvester ordering; involution up to scale: ``fwht(fwht(x)) == d * x``.
    """
    x = np.asarray(signal, dtype=np.float64)
    d = _check_length(x)
    a = x.copy()
    lead = a.shape[:-1]
    h = 1
    while h < d:
        blocks = a.reshape(lead + (d // (2 * h), 2, h))
        top = blocks[..., 0, :].copy()
        blocks[..., 0, :] = top + blocks[..., 1, :]
        blocks[..., 1, :] = top - blocks[..., 1, :]
        h *= 2
    return a


def circular_shift(x, t: int) -> np.ndarray:
    """Circularly shift by ``t``: ``out[j] = x[(j - t) mod d]`` (last axis)."""
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("cannot shift an empty vector")
    return np.roll(x, t, axis=-1)
