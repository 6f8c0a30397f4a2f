"""Independent reference implementations the tests check the library against.

Everything here is deliberately naive: explicit O(d^2) transforms, dense
matrices, exhaustive grids. None of it shares code with the library paths
under test.
"""

import numpy as np


def reference_dft(signal):
    """O(d^2) DFT by the definition, any length: out[l] = sum_m x[m] e^{-2pi i lm/d}."""
    x = np.asarray(signal, dtype=np.complex128)
    d = x.shape[0]
    l = np.arange(d)
    basis = np.exp(-2j * np.pi * np.outer(l, l) / d)
    return basis @ x


def reference_idft(spectrum):
    s = np.asarray(spectrum, dtype=np.complex128)
    d = s.shape[0]
    l = np.arange(d)
    basis = np.exp(2j * np.pi * np.outer(l, l) / d)
    return basis @ s / d


def dense_circulant(r):
    """Dense circulant with r as its first column: C[i, j] = r[(i - j) mod d]."""
    r = np.asarray(r, dtype=np.float64)
    d = r.shape[0]
    idx = (np.arange(d)[:, None] - np.arange(d)[None, :]) % d
    return r[idx]


def sylvester_hadamard(d):
    """Hadamard matrix of order d (power of two) by the Sylvester doubling."""
    h = np.array([[1.0]])
    while h.shape[0] < d:
        h = np.block([[h, h], [h, -h]])
    return h


def popcount_bits(row_a, row_b):
    """Bit-by-bit Hamming distance between two packed byte rows."""
    total = 0
    for byte_a, byte_b in zip(row_a.tolist(), row_b.tolist()):
        total += bin(byte_a ^ byte_b).count("1")
    return total


def grid_min_1d(f, lo=-4.0, hi=4.0, coarse=8001, zooms=3, zoom_points=401):
    """Vectorized grid search with local zooming; returns (argmin, min)."""
    grid = np.linspace(lo, hi, coarse)
    values = f(grid)
    best = int(np.argmin(values))
    t, v = grid[best], values[best]
    width = (hi - lo) / (coarse - 1)
    for _ in range(zooms):
        grid = np.linspace(t - 2 * width, t + 2 * width, zoom_points)
        values = f(grid)
        best = int(np.argmin(values))
        t, v = grid[best], values[best]
        width = 4 * width / (zoom_points - 1)
    return float(t), float(v)


def grid_min_2d(f, lo=-3.0, hi=3.0, coarse=601, zooms=3, zoom_points=161):
    """2-D grid search with local zooming; returns ((a, b), min)."""
    axis = np.linspace(lo, hi, coarse)
    aa, bb = np.meshgrid(axis, axis, indexing="ij")
    values = f(aa, bb)
    flat = int(np.argmin(values))
    a, b = aa.flat[flat], bb.flat[flat]
    v = values.flat[flat]
    width = (hi - lo) / (coarse - 1)
    for _ in range(zooms):
        ax = np.linspace(a - 2 * width, a + 2 * width, zoom_points)
        bx = np.linspace(b - 2 * width, b + 2 * width, zoom_points)
        aa, bb = np.meshgrid(ax, bx, indexing="ij")
        values = f(aa, bb)
        flat = int(np.argmin(values))
        a, b = aa.flat[flat], bb.flat[flat]
        v = values.flat[flat]
        width = 4 * width / (zoom_points - 1)
    return (float(a), float(b)), float(v)
