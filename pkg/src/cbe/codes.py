"""Bit-packed binary codes and popcount-based Hamming distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BinaryCodes:
    """n binary codes of k bits each, packed LSB-first.

    Bit j of row i lives in byte ``j // 8`` at bit position ``j % 8``.
    Pad bits past k are always zero, so the Hamming distance between two
    rows is exactly the popcount of their XORed bytes, no masking needed.
    """

    n: int
    k: int
    packed: np.ndarray

    def __post_init__(self):
        packed = np.asarray(self.packed, dtype=np.uint8)
        expected = (self.n, (self.k + 7) // 8)
        if self.n < 0 or self.k < 1:
            raise ValueError(f"invalid code shape n={self.n}, k={self.k}")
        if packed.shape != expected:
            raise ValueError(f"packed array must have shape {expected}, got {packed.shape}")
        if self.k % 8 and packed.size:
            pad_mask = np.uint8((0xFF << (self.k % 8)) & 0xFF)
            if np.any(packed[:, -1] & pad_mask):
                raise ValueError("nonzero pad bits beyond code length")
        object.__setattr__(self, "packed", packed)

    def bits(self) -> np.ndarray:
        """Unpack to an (n, k) uint8 array of 0/1 bits."""
        return np.unpackbits(self.packed, axis=1, bitorder="little", count=self.k)

    def signs(self) -> np.ndarray:
        """Unpack to an (n, k) int8 array of -1/+1 codes (bit 1 -> +1)."""
        return (self.bits().astype(np.int8) * 2) - 1


def pack_bits(bits) -> BinaryCodes:
    """Pack an (n, k) array of 0/1 bits into codes."""
    arr = np.asarray(bits)
    if arr.ndim != 2:
        raise ValueError(f"bits must be two-dimensional, got shape {arr.shape}")
    packed = np.packbits(arr.astype(np.uint8), axis=1, bitorder="little")
    return BinaryCodes(n=arr.shape[0], k=arr.shape[1], packed=packed)


def pack_signs(signs) -> BinaryCodes:
    """Pack an (n, k) array of -1/+1 codes (+1 -> bit 1)."""
    arr = np.asarray(signs)
    return pack_bits(arr > 0)


def hamming(codes: BinaryCodes, i: int, j: int) -> int:
    """Exact Hamming distance between rows i and j."""
    if not (0 <= i < codes.n and 0 <= j < codes.n):
        raise IndexError(f"row indices ({i}, {j}) out of range for n={codes.n}")
    return int(np.bitwise_count(codes.packed[i] ^ codes.packed[j]).sum())


def hamming_matrix(a: BinaryCodes, b: BinaryCodes, chunk: int = 256) -> np.ndarray:
    """All-pairs Hamming distances, shape (a.n, b.n), dtype int32."""
    if a.k != b.k:
        raise ValueError(f"code lengths differ: {a.k} vs {b.k}")
    out = np.empty((a.n, b.n), dtype=np.int32)
    for start in range(0, a.n, chunk):
        stop = min(start + chunk, a.n)
        xor = a.packed[start:stop, None, :] ^ b.packed[None, :, :]
        out[start:stop] = np.bitwise_count(xor).sum(axis=2, dtype=np.int32)
    return out
