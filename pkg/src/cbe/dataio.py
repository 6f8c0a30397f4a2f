"""Bit-exact file formats, synthetic datasets, and row normalization.

Three little-endian binary formats, each with a 4-byte magic, a u32
version, and two u64 shape fields:

    CBEM  data matrices   header + n*d float32, row-major
    CBEC  binary codes    header + n*ceil(k/8) packed bytes, LSB-first
    CBEP  parameters      header + method tag + per-method arrays

Readers reject malformed input with a typed error; they never truncate
silently. Writers and readers round-trip byte-exactly.
"""

from __future__ import annotations

import struct

import numpy as np

from .codes import BinaryCodes
from .encoders import BilinearParams, CirculantParams, FjltParams, LshParams
from .optimizer import PairConstraints
from .validation import check_positive_int

MATRIX_MAGIC = b"CBEM"
CODES_MAGIC = b"CBEC"
PARAMS_MAGIC = b"CBEP"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIQQ")


class DataFileError(Exception):
    """Base class for malformed data files."""


class BadMagicError(DataFileError):
    pass


class UnsupportedVersionError(DataFileError):
    pass


class TruncatedFileError(DataFileError):
    pass


class PayloadSizeError(DataFileError):
    pass


class PadBitsError(DataFileError):
    pass


def _read_file(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _parse_header(blob: bytes, magic: bytes, path) -> tuple[int, int]:
    if len(blob) < _HEADER.size:
        raise TruncatedFileError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    got_magic, version, a, b = _HEADER.unpack_from(blob)
    if got_magic != magic:
        raise BadMagicError(f"{path}: expected magic {magic!r}, found {got_magic!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported version {version}")
    return a, b


def _check_payload(blob: bytes, expected: int, path):
    actual = len(blob) - _HEADER.size
    if actual < expected:
        raise TruncatedFileError(
            f"{path}: payload has {actual} bytes, header declares {expected}"
        )
    if actual > expected:
        raise PayloadSizeError(
            f"{path}: payload has {actual} bytes, header declares {expected}"
        )


def write_matrix(path, m) -> None:
    m = np.ascontiguousarray(m, dtype="<f4")
    if m.ndim != 2:
        raise ValueError(f"matrix must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MATRIX_MAGIC, FORMAT_VERSION, m.shape[0], m.shape[1]))
        fh.write(m.tobytes())


def read_matrix(path) -> np.ndarray:
    blob = _read_file(path)
    n, d = _parse_header(blob, MATRIX_MAGIC, path)
    _check_payload(blob, n * d * 4, path)
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    if not np.all(np.isfinite(data)):
        raise DataFileError(f"{path}: matrix payload contains non-finite values")
    return np.ascontiguousarray(data)


def write_codes(path, codes: BinaryCodes) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CODES_MAGIC, FORMAT_VERSION, codes.n, codes.k))
        fh.write(np.ascontiguousarray(codes.packed).tobytes())


def read_codes(path) -> BinaryCodes:
    blob = _read_file(path)
    n, k = _parse_header(blob, CODES_MAGIC, path)
    if k < 1:
        raise DataFileError(f"{path}: invalid code length {k}")
    row_bytes = (k + 7) // 8
    _check_payload(blob, n * row_bytes, path)
    packed = np.frombuffer(blob, dtype=np.uint8, offset=_HEADER.size).reshape(n, row_bytes)
    try:
        return BinaryCodes(n=n, k=k, packed=packed.copy())
    except ValueError as exc:
        raise PadBitsError(f"{path}: {exc}") from exc


_METHOD_TAGS = {
    CirculantParams: "circulant",
    LshParams: "lsh",
    BilinearParams: "bilinear",
    FjltParams: "fjlt",
}


class _Cursor:
    def __init__(self, blob: bytes, path):
        self.blob = blob
        self.offset = _HEADER.size
        self.path = path

    def take(self, count: int, dtype) -> np.ndarray:
        dtype = np.dtype(dtype)
        nbytes = count * dtype.itemsize
        if self.offset + nbytes > len(self.blob):
            raise TruncatedFileError(f"{self.path}: payload ended inside an array field")
        out = np.frombuffer(self.blob, dtype=dtype, count=count, offset=self.offset)
        self.offset += nbytes
        return out.copy()

    def take_scalar(self, dtype):
        return self.take(1, dtype)[0]

    def done(self):
        if self.offset != len(self.blob):
            raise PayloadSizeError(
                f"{self.path}: {len(self.blob) - self.offset} unexpected trailing bytes"
            )


def write_params(path, params, seed: int = 0) -> None:
    """Serialize encoder parameters with a method tag; round-trips bit-exactly."""
    tag = _METHOD_TAGS.get(type(params))
    if tag is None:
        raise TypeError(f"unsupported params type {type(params).__name__}")
    chunks = [struct.pack("<H", len(tag)), tag.encode("ascii"), struct.pack("<q", int(seed))]
    if isinstance(params, CirculantParams):
        generators = list(params.generators())
        chunks.append(struct.pack("<Q", len(generators)))
        for r, signs in generators:
            chunks.append(r.astype("<f8").tobytes())
            chunks.append(signs.astype(np.int8).tobytes())
    elif isinstance(params, LshParams):
        chunks.append(params.matrix.astype("<f4").tobytes())
    elif isinstance(params, BilinearParams):
        chunks.append(struct.pack("<QQQQ", *params.r1.shape, *params.r2.shape))
        chunks.append(params.r1.astype("<f8").tobytes())
        chunks.append(params.r2.astype("<f8").tobytes())
    else:
        chunks.append(struct.pack("<dQ", params.density, params.rows.size))
        chunks.append(params.signs.astype(np.int8).tobytes())
        chunks.append(params.rows.astype("<i8").tobytes())
        chunks.append(params.cols.astype("<i8").tobytes())
        chunks.append(params.values.astype("<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(PARAMS_MAGIC, FORMAT_VERSION, params.d, params.k))
        for chunk in chunks:
            fh.write(chunk)


def read_params(path):
    """Load encoder parameters; returns (params, seed)."""
    blob = _read_file(path)
    d, k = _parse_header(blob, PARAMS_MAGIC, path)
    cur = _Cursor(blob, path)
    tag_len = int(cur.take_scalar("<u2"))
    if cur.offset + tag_len > len(blob):
        raise TruncatedFileError(f"{path}: payload ended inside the method tag")
    tag = blob[cur.offset : cur.offset + tag_len].decode("ascii", errors="replace")
    cur.offset += tag_len
    seed = int(cur.take_scalar("<i8"))
    if tag == "circulant":
        n_generators = int(cur.take_scalar("<u8"))
        if n_generators < 1:
            raise DataFileError(f"{path}: circulant params need at least one generator")
        pairs = []
        for _ in range(n_generators):
            r = cur.take(d, "<f8")
            signs = cur.take(d, np.int8)
            pairs.append((r, signs))
        cur.done()
        params = CirculantParams(r=pairs[0][0], signs=pairs[0][1], k=k, extra=tuple(pairs[1:]))
    elif tag == "lsh":
        matrix = cur.take(k * d, "<f4").reshape(k, d)
        cur.done()
        params = LshParams(matrix=matrix)
    elif tag == "bilinear":
        d1, k1, d2, k2 = (int(cur.take_scalar("<u8")) for _ in range(4))
        r1 = cur.take(d1 * k1, "<f8").reshape(d1, k1)
        r2 = cur.take(d2 * k2, "<f8").reshape(d2, k2)
        cur.done()
        params = BilinearParams(r1=r1, r2=r2)
    elif tag == "fjlt":
        density = float(cur.take_scalar("<f8"))
        nnz = int(cur.take_scalar("<u8"))
        signs = cur.take(d, np.int8)
        rows = cur.take(nnz, "<i8")
        cols = cur.take(nnz, "<i8")
        values = cur.take(nnz, "<f8")
        cur.done()
        params = FjltParams(d=d, k=k, signs=signs, rows=rows, cols=cols,
                            values=values, density=density)
    else:
        raise DataFileError(f"{path}: unknown method tag {tag!r}")
    return params, seed


def normalize_rows(m) -> np.ndarray:
    """Scale every row to unit l2 norm (float32 output).

    Zero rows cannot be normalized; the error lists their indices.
    """
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"matrix must be two-dimensional, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValueError(f"cannot normalize zero rows at indices {zero.tolist()}")
    return (arr / norms[:, None]).astype(np.float32)


def synth_gaussian(n: int, d: int, seed: int) -> np.ndarray:
    """n unit-norm rows of iid Gaussian directions; deterministic per seed."""
    n = check_positive_int(n, "n")
    d = check_positive_int(d, "d")
    rng = np.random.default_rng(seed)
    return normalize_rows(rng.standard_normal((n, d)))


def synth_clustered(n: int, d: int, n_clusters: int, spread: float, seed: int) -> np.ndarray:
    """Unit-norm rows around n_clusters random unit centers.

    Points are assigned round-robin; each is the center plus a Gaussian
    perturbation of relative scale ``spread``, then renormalized. With
    spread=0 the output has exactly n_clusters distinct rows.
    """
    n = check_positive_int(n, "n")
    d = check_positive_int(d, "d")
    n_clusters = check_positive_int(n_clusters, "n_clusters")
    if n_clusters > n:
        raise ValueError(f"n_clusters={n_clusters} exceeds n={n}")
    if spread < 0:
        raise ValueError(f"spread must be nonnegative, got {spread}")
    rng = np.random.default_rng(seed)
    centers = normalize_rows(rng.standard_normal((n_clusters, d))).astype(np.float64)
    assignment = np.arange(n) % n_clusters
    noise = spread * rng.standard_normal((n, d)) / np.sqrt(d)
    return normalize_rows(centers[assignment] + noise)


def read_constraints(path, n: int | None = None) -> PairConstraints:
    """Parse a pair-constraints text file.

    Format: ``[similar]`` / ``[dissimilar]`` section headers, one ``i j``
    pair per line; blank lines and ``#`` comments are ignored.
    """
    sections = {"similar": [], "dissimilar": []}
    current = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip().lower()
                if name not in sections:
                    raise DataFileError(f"{path}:{lineno}: unknown section {line!r}")
                current = name
                continue
            if current is None:
                raise DataFileError(f"{path}:{lineno}: pair before any section header")
            parts = line.split()
            if len(parts) != 2:
                raise DataFileError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            try:
                pair = (int(parts[0]), int(parts[1]))
            except ValueError as exc:
                raise DataFileError(f"{path}:{lineno}: non-integer index in {line!r}") from exc
            sections[current].append(pair)
    try:
        constraints = PairConstraints(similar=sections["similar"],
                                      dissimilar=sections["dissimilar"])
        if n is not None:
            constraints.check_range(n)
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from exc
    return constraints


def write_constraints(path, constraints: PairConstraints) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("[similar]\n")
        for i, j in constraints.similar:
            fh.write(f"{i} {j}\n")
        fh.write("[dissimilar]\n")
        for i, j in constraints.dissimilar:
            fh.write(f"{i} {j}\n")
