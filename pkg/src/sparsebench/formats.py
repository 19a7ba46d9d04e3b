"""Per-tile compression codecs with byte-accounted stream layouts.

Each format encodes one dense tile into an :class:`EncodedPartition` holding
one :class:`NamedArray` per stream.  Streams model independent memory
channels: byte totals drive the memory-latency model, and the
``payload``/``metadata`` role split drives bandwidth-utilization accounting
(useful bytes are always ``nnz * value_width_bytes``, the non-zero values
themselves).

Stream layouts (``size`` is the tile edge length):

* ``DENSE``   -- ``values[size^2]`` row-major.
* ``CSR``     -- ``offsets[size]`` per-row non-zero counts, ``indices[nnz]``
  column indices in row-major order, ``values[nnz]``.
* ``CSC``     -- the CSR layout mirrored over columns: per-column counts, row
  indices in column-major order, values.
* ``BCSR``    -- ``offsets[size/b]`` non-zero block counts per block-row,
  ``indices[n_blocks]`` holding each block's first column index, and
  ``values[n_blocks*b*b]`` with every block flattened row-major (zeros inside
  a non-zero block are stored).
* ``COO``     -- one interleaved ``tuples[3*nnz]`` stream of (row, col, value)
  records in row-major order.  A DOK source reduces to the same stream, so
  ``FormatId.parse`` accepts ``"dok"`` as an alias.
* ``LIL``     -- one ``records`` stream: for every non-zero row a record of
  ``[row_index, v0 .. v(size-1)]``, then one terminator record of the same
  shape with row index ``size`` and zero values.
* ``ELL``     -- ``values[size*W]`` and ``indices[size*W]`` stored
  column-major, where ``W = max(ell_min_width, longest row nnz)``; rows are
  packed left and padded with value 0.0 / index 0.
* ``DIA``     -- one ``diags`` stream: for each diagonal ``d`` in
  ``[-(size-1), size-1]`` holding at least one non-zero, a record of the
  header element ``d`` followed by the ``size - |d|`` diagonal values in
  increasing row order (zeros on a stored diagonal are stored).

Record streams that interleave index and value fields (COO, LIL, DIA) use
``max(value_width_bytes, index_width_bytes)`` as their element width, since a
stream of heterogeneous records is carried at its widest field.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import ceil

import numpy as np

from .core import Partition
from .errors import ConfigError, CorruptEncodingError, UnsupportedFormatError

PAYLOAD = "payload"
METADATA = "metadata"


class FormatId(Enum):
    """The supported per-tile compression formats."""

    DENSE = "dense"
    CSR = "csr"
    CSC = "csc"
    BCSR = "bcsr"
    COO = "coo"
    LIL = "lil"
    ELL = "ell"
    DIA = "dia"

    @classmethod
    def parse(cls, name: str) -> "FormatId":
        """Resolve a case-insensitive format name; ``dok`` aliases to COO."""
        key = str(name).strip().lower()
        if key == "dok":
            return cls.COO
        for fmt in cls:
            if fmt.value == key:
                return fmt
        raise UnsupportedFormatError(f"unknown format {name!r}")


@dataclass(frozen=True)
class FormatParams:
    """Width and shape knobs shared by all encoders."""

    value_width_bytes: int = 4  # modeled width of one stored value
    index_width_bytes: int = 4  # modeled width of one index/offset element
    bcsr_block: int = 4         # BCSR block edge length; must divide the tile size
    ell_min_width: int = 6      # ELL row capacity floor

    def __post_init__(self):
        for field_name in (
            "value_width_bytes",
            "index_width_bytes",
            "bcsr_block",
            "ell_min_width",
        ):
            if int(getattr(self, field_name)) < 1:
                raise ConfigError(f"{field_name} must be >= 1")

    @property
    def record_width_bytes(self) -> int:
        """Element width of streams that interleave indices and values."""
        return max(self.value_width_bytes, self.index_width_bytes)


@dataclass(frozen=True, eq=False)
class NamedArray:
    """One independent memory stream of an encoding."""

    name: str
    data: np.ndarray
    element_width_bytes: int
    role: str

    @property
    def element_count(self) -> int:
        return int(self.data.size)

    @property
    def nbytes(self) -> int:
        return self.element_count * self.element_width_bytes


@dataclass(frozen=True, eq=False)
class EncodedPartition:
    """A tile encoded in one format, plus the counts the cost model needs."""

    format: FormatId
    size: int
    grid_row: int
    grid_col: int
    params: FormatParams
    arrays: tuple[NamedArray, ...]
    nnz: int
    nnz_rows: int
    ell_width: int = 0  # realized ELL row capacity; 0 for other formats

    def array(self, name: str) -> NamedArray:
        for arr in self.arrays:
            if arr.name == name:
                return arr
        raise KeyError(name)

    @property
    def total_bytes(self) -> int:
        return sum(a.nbytes for a in self.arrays)

    @property
    def useful_bytes(self) -> int:
        """Bytes of actual non-zero values carried by the encoding."""
        return self.nnz * self.params.value_width_bytes


# ---------------------------------------------------------------------------
# encoders
# ---------------------------------------------------------------------------


def _encode_dense(tile, params):
    values = tile.values.ravel().astype(np.float64)
    return [NamedArray("values", values, params.value_width_bytes, PAYLOAD)], 0


def _encode_csr(tile, params):
    counts = np.count_nonzero(tile.values, axis=1).astype(np.int64)
    rr, cc = np.nonzero(tile.values)
    return [
        NamedArray("offsets", counts, params.index_width_bytes, METADATA),
        NamedArray("indices", cc.astype(np.int64), params.index_width_bytes, METADATA),
        NamedArray("values", tile.values[rr, cc], params.value_width_bytes, PAYLOAD),
    ], 0


def _encode_csc(tile, params):
    transposed = tile.values.T
    counts = np.count_nonzero(transposed, axis=1).astype(np.int64)
    col_walk, row_idx = np.nonzero(transposed)
    return [
        NamedArray("offsets", counts, params.index_width_bytes, METADATA),
        NamedArray(
            "indices", row_idx.astype(np.int64), params.index_width_bytes, METADATA
        ),
        NamedArray(
            "values", transposed[col_walk, row_idx], params.value_width_bytes, PAYLOAD
        ),
    ], 0


def _encode_bcsr(tile, params):
    block = params.bcsr_block
    if tile.size % block != 0:
        raise ConfigError(
            f"bcsr_block {block} does not divide partition size {tile.size}"
        )
    nb = tile.size // block
    blocks = tile.values.reshape(nb, block, nb, block).swapaxes(1, 2)
    block_mask = blocks.reshape(nb, nb, -1).any(axis=2)
    counts = block_mask.sum(axis=1).astype(np.int64)
    bi, bj = np.nonzero(block_mask)
    return [
        NamedArray("offsets", counts, params.index_width_bytes, METADATA),
        NamedArray(
            "indices",
            (bj * block).astype(np.int64),
            params.index_width_bytes,
            METADATA,
        ),
        NamedArray(
            "values",
            blocks[bi, bj].reshape(-1).astype(np.float64),
            params.value_width_bytes,
            PAYLOAD,
        ),
    ], 0


def _encode_coo(tile, params):
    rr, cc = np.nonzero(tile.values)
    stream = np.empty(3 * rr.size, dtype=np.float64)
    stream[0::3] = rr
    stream[1::3] = cc
    stream[2::3] = tile.values[rr, cc]
    return [NamedArray("tuples", stream, params.record_width_bytes, PAYLOAD)], 0


def _encode_lil(tile, params):
    size = tile.size
    nz_rows = np.flatnonzero(tile.values.any(axis=1))
    records = np.zeros((nz_rows.size + 1, size + 1), dtype=np.float64)
    records[:-1, 0] = nz_rows
    records[:-1, 1:] = tile.values[nz_rows]
    records[-1, 0] = size  # terminator record: sentinel row index, zero values
    return [
        NamedArray("records", records.ravel(), params.record_width_bytes, PAYLOAD)
    ], 0


def _encode_ell(tile, params):
    size = tile.size
    counts = np.count_nonzero(tile.values, axis=1)
    width = max(params.ell_min_width, int(counts.max()))
    vals = np.zeros((size, width), dtype=np.float64)
    idxs = np.zeros((size, width), dtype=np.int64)
    for r in range(size):
        cols = np.flatnonzero(tile.values[r])
        vals[r, : cols.size] = tile.values[r, cols]
        idxs[r, : cols.size] = cols
    return [
        NamedArray("values", vals.ravel(order="F"), params.value_width_bytes, PAYLOAD),
        NamedArray("indices", idxs.ravel(order="F"), params.index_width_bytes, METADATA),
    ], width


def _encode_dia(tile, params):
    size = tile.size
    chunks = []
    for d in range(-(size - 1), size):
        diag = np.diagonal(tile.values, offset=d)
        if diag.any():
            chunks.append(np.concatenate(([float(d)], diag)))
    stream = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.float64)
    return [NamedArray("diags", stream, params.record_width_bytes, PAYLOAD)], 0


_ENCODERS = {
    FormatId.DENSE: _encode_dense,
    FormatId.CSR: _encode_csr,
    FormatId.CSC: _encode_csc,
    FormatId.BCSR: _encode_bcsr,
    FormatId.COO: _encode_coo,
    FormatId.LIL: _encode_lil,
    FormatId.ELL: _encode_ell,
    FormatId.DIA: _encode_dia,
}


def encode(
    tile: Partition, fmt: FormatId, params: FormatParams | None = None
) -> EncodedPartition:
    """Encode one dense tile in the given format.

    Args:
        tile: the dense partition to compress.  An all-zero tile is legal and
            encodes to empty payload streams.
        fmt: target format.
        params: width/shape knobs; defaults to :class:`FormatParams`.

    Returns:
        The encoded partition; ``decode(encode(tile)) == tile`` exactly.
    """
    params = params or FormatParams()
    arrays, ell_width = _ENCODERS[fmt](tile, params)
    return EncodedPartition(
        format=fmt,
        size=tile.size,
        grid_row=tile.grid_row,
        grid_col=tile.grid_col,
        params=params,
        arrays=tuple(arrays),
        nnz=tile.nnz,
        nnz_rows=tile.nnz_rows,
        ell_width=ell_width,
    )


# ---------------------------------------------------------------------------
# decoders
# ---------------------------------------------------------------------------


def _corrupt(array_name: str, reason: str):
    raise CorruptEncodingError(f"array {array_name!r}: {reason}")


def _int_checked(data, array_name, low, high):
    as_int = data.astype(np.int64)
    if data.dtype.kind == "f" and not np.array_equal(as_int, data):
        _corrupt(array_name, "non-integral index element")
    if as_int.size and (as_int.min() < low or as_int.max() >= high):
        _corrupt(array_name, f"index outside [{low}, {high})")
    return as_int


def _decode_dense(enc, out):
    values = enc.array("values").data
    if values.size != enc.size * enc.size:
        _corrupt("values", f"expected {enc.size * enc.size} elements, got {values.size}")
    out[:] = values.reshape(enc.size, enc.size)


def _decode_compressed_rows(enc, out, by_columns: bool):
    counts = _int_checked(enc.array("offsets").data, "offsets", 0, enc.size + 1)
    if counts.size != enc.size:
        _corrupt("offsets", f"expected {enc.size} counts, got {counts.size}")
    indices = enc.array("indices").data
    values = enc.array("values").data
    total = int(counts.sum())
    if indices.size != total:
        _corrupt("indices", f"expected {total} elements, got {indices.size}")
    if values.size != total:
        _corrupt("values", f"expected {total} elements, got {values.size}")
    indices = _int_checked(indices, "indices", 0, enc.size)
    major = np.repeat(np.arange(enc.size), counts)
    if by_columns:
        out[indices, major] = values
    else:
        out[major, indices] = values


def _decode_bcsr(enc, out):
    block = enc.params.bcsr_block
    nb = enc.size // block
    counts = _int_checked(enc.array("offsets").data, "offsets", 0, nb + 1)
    if counts.size != nb:
        _corrupt("offsets", f"expected {nb} counts, got {counts.size}")
    indices = enc.array("indices").data
    values = enc.array("values").data
    n_blocks = int(counts.sum())
    if indices.size != n_blocks:
        _corrupt("indices", f"expected {n_blocks} elements, got {indices.size}")
    if values.size != n_blocks * block * block:
        _corrupt(
            "values",
            f"expected {n_blocks * block * block} elements, got {values.size}",
        )
    indices = _int_checked(indices, "indices", 0, enc.size)
    if np.any(indices % block):
        _corrupt("indices", "block column index not aligned to the block size")
    block_rows = np.repeat(np.arange(nb), counts)
    cells = values.reshape(-1, block, block)
    for k in range(n_blocks):
        r0 = int(block_rows[k]) * block
        c0 = int(indices[k])
        out[r0 : r0 + block, c0 : c0 + block] = cells[k]


def _decode_coo(enc, out):
    stream = enc.array("tuples").data
    if stream.size % 3:
        _corrupt("tuples", f"length {stream.size} is not a multiple of 3")
    rows = _int_checked(stream[0::3], "tuples", 0, enc.size)
    cols = _int_checked(stream[1::3], "tuples", 0, enc.size)
    out[rows, cols] = stream[2::3]


def _decode_lil(enc, out):
    size = enc.size
    stream = enc.array("records").data
    if stream.size == 0 or stream.size % (size + 1):
        _corrupt("records", f"length {stream.size} is not a multiple of {size + 1}")
    records = stream.reshape(-1, size + 1)
    headers = _int_checked(records[:, 0], "records", 0, size + 1)
    if headers[-1] != size:
        _corrupt("records", f"missing terminator record (last header {headers[-1]})")
    if np.any(records[-1, 1:]):
        _corrupt("records", "terminator record carries non-zero values")
    if headers.size > 1 and headers[:-1].max() >= size:
        _corrupt("records", "row index out of range before the terminator")
    out[headers[:-1]] = records[:-1, 1:]


def _decode_ell(enc, out):
    size = enc.size
    values = enc.array("values").data
    indices = enc.array("indices").data
    if values.size != indices.size:
        _corrupt("indices", f"expected {values.size} elements, got {indices.size}")
    if values.size % size:
        _corrupt("values", f"length {values.size} is not a multiple of {size}")
    width = values.size // size
    if width != enc.ell_width:
        _corrupt("values", f"width {width} disagrees with ell_width {enc.ell_width}")
    vals = values.reshape(size, width, order="F")
    idxs = _int_checked(indices, "indices", 0, size).reshape(size, width, order="F")
    for r in range(size):
        # Valid entries are the prefix with non-zero values; padding is exactly
        # 0.0 and genuine stored values are never exactly zero.
        valid = int(np.argmin(vals[r] != 0.0)) if not vals[r].all() else width
        out[r, idxs[r, :valid]] = vals[r, :valid]


def _decode_dia(enc, out):
    size = enc.size
    for d, diag in _walk_diagonals(enc):
        rows = np.arange(0, size - d) if d >= 0 else np.arange(-d, size)
        out[rows, rows + d] = diag


_DECODERS = {
    FormatId.DENSE: _decode_dense,
    FormatId.CSR: lambda enc, out: _decode_compressed_rows(enc, out, by_columns=False),
    FormatId.CSC: lambda enc, out: _decode_compressed_rows(enc, out, by_columns=True),
    FormatId.BCSR: _decode_bcsr,
    FormatId.COO: _decode_coo,
    FormatId.LIL: _decode_lil,
    FormatId.ELL: _decode_ell,
    FormatId.DIA: _decode_dia,
}


def decode(enc: EncodedPartition) -> Partition:
    """Reconstruct the source tile exactly.

    Raises:
        CorruptEncodingError: if the streams are inconsistent (length
            mismatches, out-of-range indices, missing terminator, ...),
            naming the offending array.
    """
    out = np.zeros((enc.size, enc.size), dtype=np.float64)
    _DECODERS[enc.format](enc, out)
    return Partition(enc.grid_row, enc.grid_col, enc.size, out)


def _walk_diagonals(enc):
    """Yield (offset, values) records of a DIA stream, validating structure."""
    size = enc.size
    stream = enc.array("diags").data
    pos = 0
    while pos < stream.size:
        header = stream[pos]
        d = int(header)
        if header != d or not -size < d < size:
            _corrupt("diags", f"bad diagonal header {header!r} at offset {pos}")
        length = size - abs(d)
        if pos + 1 + length > stream.size:
            _corrupt("diags", f"truncated diagonal record at offset {pos}")
        yield d, stream[pos + 1 : pos + 1 + length]
        pos += 1 + length


def stored_diagonals(enc: EncodedPartition) -> list[int]:
    """Diagonal offsets present in a DIA encoding, in stream order."""
    return [d for d, _ in _walk_diagonals(enc)]


def emitted_row_indices(enc: EncodedPartition) -> np.ndarray:
    """Row indices the streaming decoder hands to the dot-product stage.

    CSR, CSC, COO and LIL emit exactly the non-zero rows; BCSR emits every
    row of each non-zero block-row; DIA emits every row intersecting at
    least one stored diagonal; ELL and DENSE emit all rows (their decoders
    cannot skip the all-zero ones).
    """
    fmt, size = enc.format, enc.size
    if fmt in (FormatId.DENSE, FormatId.ELL):
        return np.arange(size, dtype=np.int64)
    if fmt is FormatId.CSR:
        return np.flatnonzero(enc.array("offsets").data > 0).astype(np.int64)
    if fmt is FormatId.CSC:
        return np.unique(enc.array("indices").data.astype(np.int64))
    if fmt is FormatId.COO:
        return np.unique(enc.array("tuples").data[0::3].astype(np.int64))
    if fmt is FormatId.LIL:
        headers = enc.array("records").data.reshape(-1, size + 1)[:-1, 0]
        return headers.astype(np.int64)
    if fmt is FormatId.BCSR:
        block = enc.params.bcsr_block
        nz_block_rows = np.flatnonzero(enc.array("offsets").data > 0)
        return (
            nz_block_rows[:, None] * block + np.arange(block)
        ).ravel().astype(np.int64)
    if fmt is FormatId.DIA:
        touched = np.zeros(size, dtype=bool)
        for d in stored_diagonals(enc):
            if d >= 0:
                touched[: size - d] = True
            else:
                touched[-d:] = True
        return np.flatnonzero(touched).astype(np.int64)
    raise UnsupportedFormatError(str(fmt))


def emitted_row_count(enc: EncodedPartition) -> int:
    """Cheap count of the rows :func:`emitted_row_indices` would return."""
    fmt = enc.format
    if fmt in (FormatId.DENSE, FormatId.ELL):
        return enc.size
    if fmt in (FormatId.CSR, FormatId.CSC, FormatId.COO, FormatId.LIL):
        return enc.nnz_rows
    if fmt is FormatId.BCSR:
        block = enc.params.bcsr_block
        return int(np.count_nonzero(enc.array("offsets").data)) * block
    return int(emitted_row_indices(enc).size)


def decode_rows(enc: EncodedPartition) -> list[tuple[int, np.ndarray]]:
    """Stream the encoding as (row_index, dense row) pairs, in row order.

    The union of the emitted rows with implicit all-zero rows reconstructs
    exactly what :func:`decode` returns.
    """
    tile = decode(enc)
    return [(int(r), tile.values[r]) for r in emitted_row_indices(enc)]


def worst_case_lengths(
    size: int, fmt: FormatId, params: FormatParams | None = None
) -> dict[str, int]:
    """Per-stream maximum element counts for buffer sizing at a tile size."""
    params = params or FormatParams()
    if fmt is FormatId.DENSE:
        return {"values": size * size}
    if fmt in (FormatId.CSR, FormatId.CSC):
        return {"offsets": size, "indices": size * size, "values": size * size}
    if fmt is FormatId.BCSR:
        nb = ceil(size / params.bcsr_block)
        return {"offsets": nb, "indices": nb * nb, "values": size * size}
    if fmt is FormatId.COO:
        return {"tuples": 3 * size * size}
    if fmt is FormatId.LIL:
        return {"records": (size + 1) * (size + 1)}
    if fmt is FormatId.ELL:
        width = max(params.ell_min_width, size)
        return {"values": size * width, "indices": size * width}
    if fmt is FormatId.DIA:
        return {"diags": (2 * size - 1) * (size + 1)}
    raise UnsupportedFormatError(str(fmt))


def dump_encoding(enc: EncodedPartition) -> str:
    """Structured-text dump of an encoding for fixture diffing.

    One header line, then per stream a descriptor line and hex lines with one
    word per element.  Integer streams are rendered little-endian at their
    modeled width; value-carrying streams are rendered as IEEE floats at the
    value width when it is 4 or 8 bytes, else as 8-byte floats.
    """
    lines = [
        f"format={enc.format.value} size={enc.size} "
        f"grid=({enc.grid_row},{enc.grid_col}) nnz={enc.nnz} nnz_rows={enc.nnz_rows}"
    ]
    for arr in enc.arrays:
        lines.append(
            f"{arr.name} role={arr.role} count={arr.element_count} "
            f"width={arr.element_width_bytes}"
        )
        if arr.data.dtype.kind == "i":
            width = arr.element_width_bytes
            mask = (1 << (8 * width)) - 1
            words = [
                (int(v) & mask).to_bytes(width, "little").hex() for v in arr.data
            ]
        else:
            dtype = np.float32 if arr.element_width_bytes == 4 else np.float64
            words = [np.asarray(v, dtype=dtype).tobytes().hex() for v in arr.data]
        for start in range(0, len(words), 8):
            lines.append("  " + " ".join(words[start : start + 8]))
    return "\n".join(lines)
