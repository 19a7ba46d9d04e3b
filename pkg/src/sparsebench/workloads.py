"""Workload construction: synthetic generators and Matrix Market files.

Random matrices place exactly ``round(density * n^2)`` distinct entries,
sampled uniformly without replacement from a seeded PCG64 stream
(``numpy.random.default_rng``), so a (n, density, seed) triple reproduces the
same matrix on every platform.  Band matrices are fully determined by (n, k).
Files are read from local paths only; nothing here touches the network.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import SparseMatrix, build_matrix, from_arrays
from .errors import ConfigError, ParseError, UnsupportedFormatError


@dataclass(frozen=True)
class WorkloadSpec:
    """Declarative description of one input matrix."""

    kind: str                # "random" | "band" | "file"
    n: int = 0               # square dimension (random, band)
    density: float = 0.0     # fraction of non-zero cells (random)
    band_width: int = 0      # total band width k (band)
    seed: int = 0            # generator seed (random)
    path: str | None = None  # Matrix Market path (file)

    def __post_init__(self):
        if self.kind == "random":
            if self.n < 1:
                raise ConfigError("random workload needs n >= 1")
            if not 0.0 <= self.density <= 1.0:
                raise ConfigError(f"density must be in [0, 1], got {self.density}")
        elif self.kind == "band":
            if self.n < 1:
                raise ConfigError("band workload needs n >= 1")
            if not 1 <= self.band_width <= 2 * self.n - 1:
                raise ConfigError(
                    f"band width must be in [1, {2 * self.n - 1}], "
                    f"got {self.band_width}"
                )
        elif self.kind == "file":
            if not self.path:
                raise ConfigError("file workload needs a path")
        else:
            raise ConfigError(f"unknown workload kind {self.kind!r}")

    @property
    def matrix_id(self) -> str:
        if self.kind == "random":
            return f"random-n{self.n}-d{self.density:g}-s{self.seed}"
        if self.kind == "band":
            return f"band-n{self.n}-k{self.band_width}"
        return Path(self.path).stem


def build_workload(spec: WorkloadSpec) -> SparseMatrix:
    """Materialize the matrix a spec describes."""
    if spec.kind == "random":
        return gen_random(spec.n, spec.density, spec.seed)
    if spec.kind == "band":
        return gen_band(spec.n, spec.band_width)
    return read_matrix_market(spec.path)


def gen_random(n: int, density: float, seed: int) -> SparseMatrix:
    """Random n x n matrix with exactly ``round(density * n^2)`` entries.

    Cells are drawn uniformly without replacement by deduplicating a PCG64
    draw stream in first-occurrence order (the first k distinct values of an
    iid uniform stream are a uniform without-replacement sample).  Values are
    ``1 - random()`` so they lie in (0, 1] and are never dropped as zeros.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 0.0 <= density <= 1.0:
        raise ConfigError(f"density must be in [0, 1], got {density}")
    count = int(round(density * n * n))
    empty = np.empty(0)
    if count == 0:
        return from_arrays(n, n, empty, empty, empty)

    rng = np.random.default_rng(seed)
    population = n * n
    draws = np.empty(0, dtype=np.int64)
    while np.unique(draws).size < count:
        need = count - np.unique(draws).size
        draws = np.concatenate([draws, rng.integers(0, population, size=2 * need + 64)])
    _, first_pos = np.unique(draws, return_index=True)
    cells = draws[np.sort(first_pos)][:count]
    values = 1.0 - rng.random(count)
    return from_arrays(n, n, cells // n, cells % n, values)


def gen_band(n: int, k: int) -> SparseMatrix:
    """Band matrix: cell (i, j) is non-zero exactly when |i - j| <= k // 2.

    ``k = 1`` gives the pure diagonal matrix.  Values are 1 plus a tiny
    index-derived perturbation so accidental cancellation cannot mask
    multiplication bugs.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 1 <= k <= 2 * n - 1:
        raise ConfigError(f"band width must be in [1, {2 * n - 1}], got {k}")
    half = k // 2
    rows = []
    cols = []
    for d in range(-half, half + 1):
        i = np.arange(max(0, -d), n - max(0, d), dtype=np.int64)
        rows.append(i)
        cols.append(i + d)
    i = np.concatenate(rows)
    j = np.concatenate(cols)
    values = 1.0 + ((3 * i + 7 * j) % 11) / 1000.0
    return from_arrays(n, n, i, j, values)


_SUPPORTED_FIELDS = {"real", "integer", "pattern"}
_SUPPORTED_SYMMETRIES = {"general", "symmetric"}


def read_matrix_market(path) -> SparseMatrix:
    """Read a Matrix Market coordinate file.

    Supports the ``real``, ``integer`` and ``pattern`` fields with
    ``general`` or ``symmetric`` symmetry.  Symmetric inputs are expanded by
    mirroring every off-diagonal entry; duplicate coordinates (including any
    created by the expansion) are summed.  Indices are converted from the
    format's 1-based convention.

    Raises:
        UnsupportedFormatError: for any other banner qualifier, naming it.
        ParseError: for malformed content, with the 1-based line number.
    """
    path = Path(path)
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError(f"{path}: empty file", line=1)

    banner = lines[0].split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket":
        raise ParseError(f"{path}: malformed Matrix Market banner", line=1)
    obj, layout, field, symmetry = (t.lower() for t in banner[1:])
    if obj != "matrix":
        raise UnsupportedFormatError(f"unsupported Matrix Market object {obj!r}")
    if layout != "coordinate":
        raise UnsupportedFormatError(
            f"unsupported Matrix Market format {layout!r} (only 'coordinate')"
        )
    if field not in _SUPPORTED_FIELDS:
        raise UnsupportedFormatError(f"unsupported Matrix Market field {field!r}")
    if symmetry not in _SUPPORTED_SYMMETRIES:
        raise UnsupportedFormatError(
            f"unsupported Matrix Market symmetry {symmetry!r}"
        )

    dims = None
    declared = 0
    entries = []
    pattern = field == "pattern"
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        tokens = line.split()
        if dims is None:
            try:
                n_rows, n_cols, declared = (int(t) for t in tokens)
            except ValueError:
                raise ParseError(
                    f"{path}: expected 'rows cols nnz', got {line!r}", line=lineno
                ) from None
            if n_rows < 1 or n_cols < 1 or declared < 0:
                raise ParseError(f"{path}: bad dimensions {line!r}", line=lineno)
            dims = (n_rows, n_cols)
            continue
        expected = 2 if pattern else 3
        if len(tokens) != expected:
            raise ParseError(
                f"{path}: expected {expected} fields, got {line!r}", line=lineno
            )
        try:
            r = int(tokens[0])
            c = int(tokens[1])
            v = 1.0 if pattern else float(tokens[2])
        except ValueError:
            raise ParseError(f"{path}: bad entry {line!r}", line=lineno) from None
        if not (1 <= r <= dims[0] and 1 <= c <= dims[1]):
            raise ParseError(
                f"{path}: entry ({r}, {c}) outside {dims[0]}x{dims[1]}", line=lineno
            )
        if len(entries) >= declared:
            raise ParseError(
                f"{path}: more than the declared {declared} entries", line=lineno
            )
        entries.append((r - 1, c - 1, v))

    if dims is None:
        raise ParseError(f"{path}: missing size line", line=len(lines))
    if len(entries) != declared:
        raise ParseError(
            f"{path}: declared {declared} entries, found {len(entries)}",
            line=len(lines),
        )
    if symmetry == "symmetric":
        entries.extend((c, r, v) for r, c, v in list(entries) if r != c)
    return build_matrix(dims[0], dims[1], entries)


def write_matrix_market(matrix: SparseMatrix, path) -> None:
    """Write a matrix as 1-based 'coordinate real general' text.

    Values are printed with enough digits that a read round-trips exactly.
    """
    path = Path(path)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{matrix.n_rows} {matrix.n_cols} {matrix.nnz}\n")
        for r, c, v in zip(matrix.rows, matrix.cols, matrix.vals):
            fh.write(f"{int(r) + 1} {int(c) + 1} {float(v):.17g}\n")
