"""Boolean matrices, the charged query interface to A and B, and
uncharged ground-truth helpers.

Indices in the public API are 1-based (rows and columns run over 1..n).
Rows are stored as Python ints used as bitsets: bit ``j - 1`` of
``rows[i - 1]`` holds entry ``(i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class MatrixFormatError(ValueError):
    """Raised when a matrix text file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BooleanMatrix:
    """Square n x n matrix over the Boolean semiring with bitset rows."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows: Sequence[int] | None = None):
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        self.n = n
        if rows is None:
            self.rows = [0] * n
        else:
            if len(rows) != n:
                raise ValueError(f"expected {n} rows, got {len(rows)}")
            limit = 1 << n
            for r in rows:
                if r < 0 or r >= limit:
                    raise ValueError("row bitset has bits outside [1, n]")
            self.rows = list(rows)

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, n: int) -> "BooleanMatrix":
        return cls(n)

    @classmethod
    def ones(cls, n: int) -> "BooleanMatrix":
        return cls(n, [(1 << n) - 1] * n)

    @classmethod
    def identity(cls, n: int) -> "BooleanMatrix":
        return cls(n, [1 << i for i in range(n)])

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]]) -> "BooleanMatrix":
        n = len(data)
        rows = []
        for i, row in enumerate(data):
            if len(row) != n:
                raise ValueError(f"row {i + 1} has length {len(row)}, expected {n}")
            bits = 0
            for j, v in enumerate(row):
                if v not in (0, 1, True, False):
                    raise ValueError(f"entry ({i + 1},{j + 1}) is not 0/1: {v!r}")
                if v:
                    bits |= 1 << j
            rows.append(bits)
        return cls(n, rows)

    @classmethod
    def from_numpy(cls, arr: np.ndarray) -> "BooleanMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square 2-d array, got shape {arr.shape}")
        return cls.from_lists(arr.astype(bool).astype(int).tolist())

    def to_numpy(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            # little-endian bit order matches column order
            b = r.to_bytes((n + 7) // 8, "little")
            out[i] = np.unpackbits(np.frombuffer(b, dtype=np.uint8), bitorder="little")[:n]
        return out

    def to_lists(self) -> list[list[int]]:
        return self.to_numpy().tolist()

    def copy(self) -> "BooleanMatrix":
        return BooleanMatrix(self.n, self.rows)

    # access ------------------------------------------------------------

    def _check(self, i: int, j: int) -> None:
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise IndexError(f"index ({i},{j}) outside [1,{self.n}]^2")

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        self._check(i, j)
        return (self.rows[i - 1] >> (j - 1)) & 1

    def __setitem__(self, ij: tuple[int, int], value: int) -> None:
        i, j = ij
        self._check(i, j)
        if value:
            self.rows[i - 1] |= 1 << (j - 1)
        else:
            self.rows[i - 1] &= ~(1 << (j - 1))

    def row(self, i: int) -> int:
        """Bitset of row ``i``."""
        return self.rows[i - 1]

    def column(self, j: int) -> int:
        """Bitset of column ``j`` (bit ``i - 1`` is entry ``(i, j)``)."""
        shift = j - 1
        col = 0
        for i, r in enumerate(self.rows):
            if (r >> shift) & 1:
                col |= 1 << i
        return col

    def count_ones(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BooleanMatrix):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __le__(self, other: "BooleanMatrix") -> bool:
        """Entrywise order: every 1 of self is a 1 of other."""
        return self.n == other.n and all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def __repr__(self) -> str:
        return f"BooleanMatrix(n={self.n}, ones={self.count_ones()})"

    # text format -------------------------------------------------------

    def to_text(self) -> str:
        lines = [str(self.n)]
        for r in self.rows:
            lines.append("".join("1" if (r >> j) & 1 else "0" for j in range(self.n)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BooleanMatrix":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise MatrixFormatError("empty input", line=1)
        try:
            n = int(lines[0].strip())
        except ValueError:
            raise MatrixFormatError(f"expected the dimension, got {lines[0]!r}", line=1)
        if n < 1:
            raise MatrixFormatError(f"dimension must be positive, got {n}", line=1)
        if len(lines) - 1 > n:
            raise MatrixFormatError(f"unexpected extra row after {n} rows", line=n + 2)
        rows = []
        for idx, line in enumerate(lines[1:], start=2):
            line = line.rstrip("\r")
            if len(line) != n:
                raise MatrixFormatError(f"row has {len(line)} characters, expected {n}", line=idx)
            if set(line) - {"0", "1"}:
                raise MatrixFormatError("row contains characters other than 0/1", line=idx)
            # reversed so that column 1 lands on bit 0
            rows.append(int(line[::-1], 2))
        if len(rows) < n:
            raise MatrixFormatError(f"expected {n} matrix rows, found {len(rows)}",
                                    line=len(lines) + 1)
        return cls(n, rows)


def read_matrix(path) -> BooleanMatrix:
    with open(path) as fh:
        return BooleanMatrix.from_text(fh.read())


def write_matrix(path, M: BooleanMatrix) -> None:
    with open(path, "w") as fh:
        fh.write(M.to_text())


@dataclass
class QueryLedger:
    """Monotone counters of charged reads of A and B.

    ``trace`` collects labelled snapshots recorded through :meth:`mark`.
    """

    count_A: int = 0
    count_B: int = 0
    charge_enabled: bool = True
    trace: list[tuple[str, int, int]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.count_A + self.count_B

    def snapshot(self) -> tuple[int, int]:
        return self.count_A, self.count_B

    def charge(self, a: int = 0, b: int = 0) -> None:
        """Bulk charge ``a`` reads of A and ``b`` reads of B."""
        if a < 0 or b < 0:
            raise ValueError("charges must be non-negative")
        if self.charge_enabled:
            self.count_A += a
            self.count_B += b

    def mark(self, label: str) -> None:
        self.trace.append((label, self.count_A, self.count_B))


def read_A(ledger: QueryLedger, A: BooleanMatrix, i: int, j: int) -> int:
    """One query to the oracle for A: returns ``A[i, j]``."""
    bit = A[i, j]
    if ledger.charge_enabled:
        ledger.count_A += 1
    return bit


def read_B(ledger: QueryLedger, B: BooleanMatrix, k: int, j: int) -> int:
    """One query to the oracle for B: returns ``B[k, j]``."""
    bit = B[k, j]
    if ledger.charge_enabled:
        ledger.count_B += 1
    return bit


def brute_force_product(A: BooleanMatrix, B: BooleanMatrix) -> BooleanMatrix:
    """Ground-truth Boolean product, charging no queries.

    Evaluates ``C[i, j] = OR_k A[i, k] AND B[k, j]`` as an integer
    sum-of-products over all (i, j, k) and thresholds at 1.
    """
    if A.n != B.n:
        raise ValueError(f"dimension mismatch: {A.n} vs {B.n}")
    a = A.to_numpy().astype(np.int64)
    b = B.to_numpy().astype(np.int64)
    return BooleanMatrix.from_numpy(a @ b > 0)


def count_ones(M: BooleanMatrix) -> int:
    return M.count_ones()


def iter_bits(x: int) -> Iterable[int]:
    """Yield 1-based positions of set bits of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length()
        x ^= low


def bits_of(indices: Iterable[int]) -> int:
    """Inverse of :func:`iter_bits`."""
    out = 0
    for i in indices:
        out |= 1 << (i - 1)
    return out
