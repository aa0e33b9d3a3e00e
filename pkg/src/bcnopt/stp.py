"""Canonical vectors, logical matrices and the semi-tensor product.

Boolean values are identified with canonical vectors as ``0 ~ delta_2^1`` and
``1 ~ delta_2^2``.  Combined with the product rule

    delta_p^i |x| delta_q^j = delta_{pq}^{(i-1)q + j}

this makes the *first* variable of a product the most significant bit: the
bit vector ``(b_1, ..., b_n)`` maps to ``delta_{2^n}^{1 + sum_j b_j 2^(n-j)}``.
Note that much of the STP literature uses the opposite identification
(``1 ~ delta_2^1``); indices produced here are not interchangeable with it.

All indices exposed by this module are 1-based, matching the delta notation.
Logical matrices are stored as one integer per column and never densified
outside of :meth:`LogicalMatrix.to_dense`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

__all__ = [
    "CanonicalVector",
    "LogicalMatrix",
    "delta",
    "encode_state",
    "decode_state",
    "stp_canonical",
    "stp_logical",
]


@dataclass(frozen=True)
class CanonicalVector:
    """The vector ``delta_dim^index`` (column ``index`` of ``I_dim``)."""

    dim: int
    index: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if not 1 <= self.index <= self.dim:
            raise ValueError(f"index {self.index} outside [1, {self.dim}]")

    def to_dense(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=int)
        v[self.index - 1] = 1
        return v

    def __repr__(self):
        return f"delta({self.dim}, {self.index})"


def delta(dim: int, index: int) -> CanonicalVector:
    """Shorthand constructor for ``delta_dim^index``."""
    return CanonicalVector(dim, index)


def encode_state(bits: Sequence[int | bool]) -> CanonicalVector:
    """Map a Boolean vector to its canonical vector ``x_1 |x| ... |x| x_n``.

    >>> encode_state([0, 0, 0, 0, 0, 1, 0, 0, 1])
    delta(512, 10)
    """
    n = len(bits)
    if n == 0:
        raise ValueError("cannot encode an empty bit sequence")
    index = 0
    for b in bits:
        index = (index << 1) | (1 if b else 0)
    return CanonicalVector(1 << n, index + 1)


def decode_state(v: CanonicalVector, n: int) -> tuple[int, ...]:
    """Inverse of :func:`encode_state` for a vector of dimension ``2**n``."""
    if n < 1 or v.dim != 1 << n:
        raise ValueError(f"vector of dimension {v.dim} does not encode {n} bits")
    k = v.index - 1
    return tuple((k >> (n - 1 - j)) & 1 for j in range(n))


def stp_canonical(a: CanonicalVector, b: CanonicalVector) -> CanonicalVector:
    return CanonicalVector(a.dim * b.dim, (a.index - 1) * b.dim + b.index)


class LogicalMatrix:
    """An ``rows x cols`` matrix whose every column is a canonical vector.

    Parameters
    ----------
    rows : int
        Number of rows ``n``.
    indices : sequence of int
        ``indices[j]`` is the 1-based row of the unit entry of column ``j+1``,
        i.e. ``Col_{j+1} = delta_rows^{indices[j]}``.

    The column-index array is read-only; instances are hashable by value.
    """

    __slots__ = ("rows", "indices")

    def __init__(self, rows: int, indices: Iterable[int]):
        if not hasattr(indices, "__len__"):
            indices = list(indices)
        idx = np.array(indices, dtype=np.int64)
        if rows < 1:
            raise ValueError(f"rows must be positive, got {rows}")
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("a logical matrix needs at least one column")
        if idx.min() < 1 or idx.max() > rows:
            raise ValueError(f"column indices must lie in [1, {rows}]")
        idx.setflags(write=False)
        object.__setattr__(self, "rows", int(rows))
        object.__setattr__(self, "indices", idx)

    def __setattr__(self, name, value):
        raise AttributeError("LogicalMatrix is immutable")

    @property
    def cols(self) -> int:
        return int(self.indices.size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @classmethod
    def identity(cls, n: int) -> "LogicalMatrix":
        return cls(n, np.arange(1, n + 1))

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "LogicalMatrix":
        dense = np.asarray(dense)
        if not (np.all(dense.sum(axis=0) == 1) and np.all((dense == 0) | (dense == 1))):
            raise ValueError("matrix is not logical")
        return cls(dense.shape[0], dense.argmax(axis=0) + 1)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=int)
        out[self.indices - 1, np.arange(self.cols)] = 1
        return out

    def column(self, j: int) -> CanonicalVector:
        """``Col_j`` as a canonical vector (``j`` is 1-based)."""
        return CanonicalVector(self.rows, int(self.indices[j - 1]))

    def __matmul__(self, other):
        if isinstance(other, CanonicalVector):
            if other.dim != self.cols:
                raise DimensionError(f"cannot apply {self.shape} matrix to delta_{other.dim}")
            return self.column(other.index)
        if isinstance(other, LogicalMatrix):
            if other.rows != self.cols:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            return LogicalMatrix(self.rows, self.indices[other.indices - 1])
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, LogicalMatrix):
            return NotImplemented
        return self.rows == other.rows and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.rows, self.indices.tobytes()))

    def __repr__(self):
        if self.cols <= 16:
            body = ",".join(map(str, self.indices.tolist()))
        else:
            body = ",".join(map(str, self.indices[:8].tolist())) + ",..."
        return f"LogicalMatrix(delta_{self.rows}[{body}], cols={self.cols})"


def stp_logical(a: LogicalMatrix, b: LogicalMatrix) -> LogicalMatrix:
    """Semi-tensor product ``A |x| B = (A (x) I_{s/n})(B (x) I_{s/p})``.

    Computed on column indices only.  With ``A`` of shape ``m x n``, ``B`` of
    shape ``p x q`` and ``s = lcm(n, p)``, column ``c`` of the result is the
    column of ``A (x) I_{s/n}`` selected by column ``c`` of ``B (x) I_{s/p}``.
    Any pair of logical matrices is compatible; the ``lcm`` padding covers
    both the ``n | p`` and ``p | n`` cases.
    """
    if not (isinstance(a, LogicalMatrix) and isinstance(b, LogicalMatrix)):
        raise DimensionError("stp_logical expects two LogicalMatrix operands")
    n, p = a.cols, b.rows
    s = lcm(n, p)
    ka, kb = s // n, s // p
    # column c (0-based) of B (x) I_kb is delta_s at row (b_l - 1) * kb + r
    c = np.arange(b.cols * kb)
    row_b = (b.indices[c // kb] - 1) * kb + c % kb
    # row_b selects column row_b of A (x) I_ka
    out = (a.indices[row_b // ka] - 1) * ka + row_b % ka + 1
    return LogicalMatrix(a.rows * ka, out)
