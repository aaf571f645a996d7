"""GF(2) linear algebra on bit-packed vectors.

Vectors of length ``n <= 63`` are packed into ``int64`` words (bit ``i`` is
entry ``i``). A matrix is handled as an array of packed column words, which
is the natural layout here: the columns are x-vectors of Pauli strings.
Elimination keeps an XOR basis indexed by leading bit, so reducing a vector
is ``O(n)`` word operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import kernel

MAX_BITS = 63


class SingularMatrixError(ValueError):
    """Matrix is not invertible over GF(2), or inputs are dependent."""


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Dense ``rows x cols`` 0/1 matrix."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise ValueError(f"BitMatrix needs a non-empty 2-D array, got shape {b.shape}")
        if np.any(b > 1):
            raise ValueError("BitMatrix entries must be 0 or 1")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_columns(cls, words, n: int) -> "BitMatrix":
        words = np.asarray(words, dtype=np.int64)
        out = ((words[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1).astype(np.uint8)
        return cls(out)

    def column_words(self) -> np.ndarray:
        if self.rows > MAX_BITS:
            raise ValueError(f"packed form supports at most {MAX_BITS} rows")
        weights = np.left_shift(np.int64(1), np.arange(self.rows, dtype=np.int64))
        return (self.bits.astype(np.int64) * weights[:, None]).sum(axis=0).astype(np.int64)

    def row_words(self) -> np.ndarray:
        return BitMatrix(self.bits.T).column_words()

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix(self.bits.T)

    def __matmul__(self, other):
        if isinstance(other, BitMatrix):
            return BitMatrix((self.bits.astype(np.int64) @ other.bits.astype(np.int64)) % 2)
        v = np.asarray(other, dtype=np.int64)
        return ((self.bits.astype(np.int64) @ v) % 2).astype(np.uint8)

    def apply_word(self, x: int) -> int:
        """``M x`` for a packed vector ``x`` (requires a square-or-tall packed matrix)."""
        return int(apply_columns(self.column_words(), np.int64(x)))

    def __eq__(self, other) -> bool:
        return isinstance(other, BitMatrix) and self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))

    def __repr__(self) -> str:
        rows = ["".join(map(str, r)) for r in self.bits.tolist()]
        return f"BitMatrix({rows})"


# ---------------------------------------------------------------------------
# kernels (int64 words, n <= 63)


@kernel
def _leading_bit(v):
    b = -1
    while v:
        v >>= 1
        b += 1
    return b


@kernel
def _reduce(v, basis):
    # basis[b] is zero or a vector whose leading bit is b
    b = 62
    while v and b >= 0:
        if (v >> b) & 1 and basis[b]:
            v ^= basis[b]
        b -= 1
    return v


@kernel
def _rank_kernel(cols):
    basis = np.zeros(64, dtype=np.int64)
    r = 0
    for i in range(cols.shape[0]):
        v = _reduce(cols[i], basis)
        if v:
            basis[_leading_bit(v)] = v
            r += 1
    return r


@kernel
def _select_kernel(cols, order, limit):
    basis = np.zeros(64, dtype=np.int64)
    out = np.empty(min(limit, order.shape[0]), dtype=np.int64)
    m = 0
    for t in range(order.shape[0]):
        if m >= limit:
            break
        j = order[t]
        v = _reduce(cols[j], basis)
        if v:
            basis[_leading_bit(v)] = v
            out[m] = j
            m += 1
    return out[:m]


@kernel
def _span_basis(cols):
    """XOR basis of ``cols`` with combination tracking.

    Returns ``(basis, combo, ok)``: ``combo[b]`` has bit ``i`` set when column
    ``i`` is part of ``basis[b]``; ``ok`` is False if the columns are dependent.
    """
    basis = np.zeros(64, dtype=np.int64)
    combo = np.zeros(64, dtype=np.int64)
    ok = True
    for i in range(cols.shape[0]):
        v = cols[i]
        c = np.int64(1) << i
        b = 62
        while v and b >= 0:
            if (v >> b) & 1 and basis[b]:
                v ^= basis[b]
                c ^= combo[b]
            b -= 1
        if v:
            lb = _leading_bit(v)
            basis[lb] = v
            combo[lb] = c
        else:
            ok = False
    return basis, combo, ok


@kernel
def _coords(v, basis, combo):
    c = np.int64(0)
    b = 62
    while v and b >= 0:
        if (v >> b) & 1 and basis[b]:
            v ^= basis[b]
            c ^= combo[b]
        b -= 1
    if v:
        return np.int64(-1)
    return c


@kernel
def apply_columns(mcols, x):
    """``M x`` where ``mcols`` are the packed columns of ``M``."""
    out = np.int64(0)
    j = 0
    while x:
        if x & 1:
            out ^= mcols[j]
        x >>= 1
        j += 1
    return out


@kernel
def _invert_kernel(cols, n):
    basis, combo, ok = _span_basis(cols)
    out = np.zeros(n, dtype=np.int64)
    if not ok:
        return out, False
    for j in range(n):
        c = _coords(np.int64(1) << j, basis, combo)
        if c < 0:
            return out, False
        out[j] = c
    return out, True


@kernel
def _complete_basis(cols, n):
    """Extend independent ``cols`` with unit vectors (ascending) to ``n`` columns."""
    basis = np.zeros(64, dtype=np.int64)
    full = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(cols.shape[0]):
        v = _reduce(cols[i], basis)
        if v == 0:
            return full, False
        basis[_leading_bit(v)] = v
        full[m] = cols[i]
        m += 1
    for j in range(n):
        if m >= n:
            break
        e = np.int64(1) << j
        v = _reduce(e, basis)
        if v:
            basis[_leading_bit(v)] = v
            full[m] = e
            m += 1
    return full, m == n


@kernel
def basis_map_kernel(a_cols, b_cols, n):
    """Packed columns of an invertible ``M`` with ``M a_i = b_i``; ok flag second."""
    out = np.zeros(n, dtype=np.int64)
    fa, ok_a = _complete_basis(a_cols, n)
    fb, ok_b = _complete_basis(b_cols, n)
    if not (ok_a and ok_b):
        return out, False
    basis, combo, ok = _span_basis(fa)
    for j in range(n):
        c = _coords(np.int64(1) << j, basis, combo)
        out[j] = apply_columns(fb, c)
    return out, True


# ---------------------------------------------------------------------------
# public operations


def _as_columns(m) -> tuple[np.ndarray, int]:
    if isinstance(m, BitMatrix):
        return m.column_words(), m.rows
    raise TypeError("expected a BitMatrix")


def rank(m: BitMatrix) -> int:
    cols, _ = _as_columns(m)
    return int(_rank_kernel(cols))


def rank_words(cols) -> int:
    return int(_rank_kernel(np.asarray(cols, dtype=np.int64)))


def select_independent_columns(m: BitMatrix, order=None, limit: int | None = None) -> list[int]:
    """Greedy scan of columns in ``order``, keeping each one independent of those kept so far."""
    cols, _ = _as_columns(m)
    return select_independent_words(cols, order, limit).tolist()


def select_independent_words(cols, order=None, limit: int | None = None) -> np.ndarray:
    cols = np.asarray(cols, dtype=np.int64)
    order = np.arange(len(cols), dtype=np.int64) if order is None else np.asarray(order, dtype=np.int64)
    if limit is None:
        limit = len(order)
    return _select_kernel(cols, order, int(limit))


def invert(m: BitMatrix) -> BitMatrix:
    if m.rows != m.cols:
        raise SingularMatrixError(f"cannot invert a {m.rows}x{m.cols} matrix")
    cols, n = _as_columns(m)
    out, ok = _invert_kernel(cols, n)
    if not ok:
        raise SingularMatrixError("matrix is singular over GF(2)")
    return BitMatrix.from_columns(out, n)


def basis_map(a_cols, b_cols, n: int) -> BitMatrix:
    """Invertible ``n x n`` matrix sending each packed ``a_cols[i]`` to ``b_cols[i]``.

    Both sets are completed to full bases with unit vectors taken in
    ascending index order, then ``M = B_b B_a^{-1}``.
    """
    a = np.asarray(a_cols, dtype=np.int64)
    b = np.asarray(b_cols, dtype=np.int64)
    if len(a) != len(b):
        raise ValueError(f"column sets differ in size: {len(a)} vs {len(b)}")
    if len(a) > n:
        raise SingularMatrixError(f"{len(a)} columns cannot be independent in dimension {n}")
    out, ok = basis_map_kernel(a, b, n)
    if not ok:
        raise SingularMatrixError("input columns are linearly dependent")
    return BitMatrix.from_columns(out, n)
