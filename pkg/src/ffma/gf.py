"""Exact vector and matrix arithmetic over small prime fields GF(p).

Extension-field elements only ever appear through their m-tuple coordinates,
so everything here is plain modular linear algebra on integer arrays.
Values are immutable: every operation returns a new object whose backing
array is marked read-only.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SUPPORTED_PRIMES = (2, 3, 7)


class ShapeMismatch(ValueError):
    pass


class ModulusMismatch(ValueError):
    pass


def _check_prime(p: int) -> int:
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported field modulus {p}; expected one of {SUPPORTED_PRIMES}")
    return int(p)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    arr.flags.writeable = False
    return arr


class FfVector:
    """A row vector over GF(p)."""

    __slots__ = ("p", "elems")

    def __init__(self, elems: Iterable[int] | np.ndarray, p: int):
        self.p = _check_prime(p)
        arr = np.array(elems, dtype=np.int64).reshape(-1)
        if arr.size == 0:
            raise ShapeMismatch("vector must have positive length")
        if arr.min() < 0 or arr.max() >= p:
            raise ValueError(f"elements must lie in [0, {p})")
        self.elems = _frozen(arr)

    @classmethod
    def from_str(cls, digits: str, p: int) -> FfVector:
        """Parse a digit string such as ``"1021"``; spaces and commas are ignored."""
        return cls([int(c) for c in digits if c.isdigit()], p)

    @classmethod
    def zeros(cls, n: int, p: int) -> FfVector:
        return cls(np.zeros(n, dtype=np.int64), p)

    def __len__(self) -> int:
        return int(self.elems.size)

    def __iter__(self):
        return iter(int(x) for x in self.elems)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return FfVector(self.elems[idx], self.p)
        return int(self.elems[idx])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FfVector):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.elems, other.elems)

    def __hash__(self) -> int:
        return hash((self.p, self.elems.tobytes()))

    def __repr__(self) -> str:
        return f"FfVector('{self}', p={self.p})"

    def __str__(self) -> str:
        return "".join(str(int(x)) for x in self.elems)

    def __add__(self, other: FfVector) -> FfVector:
        return add(self, other)

    def __sub__(self, other: FfVector) -> FfVector:
        return add(self, negate(other))

    def __neg__(self) -> FfVector:
        return negate(self)

    def __rmul__(self, c: int) -> FfVector:
        return scale(c, self)

    def __matmul__(self, other: FfMatrix) -> FfVector:
        return vec_mat(self, other)

    def tolist(self) -> list[int]:
        return [int(x) for x in self.elems]

    def blocks(self, size: int) -> list[FfVector]:
        """Split into consecutive blocks of ``size`` symbols."""
        if len(self) % size:
            raise ShapeMismatch(f"length {len(self)} is not a multiple of {size}")
        return [self[i : i + size] for i in range(0, len(self), size)]


class FfMatrix:
    """A dense matrix over GF(p), stored row-major."""

    __slots__ = ("p", "a")

    def __init__(self, rows: Sequence[Sequence[int]] | np.ndarray, p: int):
        self.p = _check_prime(p)
        arr = np.array(rows, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ShapeMismatch(f"matrix must be 2-D with positive dimensions, got shape {arr.shape}")
        if arr.min() < 0 or arr.max() >= p:
            raise ValueError(f"entries must lie in [0, {p})")
        self.a = _frozen(arr)

    @classmethod
    def from_rows(cls, rows: Sequence[str], p: int) -> FfMatrix:
        """Build from digit strings, one per row, e.g. ``["11", "21"]``."""
        return cls([[int(c) for c in r if c.isdigit()] for r in rows], p)

    @property
    def rows(self) -> int:
        return int(self.a.shape[0])

    @property
    def cols(self) -> int:
        return int(self.a.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> list[int]:
        return [int(x) for x in self.a.reshape(-1)]

    @property
    def T(self) -> FfMatrix:
        return FfMatrix(self.a.T, self.p)

    def row(self, i: int) -> FfVector:
        return FfVector(self.a[i], self.p)

    def row_vectors(self) -> list[FfVector]:
        return [self.row(i) for i in range(self.rows)]

    def select_rows(self, idx: Sequence[int]) -> FfMatrix:
        return FfMatrix(self.a[list(idx)], self.p)

    def select_cols(self, idx: Sequence[int]) -> FfMatrix:
        return FfMatrix(self.a[:, list(idx)], self.p)

    def is_zero(self) -> bool:
        return not self.a.any()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FfMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.a, other.a)

    def __hash__(self) -> int:
        return hash((self.p, self.a.shape, self.a.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join("".join(str(int(x)) for x in r) for r in self.a)
        return f"FfMatrix([{body}], p={self.p})"

    def __matmul__(self, other: FfMatrix) -> FfMatrix:
        return mat_mul(self, other)

    def __add__(self, other: FfMatrix) -> FfMatrix:
        return add(self, other)

    def __sub__(self, other: FfMatrix) -> FfMatrix:
        return add(self, negate(other))

    def __neg__(self) -> FfMatrix:
        return negate(self)

    def __rmul__(self, c: int) -> FfMatrix:
        return scale(c, self)

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()


def identity(n: int, p: int) -> FfMatrix:
    return FfMatrix(np.eye(n, dtype=np.int64), p)


def zeros(rows: int, cols: int, p: int) -> FfMatrix:
    return FfMatrix(np.zeros((rows, cols), dtype=np.int64), p)


def _same_p(x, y) -> int:
    if x.p != y.p:
        raise ModulusMismatch(f"operands live in GF({x.p}) and GF({y.p})")
    return x.p


def mat_mul(a: FfMatrix, b: FfMatrix) -> FfMatrix:
    p = _same_p(a, b)
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return FfMatrix((a.a @ b.a) % p, p)


def vec_mat(u: FfVector, g: FfMatrix) -> FfVector:
    p = _same_p(u, g)
    if len(u) != g.rows:
        raise ShapeMismatch(f"vector of length {len(u)} cannot multiply {g.shape} matrix")
    return FfVector((u.elems @ g.a) % p, p)


def dot(u: FfVector, v: FfVector) -> int:
    p = _same_p(u, v)
    if len(u) != len(v):
        raise ShapeMismatch(f"lengths differ: {len(u)} vs {len(v)}")
    return int(np.dot(u.elems, v.elems) % p)


def add(x, y):
    p = _same_p(x, y)
    if isinstance(x, FfVector) and isinstance(y, FfVector):
        if len(x) != len(y):
            raise ShapeMismatch(f"lengths differ: {len(x)} vs {len(y)}")
        return FfVector((x.elems + y.elems) % p, p)
    if isinstance(x, FfMatrix) and isinstance(y, FfMatrix):
        if x.shape != y.shape:
            raise ShapeMismatch(f"shapes differ: {x.shape} vs {y.shape}")
        return FfMatrix((x.a + y.a) % p, p)
    raise TypeError("add expects two vectors or two matrices")


def scale(c: int, x):
    if isinstance(x, FfVector):
        return FfVector((int(c) * x.elems) % x.p, x.p)
    if isinstance(x, FfMatrix):
        return FfMatrix((int(c) * x.a) % x.p, x.p)
    raise TypeError("scale expects a vector or a matrix")


def negate(x):
    if isinstance(x, FfVector):
        return FfVector((-x.elems) % x.p, x.p)
    if isinstance(x, FfMatrix):
        return FfMatrix((-x.a) % x.p, x.p)
    raise TypeError("negate expects a vector or a matrix")


def vsum(vectors: Iterable[FfVector]) -> FfVector:
    """Finite-field sum of equal-length vectors."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("nothing to sum")
    out = vectors[0]
    for v in vectors[1:]:
        out = add(out, v)
    return out


def concat(vectors: Iterable[FfVector]) -> FfVector:
    vectors = list(vectors)
    p = vectors[0].p
    for v in vectors:
        _same_p(vectors[0], v)
    return FfVector(np.concatenate([v.elems for v in vectors]), p)


def kronecker(a: FfMatrix, b: FfMatrix) -> FfMatrix:
    p = _same_p(a, b)
    return FfMatrix(np.kron(a.a, b.a) % p, p)


def inv_mod(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise ZeroDivisionError(f"0 has no inverse in GF({p})")
    return pow(x, p - 2, p)


def row_reduce(arr: np.ndarray, p: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form over GF(p).

    Pivots are searched only in the first ``ncols`` columns (all columns by
    default), taking the first nonzero entry at or below the current row.

    Returns:
        The reduced array and the list of pivot columns.
    """
    r = np.array(arr, dtype=np.int64) % p
    nrows, total = r.shape
    ncols = total if ncols is None else ncols
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            r[[row, piv]] = r[[piv, row]]
        r[row] = (r[row] * inv_mod(int(r[row, col]), p)) % p
        others = np.nonzero(r[:, col])[0]
        for i in others:
            if i != row:
                r[i] = (r[i] - r[i, col] * r[row]) % p
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: FfMatrix) -> int:
    return len(row_reduce(a.a, a.p)[1])


def inverse(a: FfMatrix) -> FfMatrix:
    if a.rows != a.cols:
        raise ShapeMismatch(f"cannot invert non-square {a.shape} matrix")
    n = a.rows
    aug = np.hstack([a.a, np.eye(n, dtype=np.int64)])
    red, piv = row_reduce(aug, a.p, ncols=n)
    if len(piv) != n:
        raise ValueError("matrix is singular")
    return FfMatrix(red[:, n:], a.p)


def nullspace(a: FfMatrix) -> FfMatrix | None:
    """Basis (as rows) of ``{x : a @ x^T = 0}``; ``None`` if only the zero vector."""
    red, piv = row_reduce(a.a, a.p)
    free = [c for c in range(a.cols) if c not in piv]
    if not free:
        return None
    basis = np.zeros((len(free), a.cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(piv):
            basis[k, pc] = (-red[i, f]) % a.p
    return FfMatrix(basis, a.p)


def solve_left(a: FfMatrix, w: FfVector) -> FfVector | None:
    """Some ``x`` with ``x @ a == w``, or ``None`` when the system is inconsistent."""
    p = _same_p(a, w)
    if len(w) != a.cols:
        raise ShapeMismatch(f"target length {len(w)} does not match {a.cols} columns")
    # x a = w  <=>  a^T x^T = w^T
    aug = np.hstack([a.a.T, w.elems.reshape(-1, 1)])
    red, piv = row_reduce(aug, p, ncols=a.rows)
    if red[len(piv):, -1].any():
        return None
    x = np.zeros(a.rows, dtype=np.int64)
    for i, pc in enumerate(piv):
        x[pc] = red[i, -1]
    return FfVector(x, p)


def to_text(m: FfMatrix) -> str:
    lines = [f"{m.p} {m.rows} {m.cols}"]
    lines += [" ".join(str(int(x)) for x in r) for r in m.a]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> FfMatrix:
    """Parse ``"p rows cols"`` followed by row-major entries separated by whitespace."""
    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError("matrix text needs a 'p rows cols' header")
    p, rows, cols = (int(t) for t in tokens[:3])
    body = tokens[3:]
    if len(body) == rows * cols:
        vals = [int(t) for t in body]
    else:
        # allow rows written as unseparated digit strings, e.g. "1021"
        digits = [int(c) for t in body for c in t]
        if len(digits) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, found {len(digits)}")
        vals = digits
    return FfMatrix(np.array(vals, dtype=np.int64).reshape(rows, cols), p)


def load_matrix(path: str | Path) -> FfMatrix:
    path = Path(path)
    try:
        return from_text(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read matrix file {path}: {exc}") from exc


def read_matrices(text: str, count: int) -> tuple[list[FfMatrix], str]:
    """Parse ``count`` consecutive matrices from text; return them and the unread remainder."""
    tokens = text.split()
    out: list[FfMatrix] = []
    pos = 0
    for _ in range(count):
        p, rows, cols = (int(t) for t in tokens[pos : pos + 3])
        pos += 3
        vals = [int(t) for t in tokens[pos : pos + rows * cols]]
        pos += rows * cols
        out.append(FfMatrix(np.array(vals, dtype=np.int64).reshape(rows, cols), p))
    return out, " ".join(tokens[pos:])
