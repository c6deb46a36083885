"""Sparse exact linear algebra over cyclotomic-rational fields.

Rank and homology dimensions are computed by exact elimination; the hot
kernel lives in _elim (pure Python) with a compiled twin in _elim_c, chosen
at import time.  Both backends implement the identical deterministic
algorithm, so every result is backend-independent.  Large matrices are first
split into connected components of their nonzero support (ranks add across
blocks) which keeps elimination local on the chain complexes built
downstream.

Small dense solves (membership in an image, kernel representatives) run
directly over Scalar entries; the primitive-integer kernel is reserved for
rank, where no division is ever needed.
"""

from __future__ import annotations

from math import gcd

from .scalars import Scalar, get_field

try:  # pragma: no cover - exercised via twistchain.linalg.BACKEND
    from . import _elim_c as _kernel
except ImportError:  # pragma: no cover
    from . import _elim as _kernel

BACKEND = _kernel.BACKEND


def set_backend(name: str) -> None:
    """Force 'python' or 'cython' elimination (used by tests and benchmarks)."""
    global _kernel, BACKEND
    if name == "python":
        from . import _elim as _kernel  # noqa: F811
    elif name == "cython":
        from . import _elim_c as _kernel  # noqa: F811
    else:
        raise ValueError("unknown backend %r" % name)
    BACKEND = _kernel.BACKEND


class SparseMatrix:
    """Immutable-ish sparse matrix with exact Scalar entries.

    entries maps (row, col) to a nonzero Scalar; explicit zeros are dropped
    at construction.  Rows and columns are plain 0-based indices; callers
    keep their own basis bookkeeping.
    """

    __slots__ = ("nrows", "ncols", "entries")

    def __init__(self, nrows: int, ncols: int, entries=None):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative matrix dimensions")
        self.nrows = nrows
        self.ncols = ncols
        self.entries = {}
        if entries:
            for (r, c), v in entries.items() if hasattr(entries, "items") else entries:
                if not (0 <= r < nrows and 0 <= c < ncols):
                    raise ValueError("entry (%d, %d) out of bounds" % (r, c))
                if isinstance(v, int):
                    v = get_field(1).scalar(v)
                if (r, c) in self.entries:
                    raise ValueError("duplicate entry at (%d, %d)" % (r, c))
                if not v.is_zero():
                    self.entries[(r, c)] = v

    def __repr__(self):
        return "SparseMatrix(%d x %d, %d nonzero)" % (
            self.nrows,
            self.ncols,
            len(self.entries),
        )

    def is_zero(self) -> bool:
        return not self.entries

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(
            self.ncols,
            self.nrows,
            {(c, r): v for (r, c), v in self.entries.items()},
        )

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in matrix product")
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                key = (r, c)
                cur = acc.get(key)
                acc[key] = v * w if cur is None else cur + v * w
        out = SparseMatrix(self.nrows, other.ncols)
        out.entries = {k: v for k, v in acc.items() if not v.is_zero()}
        return out

    def __mul__(self, scalar) -> "SparseMatrix":
        if isinstance(scalar, int):
            scalar = get_field(1).scalar(scalar)
        out = SparseMatrix(self.nrows, self.ncols)
        if not scalar.is_zero():
            out.entries = {k: v * scalar for k, v in self.entries.items()}
        return out

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other * -1

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in matrix sum")
        acc = dict(self.entries)
        for k, v in other.entries.items():
            cur = acc.get(k)
            acc[k] = v if cur is None else cur + v
        out = SparseMatrix(self.nrows, self.ncols)
        out.entries = {k: v for k, v in acc.items() if not v.is_zero()}
        return out

    def apply(self, vec: dict) -> dict:
        """Apply to a sparse column vector {index: Scalar}."""
        out = {}
        for (r, c), v in self.entries.items():
            x = vec.get(c)
            if x is not None:
                cur = out.get(r)
                out[r] = v * x if cur is None else cur + v * x
        return {k: v for k, v in out.items() if not v.is_zero()}

    # -- rank --------------------------------------------------------------

    def _field_order(self) -> int:
        n = 1
        for v in self.entries.values():
            m = v.field.order
            n = n * m // gcd(n, m)
        return n

    def _int_rows(self, field):
        """Row-major primitive integer rows in the common field."""
        deg = field.degree
        n = field.order
        rows = {}
        for (r, c), v in self.entries.items():
            rows.setdefault(r, []).append((c, v))
        out = []
        for r in sorted(rows):
            items = sorted(rows[r])
            den = 1
            vecs = []
            for _, v in items:
                nums, d = (v if v.field.order == n else v.lift(n)).as_int_vec()
                vecs.append((nums, d))
                den = den * d // gcd(den, d)
            cols = [c for c, _ in items]
            vals = [
                tuple(x * (den // d) for x in nums) for nums, d in vecs
            ]
            g = 0
            for vec in vals:
                for x in vec:
                    if x:
                        g = gcd(g, x)
                if g == 1:
                    break
            if g > 1:
                vals = [tuple(x // g for x in vec) for vec in vals]
            out.append((cols, vals))
        return out

    def rank(self) -> int:
        if not self.entries:
            return 0
        field = get_field(self._field_order())
        rows = self._int_rows(field)
        red = tuple(tuple(r) for r in field._red) if field.degree > 1 else ()
        blocks = _split_components(rows)
        total = 0
        for block in blocks:
            block_rows = [(list(c), list(v)) for c, v in block]
            total += _kernel.echelon_rank(block_rows, field.degree, red)
        return total

    def nullity(self) -> int:
        return self.ncols - self.rank()


def _split_components(rows):
    """Partition rows into connected components of shared column support."""
    parent = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for cols, _ in rows:
        for c in cols:
            parent.setdefault(c, c)
        first = find(cols[0])
        for c in cols[1:]:
            r = find(c)
            if r != first:
                parent[r] = first
    groups = {}
    for cols, vals in rows:
        groups.setdefault(find(cols[0]), []).append((cols, vals))
    return [groups[k] for k in sorted(groups, key=lambda root: min(groups[root][0][0]))]


def rank(matrix: SparseMatrix) -> int:
    return matrix.rank()


def homology_dimension(d_in: SparseMatrix, d_out: SparseMatrix) -> int:
    """dim ker(d_out) - rank(d_in) for consecutive differentials.

    d_in maps into the middle space (d_in.nrows = dim), d_out maps out of it
    (d_out.ncols = dim).  Raises when the spaces disagree or when
    d_out . d_in is not zero, which signals a broken differential upstream.
    """
    if d_in.nrows != d_out.ncols:
        raise ValueError(
            "middle dimension mismatch: d_in has %d rows, d_out has %d columns"
            % (d_in.nrows, d_out.ncols)
        )
    if not (d_out @ d_in).is_zero():
        raise ValueError("d_out . d_in != 0: not a chain complex")
    return d_out.ncols - d_out.rank() - d_in.rank()


# -- small dense solves over Scalars ---------------------------------------


def _to_dense_rows(matrix: SparseMatrix):
    one = get_field(1)
    rows = [[one.zero] * matrix.ncols for _ in range(matrix.nrows)]
    for (r, c), v in matrix.entries.items():
        rows[r][c] = v
    return rows


def solve(matrix: SparseMatrix, rhs: list) -> list | None:
    """One exact solution of matrix @ x = rhs, or None when inconsistent.

    Dense Gaussian elimination over Scalars; intended for the small systems
    in witness construction and image-membership checks.
    """
    m, n = matrix.nrows, matrix.ncols
    if len(rhs) != m:
        raise ValueError("rhs length %d != %d rows" % (len(rhs), m))
    one = get_field(1)
    rows = _to_dense_rows(matrix)
    b = [one.scalar(v) if isinstance(v, int) else v for v in rhs]
    piv_of_col = {}
    row_i = 0
    for col in range(n):
        sel = None
        for i in range(row_i, m):
            if not rows[i][col].is_zero():
                sel = i
                break
        if sel is None:
            continue
        rows[row_i], rows[sel] = rows[sel], rows[row_i]
        b[row_i], b[sel] = b[sel], b[row_i]
        inv = rows[row_i][col].inverse()
        rows[row_i] = [x * inv for x in rows[row_i]]
        b[row_i] = b[row_i] * inv
        for i in range(m):
            if i != row_i and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[row_i])]
                b[i] = b[i] - f * b[row_i]
        piv_of_col[col] = row_i
        row_i += 1
        if row_i == m:
            break
    for i in range(row_i, m):
        if not b[i].is_zero():
            return None
    x = [one.zero] * n
    for col, i in piv_of_col.items():
        x[col] = b[i]
    return x


def in_image(matrix: SparseMatrix, rhs: list) -> bool:
    return solve(matrix, rhs) is not None


def kernel_basis(matrix: SparseMatrix) -> list:
    """Basis of ker(matrix) as dense Scalar columns (deterministic RREF)."""
    m, n = matrix.nrows, matrix.ncols
    one = get_field(1)
    rows = _to_dense_rows(matrix)
    pivots = []  # (row, col)
    row_i = 0
    for col in range(n):
        sel = None
        for i in range(row_i, m):
            if not rows[i][col].is_zero():
                sel = i
                break
        if sel is None:
            continue
        rows[row_i], rows[sel] = rows[sel], rows[row_i]
        inv = rows[row_i][col].inverse()
        rows[row_i] = [x * inv for x in rows[row_i]]
        for i in range(m):
            if i != row_i and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[row_i])]
        pivots.append((row_i, col))
        row_i += 1
        if row_i == m:
            break
    piv_cols = {c for _, c in pivots}
    basis = []
    for free in range(n):
        if free in piv_cols:
            continue
        vec = [one.zero] * n
        vec[free] = one.one
        for r, c in pivots:
            v = rows[r][free]
            if not v.is_zero():
                vec[c] = -v
        basis.append(vec)
    return basis
