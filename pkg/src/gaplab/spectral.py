"""Exact determinants and spectra for the structured blocks.

Two independent concerns live here:

* integer determinant algorithms (cycle covers, permutation expansion,
  fraction-free elimination) that certify singularity exactly, with no
  floating point anywhere on the path;
* eigenvalue machinery for the symmetric Gram matrices the reductions
  produce, including the closed-form spectrum of the path block and the
  tridiagonal fast path used for large sizes.

The determinant routines deliberately overlap: the cycle-cover sum and
the permutation expansion compute the same quantity through different
sign bookkeeping, which makes each a check on the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ContractError, ResourceLimitError
from .sparse_oracle import DenseMatrix, RowOracleMatrix, materialize, row

# Factorial-time methods refuse to run above this dimension.
ENUMERATION_CAP = 10

SYMMETRY_TOL = 1e-12


# ---------------------------------------------------------------------------
# exact determinants


def _dense_int_rows(matrix: RowOracleMatrix | DenseMatrix | np.ndarray) -> list[list[int]]:
    if isinstance(matrix, RowOracleMatrix):
        out = [[0] * matrix.dim for _ in range(matrix.dim)]
        for i in range(matrix.dim):
            for j, v in row(matrix, i):
                out[i][j] = v
        return out
    arr = matrix.entries if isinstance(matrix, DenseMatrix) else np.asarray(matrix)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ContractError("exact determinants require integer entries")
    return [[int(v) for v in r] for r in arr]


def det_cycle_cover(matrix: RowOracleMatrix | DenseMatrix | np.ndarray) -> int:
    """Determinant as a signed sum over cycle covers of the digraph.

    Each permutation with nonzero weight is a vertex-disjoint union of
    directed cycles (self-loops count as 1-cycles), and its sign is
    (-1)^(number of even-length cycles).  Enumeration walks cycles from
    the smallest uncovered vertex, so runtime is bounded by the number
    of covers rather than n!, but the dimension cap still applies.
    """
    a = _dense_int_rows(matrix)
    n = len(a)
    if n > ENUMERATION_CAP:
        raise ResourceLimitError(
            f"cycle-cover enumeration capped at dim {ENUMERATION_CAP}, got {n}"
        )
    succ = [[j for j in range(n) if a[i][j] != 0] for i in range(n)]
    covered = [False] * n
    total = 0

    def visit(weight: int, even_cycles: int) -> None:
        nonlocal total
        try:
            v0 = covered.index(False)
        except ValueError:
            total += weight if even_cycles % 2 == 0 else -weight
            return
        # Walk every cycle through v0 using only uncovered vertices.
        path: list[int] = []

        def extend(v: int, w: int) -> None:
            covered[v] = True
            path.append(v)
            for u in succ[v]:
                if u == v0:
                    cyc_len = len(path)
                    visit(w * a[v][v0], even_cycles + (1 - cyc_len % 2))
                elif not covered[u]:
                    extend(u, w * a[v][u])
            path.pop()
            covered[v] = False

        extend(v0, weight)

    visit(1, 0)
    return total


def det_permutation_expansion(
    matrix: RowOracleMatrix | DenseMatrix | np.ndarray,
) -> int:
    """Determinant by recursive expansion along rows.

    The sign of each term is tracked by the position of the chosen
    column among the still-available columns, which is the parity of
    the transposition sequence sorting the permutation.  Independent of
    the cycle-cover bookkeeping above.
    """
    a = _dense_int_rows(matrix)
    n = len(a)
    if n > ENUMERATION_CAP:
        raise ResourceLimitError(
            f"permutation expansion capped at dim {ENUMERATION_CAP}, got {n}"
        )

    def expand(i: int, cols: list[int]) -> int:
        if not cols:
            return 1
        acc = 0
        for pos, j in enumerate(cols):
            v = a[i][j]
            if v == 0:
                continue
            sub = expand(i + 1, cols[:pos] + cols[pos + 1 :])
            term = v * sub
            acc += term if pos % 2 == 0 else -term
        return acc

    return expand(0, list(range(n)))


def det_bareiss(matrix: RowOracleMatrix | DenseMatrix | np.ndarray) -> int:
    """Fraction-free elimination over Python integers.

    Every intermediate entry is an exact minor of the input, so there
    is no rounding and no coefficient blowup beyond Hadamard's bound.
    Rows whose pivot-column entry is zero need no elimination; when the
    current and previous pivots agree they need no rescaling either and
    are skipped outright, which makes the sweep near-quadratic on the
    almost-triangular matrices the reductions emit.
    """
    a = _dense_int_rows(matrix)
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        same_scale = pivot == prev
        for i in range(k + 1, n):
            row_i = a[i]
            f = row_i[k]
            if f == 0:
                if same_scale:
                    continue
                for j in range(k + 1, n):
                    row_i[j] = row_i[j] * pivot // prev
            else:
                row_k = a[k]
                for j in range(k + 1, n):
                    row_i[j] = (row_i[j] * pivot - f * row_k[j]) // prev
                row_i[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def det_bareiss_sparse(matrix: RowOracleMatrix) -> int:
    """Fraction-free elimination on dictionary rows with a column index.

    Same recurrence and exact-integer guarantees as det_bareiss, but
    each pivot step touches only the rows actually holding an entry in
    the pivot column, so the near-permutation matrices the reductions
    emit eliminate in time proportional to their nonzero count instead
    of dim^2.
    """
    n = matrix.dim
    rows: list[dict[int, int]] = [dict(row(matrix, i)) for i in range(n)]
    col_rows: dict[int, set[int]] = {}
    for i, r in enumerate(rows):
        for j in r:
            col_rows.setdefault(j, set()).add(i)

    def swap(k: int, r: int) -> None:
        for j in rows[k]:
            col_rows[j].discard(k)
        for j in rows[r]:
            col_rows[j].discard(r)
        rows[k], rows[r] = rows[r], rows[k]
        for j in rows[k]:
            col_rows[j].add(k)
        for j in rows[r]:
            col_rows[j].add(r)

    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k].get(k, 0) == 0:
            below = sorted(i for i in col_rows.get(k, ()) if i > k)
            if not below:
                return 0
            swap(k, below[0])
            sign = -sign
        pivot = rows[k][k]
        row_k = rows[k]
        eliminated = sorted(j for j in col_rows.get(k, ()) if j > k)
        for i in eliminated:
            row_i = rows[i]
            f = row_i.pop(k)
            col_rows[k].discard(i)
            for j in set(row_i) | set(row_k):
                if j <= k:
                    continue
                new = (row_i.get(j, 0) * pivot - f * row_k.get(j, 0)) // prev
                if new:
                    if j not in row_i:
                        col_rows.setdefault(j, set()).add(i)
                    row_i[j] = new
                elif j in row_i:
                    del row_i[j]
                    col_rows[j].discard(i)
        if pivot != prev:
            # Rows without a pivot-column entry still rescale (their new
            # values are exact minors too, so the division is exact).
            skip = set(eliminated)
            for i in range(k + 1, n):
                if i in skip:
                    continue
                row_i = rows[i]
                for j in list(row_i):
                    if j > k:
                        row_i[j] = row_i[j] * pivot // prev
        prev = pivot
    return sign * rows[n - 1].get(n - 1, 0)


def det_exact(
    matrix: RowOracleMatrix | DenseMatrix | np.ndarray, method: str = "auto"
) -> int:
    """Dispatch to an exact determinant method.

    ``auto`` picks elimination, which scales: the sparse-row variant for
    oracles, the dense one otherwise.  The enumeration methods are
    available by name for cross-validation at small dimension.
    """
    if method == "auto":
        if isinstance(matrix, RowOracleMatrix):
            return det_bareiss_sparse(matrix)
        return det_bareiss(matrix)
    if method == "bareiss":
        return det_bareiss(matrix)
    if method == "bareiss_sparse":
        if not isinstance(matrix, RowOracleMatrix):
            from .sparse_oracle import from_dense

            matrix = from_dense(matrix)
        return det_bareiss_sparse(matrix)
    if method == "cycle_cover":
        return det_cycle_cover(matrix)
    if method == "permutation":
        return det_permutation_expansion(matrix)
    raise ValueError(f"unknown determinant method {method!r}")


# ---------------------------------------------------------------------------
# polynomial recurrences and closed-form spectra


def chebyshev_q(n: int, x):
    """Recurrence q_0 = 1, q_1 = x, q_n = x q_{n-1} - q_{n-2}.

    Exact over ints and Fractions; at x = 2 cos(theta) this evaluates
    to sin((n+1) theta) / sin(theta).
    """
    if n < 0:
        raise ValueError(f"recurrence index must be nonnegative, got {n}")
    if n == 0:
        return x**0  # one, in the arithmetic of x
    prev, cur = x**0, x
    for _ in range(n - 1):
        prev, cur = cur, x * cur - prev
    return cur


def char_poly_p(ell: int, lam):
    """det(G - lam I) for the path Gram block of size ell.

    Expanding the tridiagonal determinant by its last row gives
    p_ell(lam) = q_ell(2 - lam) - q_{ell-1}(2 - lam).
    """
    if ell < 1:
        raise ValueError(f"path block needs size >= 1, got {ell}")
    y = 2 - lam
    return chebyshev_q(ell, y) - chebyshev_q(ell - 1, y)


def closed_form_eigenvalues(ell: int, index_form: str = "odd") -> np.ndarray:
    """Closed-form spectrum of the path Gram block, ascending.

    ``odd`` (the validated form) places the k-th eigenvalue at
    2 (1 - cos((2k - 1) pi / (2 ell + 1))); these are exactly the roots
    of char_poly_p.  ``even`` substitutes 2k in the numerator and is
    retained only for comparison runs; it disagrees already at ell = 1
    (3 instead of 1).
    """
    if ell < 1:
        raise ValueError(f"path block needs size >= 1, got {ell}")
    k = np.arange(1, ell + 1, dtype=np.float64)
    if index_form == "odd":
        num = 2.0 * k - 1.0
    elif index_form == "even":
        num = 2.0 * k
    else:
        raise ValueError(f"unknown index form {index_form!r}")
    return 2.0 * (1.0 - np.cos(num * pi / (2.0 * ell + 1.0)))


def min_eigenvalue_bound(dim: int) -> float:
    """Smallest possible nonzero Gram eigenvalue at a given dimension.

    Equals the bottom of the closed-form path spectrum at ell = dim;
    any reduction output of this dimension with nonzero determinant has
    its least eigenvalue at or above this value.
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return 2.0 * (1.0 - cos(pi / (2.0 * dim + 1.0)))


# ---------------------------------------------------------------------------
# structured Gram matrices and eigensolvers


def gram_bands(kind: str, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, offdiagonal) of the Gram matrix A^T A of a block.

    Path: diag (2, ..., 2, 1), offdiag all ones.  Cycle: the Gram is
    block diagonal, a size ell - 1 path-like block with diag
    (1, 2, ..., 2) plus an isolated unit eigenvalue, so the bands are
    diag (1, 2, ..., 2, 1) with a zero closing the offdiagonal.
    """
    if kind == "path":
        if ell < 1:
            raise ValueError(f"path block needs size >= 1, got {ell}")
        diag = np.full(ell, 2.0)
        diag[-1] = 1.0
        off = np.ones(max(ell - 1, 0))
        return diag, off
    if kind == "cycle":
        if ell < 3:
            raise ValueError(f"cycle block needs size >= 3, got {ell}")
        diag = np.full(ell, 2.0)
        diag[0] = 1.0
        diag[-1] = 1.0
        off = np.ones(ell - 1)
        off[-1] = 0.0
        return diag, off
    raise ValueError(f"unknown block kind {kind!r}")


@dataclass(frozen=True)
class StructuredBlock:
    """One Gram block of the two structured families, with its matrix."""

    kind: str
    ell: int
    matrix: DenseMatrix


def structured_matrix(kind: str, ell: int) -> StructuredBlock:
    """Exact integer Gram matrix A^T A of a structured block."""
    diag, off = gram_bands(kind, ell)
    n = len(diag)
    out = np.diag(diag.astype(np.int64))
    idx = np.arange(n - 1)
    out[idx, idx + 1] = off.astype(np.int64)
    out[idx + 1, idx] = off.astype(np.int64)
    dm = DenseMatrix(dim=n, entries=out)
    dm.symmetric = True
    dm.psd = True
    return StructuredBlock(kind=kind, ell=ell, matrix=dm)


def _require_symmetric(entries: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    dev = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if dev > tol:
        raise ContractError(f"matrix is not symmetric: max deviation {dev:.3e} > {tol:.0e}")
    return arr


def min_eigenvalue(matrix: DenseMatrix | np.ndarray, tol: float = SYMMETRY_TOL) -> float:
    """Least eigenvalue of a symmetric matrix (symmetry is a contract)."""
    arr = matrix.entries if isinstance(matrix, DenseMatrix) else matrix
    arr = _require_symmetric(arr, tol)
    return float(np.linalg.eigvalsh(arr)[0])


def min_eigenvalue_banded(diag: np.ndarray, off: np.ndarray) -> float:
    """Least eigenvalue of a symmetric tridiagonal matrix.

    Uses the banded eigensolver with index selection, so sizes in the
    thousands stay cheap.
    """
    if len(diag) == 1:
        return float(diag[0])
    w = eigh_tridiagonal(
        np.asarray(diag, dtype=np.float64),
        np.asarray(off, dtype=np.float64),
        eigvals_only=True,
        select="i",
        select_range=(0, 0),
    )
    return float(w[0])


def eigensystem(
    matrix: DenseMatrix | np.ndarray, tol: float = SYMMETRY_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """(eigenvalues ascending, eigenvector columns) of a symmetric matrix."""
    arr = matrix.entries if isinstance(matrix, DenseMatrix) else matrix
    arr = _require_symmetric(arr, tol)
    w, v = np.linalg.eigh(arr)
    return w, v


@dataclass(frozen=True)
class SpectrumReport:
    """Eigensolver spectrum of one block, with optional closed form beside it."""

    kind: str
    ell: int
    eigenvalues: np.ndarray
    closed_form: np.ndarray | None = None

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_abs_discrepancy(self) -> float:
        if self.closed_form is None:
            return 0.0
        return float(np.max(np.abs(self.closed_form - self.eigenvalues)))

    def rows(self) -> list[tuple[int, float, float, float]]:
        closed = (
            self.closed_form
            if self.closed_form is not None
            else np.full_like(self.eigenvalues, np.nan)
        )
        return [
            (k + 1, float(closed[k]), float(self.eigenvalues[k]),
             abs(float(closed[k] - self.eigenvalues[k])))
            for k in range(len(self.eigenvalues))
        ]


def spectrum_report(kind: str, ell: int, index_form: str = "odd") -> SpectrumReport:
    """Compare the closed-form block spectrum against the eigensolver.

    The cycle Gram decomposes as a path Gram of size ell - 1 plus an
    isolated unit eigenvalue, so its closed form reuses the path one.
    """
    diag, off = gram_bands(kind, ell)
    numeric = np.sort(
        eigh_tridiagonal(diag, off, eigvals_only=True)
        if len(diag) > 1
        else np.asarray(diag, dtype=np.float64)
    )
    if kind == "path":
        closed = closed_form_eigenvalues(ell, index_form)
    else:
        closed = np.sort(
            np.concatenate([closed_form_eigenvalues(ell - 1, index_form), [1.0]])
        )
    return SpectrumReport(kind=kind, ell=ell, eigenvalues=numeric, closed_form=closed)


def min_eigenvalue_oracle(
    matrix: RowOracleMatrix, cap: int | None = None
) -> float:
    """Least eigenvalue of a symmetric row-oracle matrix.

    Materializes (subject to the dense cap) and defers to the dense
    eigensolver; the symmetric contract is enforced on the result.
    """
    dm = materialize(matrix, cap)
    return min_eigenvalue(dm)


def min_eigenvalue_sparse(matrix: RowOracleMatrix, shift: float = 1e-6) -> float:
    """Least eigenvalue of a large symmetric PSD oracle matrix.

    Shift-invert Lanczos around -shift: for a PSD matrix every
    eigenvalue is closer to the bottom one than to the negative shift
    point, so the single returned value is the minimum.  Used where
    dense diagonalization would not fit; the dense path remains the
    ground truth at small sizes.
    """
    from scipy.sparse.linalg import eigsh

    from .sparse_oracle import to_csr

    a = to_csr(matrix)
    dev = abs(a - a.T)
    if dev.nnz and dev.max() > SYMMETRY_TOL:
        raise ContractError("matrix is not symmetric")
    w = eigsh(a, k=1, sigma=-shift, which="LM", return_eigenvectors=False)
    return float(w[0])
