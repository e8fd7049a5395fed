"""Row-sparse matrix oracles and their desk-scale dense counterparts.

A row oracle answers "give me the nonzero entries of row i" without ever
holding the full matrix.  That is the access model under which all
reductions in this package are built: the matrix dimension may in
principle be exponential in the description size, and every consumer
(determinant checks, spectral bounds, evolution operators) is written
against the oracle interface first.  Dense materialization exists only
as a desk-scale debugging and ground-truth device, gated by an explicit
cap.

Integer-valued oracles stay integer-valued until a spectral operation
converts them to floats.  No float arithmetic happens inside row
construction or Gram-matrix assembly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, ResourceLimitError

# Largest dimension materialize() will expand by default.  Override per
# call, or process-wide through the environment variable below.
DEFAULT_DENSE_CAP = 2**14
DENSE_CAP_ENV_VAR = "GAPLAB_DENSE_CAP"

Entry = tuple[int, int]
RowFn = Callable[[int], Sequence[Entry]]


def dense_cap() -> int:
    """Effective materialization cap (environment override wins)."""
    raw = os.environ.get(DENSE_CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_DENSE_CAP
    cap = int(raw)
    if cap <= 0:
        raise ValueError(f"{DENSE_CAP_ENV_VAR} must be positive, got {raw}")
    return cap


@dataclass(frozen=True)
class RowOracleMatrix:
    """Succinct square matrix described by a row function.

    ``row_fn(i)`` returns the nonzero entries of row ``i`` as
    ``(column, value)`` pairs with integer values, sorted by column.
    ``sparsity_d`` bounds the number of entries per row and
    ``entry_bound_k`` bounds their magnitude; both are part of the
    declared contract and are enforced on every query.
    ``column_ones_bound`` is an optional declared bound on the number of
    ones per column, required by the Gram construction below.
    """

    dim: int
    sparsity_d: int
    entry_bound_k: int
    row_fn: RowFn
    column_ones_bound: int | None = None

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.sparsity_d < 0 or self.entry_bound_k < 0:
            raise ValueError("sparsity and entry bounds must be nonnegative")


@dataclass
class DenseMatrix:
    """Explicit square matrix with verification flags.

    ``symmetric`` and ``psd`` start False and are set only after the
    corresponding check has actually run; they are the one exception to
    the otherwise immutable value types in this package.
    """

    dim: int
    entries: np.ndarray
    symmetric: bool = False
    psd: bool = False

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries)
        if self.entries.shape != (self.dim, self.dim):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match dim {self.dim}"
            )

    def check_symmetric(self, tol: float = 1e-12) -> bool:
        """Set the symmetric flag iff max |A - A^T| <= tol."""
        a = self.entries
        dev = np.max(np.abs(a - a.T)) if self.dim > 1 else 0.0
        self.symmetric = bool(dev <= tol)
        return self.symmetric

    def check_psd(self, tol: float = 1e-10) -> bool:
        """Set the psd flag iff the smallest eigenvalue is >= -tol."""
        if not self.symmetric and not self.check_symmetric():
            self.psd = False
            return False
        w = np.linalg.eigvalsh(self.entries.astype(np.float64))
        self.psd = bool(w[0] >= -tol)
        return self.psd


def row(matrix: RowOracleMatrix, i: int) -> list[Entry]:
    """Query one row of the oracle, enforcing the declared contract."""
    if not 0 <= i < matrix.dim:
        raise IndexError(f"row index {i} out of range for dim {matrix.dim}")
    entries = list(matrix.row_fn(i))
    if len(entries) > matrix.sparsity_d:
        raise ContractError(
            f"row {i} has {len(entries)} entries, declared sparsity {matrix.sparsity_d}"
        )
    prev_col = -1
    for col, val in entries:
        if not 0 <= col < matrix.dim:
            raise ContractError(f"row {i} references column {col} outside [0, {matrix.dim})")
        if col <= prev_col:
            raise ContractError(f"row {i} entries not sorted by column")
        if val == 0:
            raise ContractError(f"row {i} contains an explicit zero at column {col}")
        if abs(val) > matrix.entry_bound_k:
            raise ContractError(
                f"row {i} entry {val} exceeds declared bound {matrix.entry_bound_k}"
            )
        prev_col = col
    return entries


def norm_bound(matrix: RowOracleMatrix) -> int:
    """Cheap operator-norm bound: entry bound times row sparsity."""
    return matrix.entry_bound_k * matrix.sparsity_d


def materialize(matrix: RowOracleMatrix, cap: int | None = None) -> DenseMatrix:
    """Expand an oracle to a dense integer matrix, gated by the cap."""
    limit = dense_cap() if cap is None else cap
    if matrix.dim > limit:
        raise ResourceLimitError(
            f"dim {matrix.dim} exceeds dense materialization cap {limit}"
        )
    out = np.zeros((matrix.dim, matrix.dim), dtype=np.int64)
    for i in range(matrix.dim):
        for col, val in row(matrix, i):
            out[i, col] = val
    dm = DenseMatrix(dim=matrix.dim, entries=out)
    dm.check_symmetric()
    return dm


def identity_oracle(dim: int) -> RowOracleMatrix:
    """Row oracle of the dim x dim identity."""
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    return RowOracleMatrix(
        dim=dim,
        sparsity_d=1,
        entry_bound_k=1,
        row_fn=lambda i: [(i, 1)],
        column_ones_bound=1,
    )


def to_csr(matrix: RowOracleMatrix):
    """Compressed sparse form of an oracle (no dense cap needed)."""
    from scipy.sparse import csr_matrix

    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for i in range(matrix.dim):
        for col, val in row(matrix, i):
            indices.append(col)
            data.append(val)
        indptr.append(len(indices))
    return csr_matrix(
        (np.asarray(data, dtype=np.float64), indices, indptr),
        shape=(matrix.dim, matrix.dim),
    )


def from_dense(dense: DenseMatrix | np.ndarray) -> RowOracleMatrix:
    """Wrap an explicit matrix as a row oracle (round-trip helper)."""
    arr = dense.entries if isinstance(dense, DenseMatrix) else np.asarray(dense)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ContractError("row oracles carry exact integer entries")
    n = arr.shape[0]
    rows: list[list[Entry]] = [
        [(int(j), int(arr[i, j])) for j in np.nonzero(arr[i])[0]] for i in range(n)
    ]
    sparsity = max((len(r) for r in rows), default=0)
    bound = int(np.max(np.abs(arr))) if arr.size else 0
    col_ones = None
    if np.all((arr == 0) | (arr == 1)):
        col_ones = int(np.max(np.sum(arr, axis=0))) if arr.size else 0
    return RowOracleMatrix(
        dim=n,
        sparsity_d=max(sparsity, 1),
        entry_bound_k=max(bound, 1),
        row_fn=lambda i: rows[i],
        column_ones_bound=col_ones,
    )


def from_entries(dim: int, triplets: Iterable[Sequence[int]]) -> RowOracleMatrix:
    """Build an oracle from an (i, j, value) triplet list."""
    rows: dict[int, dict[int, int]] = {}
    for i, j, v in triplets:
        i, j, v = int(i), int(j), int(v)
        if not (0 <= i < dim and 0 <= j < dim):
            raise ValueError(f"entry ({i}, {j}) outside a {dim} x {dim} matrix")
        if v == 0:
            continue
        if j in rows.setdefault(i, {}):
            raise ValueError(f"duplicate entry at ({i}, {j})")
        rows[i][j] = v
    row_lists: dict[int, list[Entry]] = {
        i: sorted(cols.items()) for i, cols in rows.items()
    }
    sparsity = max((len(r) for r in row_lists.values()), default=0)
    bound = max(
        (abs(v) for cols in rows.values() for v in cols.values()), default=0
    )
    all_01 = all(v == 1 for cols in rows.values() for v in cols.values())
    col_ones = None
    if all_01:
        counts: dict[int, int] = {}
        for cols in rows.values():
            for j in cols:
                counts[j] = counts.get(j, 0) + 1
        col_ones = max(counts.values(), default=0)
    return RowOracleMatrix(
        dim=dim,
        sparsity_d=max(sparsity, 1),
        entry_bound_k=max(bound, 1),
        row_fn=lambda i: row_lists.get(i, []),
        column_ones_bound=col_ones,
    )


class _ColumnIndex:
    """Lazily built transpose index for a row oracle.

    A truly succinct matrix would need a column oracle of its own; at
    desk scale one full row sweep is affordable and keeps the Gram
    construction independent of any particular matrix family.
    """

    def __init__(self, matrix: RowOracleMatrix) -> None:
        self._matrix = matrix
        self._cols: dict[int, list[Entry]] | None = None

    def column(self, j: int) -> list[Entry]:
        if self._cols is None:
            cols: dict[int, list[Entry]] = {}
            for i in range(self._matrix.dim):
                for c, v in row(self._matrix, i):
                    cols.setdefault(c, []).append((i, v))
            self._cols = cols
        return self._cols.get(j, []) if self._cols else []


def ata_oracle(matrix: RowOracleMatrix) -> RowOracleMatrix:
    """Row oracle for A^T A, for 0/1 matrices with <= 2 ones per column.

    Row i of the Gram matrix touches only columns j that share a
    supporting row with column i, so each query needs the (at most two)
    rows meeting column i.  Entries land in {0, 1, 2}: a diagonal entry
    counts the ones in column i, an off-diagonal entry counts shared
    rows.  The result is symmetric and positive semidefinite by
    construction.
    """
    if matrix.column_ones_bound is None or matrix.column_ones_bound > 2:
        raise ContractError(
            "Gram construction requires a declared column bound of at most 2 ones"
        )
    if matrix.entry_bound_k > 1:
        raise ContractError("Gram construction requires 0/1 entries")

    index = _ColumnIndex(matrix)
    gram_sparsity = min(matrix.dim, 2 * matrix.sparsity_d * matrix.column_ones_bound)

    def gram_row(i: int) -> list[Entry]:
        acc: dict[int, int] = {}
        for r, v_ri in index.column(i):
            for j, v_rj in row(matrix, r):
                acc[j] = acc.get(j, 0) + v_ri * v_rj
        return sorted((j, v) for j, v in acc.items() if v != 0)

    return RowOracleMatrix(
        dim=matrix.dim,
        sparsity_d=gram_sparsity,
        entry_bound_k=2,
        row_fn=gram_row,
        column_ones_bound=None,
    )


def path_adjacency(ell: int) -> RowOracleMatrix:
    """Lower-bidiagonal block: a directed path with a self-loop on every vertex.

    Row 0 holds the lone self-loop of the path's sink; row i >= 1 holds
    the self-loop plus the edge to vertex i - 1.
    """
    if ell < 1:
        raise IndexError(f"path block needs length >= 1, got {ell}")

    def row_fn(i: int) -> list[Entry]:
        if i == 0:
            return [(0, 1)]
        return [(i - 1, 1), (i, 1)]

    return RowOracleMatrix(
        dim=ell, sparsity_d=2, entry_bound_k=1, row_fn=row_fn, column_ones_bound=2
    )


def cycle_adjacency(ell: int) -> RowOracleMatrix:
    """Cycle block: a directed cycle with self-loops on all but two vertices.

    Vertex 0 (back-edge source) points at vertex ell - 1 and the cycle
    runs back down through the self-looped interior.  Vertices 0 and
    ell - 1 carry no self-loop.
    """
    if ell < 3:
        raise IndexError(f"cycle block needs length >= 3, got {ell}")

    def row_fn(i: int) -> list[Entry]:
        if i == 0:
            return [(ell - 1, 1)]
        if i == ell - 1:
            return [(ell - 2, 1)]
        return [(i - 1, 1), (i, 1)]

    return RowOracleMatrix(
        dim=ell, sparsity_d=2, entry_bound_k=1, row_fn=row_fn, column_ones_bound=2
    )


def load_instance(source: str | os.PathLike | dict) -> RowOracleMatrix:
    """Load a matrix instance from JSON (path or already-parsed dict).

    Formats:
      {"dim": N, "entries": [[i, j, v], ...]}        triplet matrix
      {"dim": N, "rows": [[...], ...]}                dense integer matrix
      {"kind": "path" | "cycle", "ell": L}            structured block
      {"kind": "rtm", "machine": PATH-OR-NAME,
       "input": STR, "space": S?}                     machine reduction
    """
    if isinstance(source, dict):
        spec = source
        base = os.getcwd()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        base = os.path.dirname(os.path.abspath(source))

    if "rows" in spec:
        return from_dense(np.asarray(spec["rows"], dtype=np.int64))
    if "entries" in spec:
        return from_entries(int(spec["dim"]), spec["entries"])

    kind = spec.get("kind")
    if kind == "path":
        return path_adjacency(int(spec["ell"]))
    if kind == "cycle":
        return cycle_adjacency(int(spec["ell"]))
    if kind == "rtm":
        from . import rtm  # deferred: rtm depends on this module

        machine_ref = spec["machine"]
        candidate = os.path.join(base, machine_ref)
        if os.path.exists(candidate):
            machine = rtm.load_machine(candidate)
        else:
            machine = rtm.corpus_machine(machine_ref)
        if "space" in spec:
            machine = rtm.with_space(machine, int(spec["space"]))
        return rtm.augmented_adjacency(machine, spec["input"])
    raise ValueError(f"unrecognized instance description: {sorted(spec)}")
