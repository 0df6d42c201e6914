"""Sparse exact linear algebra over the rationals.

Matrices are lists of rows, each row a dict {column index: Fraction}.
Elimination uses a fixed deterministic pivot rule (leftmost unsolved column,
then sparsest row, then lowest row index) so bases, solutions and homology
coordinates are reproducible run to run.
"""

from __future__ import annotations

from fractions import Fraction

Row = dict[int, Fraction]


def row_axpy(target: Row, coeff: Fraction, source: Row) -> None:
    """target += coeff * source, dropping exact zeros."""
    if not coeff:
        return
    for j, v in source.items():
        w = target.get(j, _ZERO) + coeff * v
        if w:
            target[j] = w
        else:
            target.pop(j, None)


_ZERO = Fraction(0)


class Echelon:
    """Row-echelon accumulator with per-row tags.

    Rows are inserted one at a time; each kept row is reduced against the
    existing rows and stored under its pivot column with its accumulated tag
    (a dict over tag indices, tracking the row as a combination of inserted
    rows or of designated basis rows).
    """

    def __init__(self) -> None:
        self.rows: dict[int, tuple[Row, Row]] = {}  # pivot col -> (row, tag)

    def reduce(self, row: Row, tag: Row | None = None) -> tuple[Row, Row]:
        row = dict(row)
        tag = dict(tag) if tag else {}
        while row:
            p = min(row)
            hit = self.rows.get(p)
            if hit is None:
                return row, tag
            erow, etag = hit
            c = -row[p] / erow[p]
            row_axpy(row, c, erow)
            row_axpy(tag, c, etag)
        return row, tag

    def insert(self, row: Row, tag: Row | None = None) -> bool:
        """Reduce and keep the row if independent. Returns True if kept."""
        row, tag = self.reduce(row, tag)
        if not row:
            return False
        self.rows[min(row)] = (row, tag)
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def rref(rows: list[Row], track: bool = False) -> tuple[list[Row], list[Row] | None, list[int]]:
    """Reduced row-echelon form with deterministic pivoting.

    Returns (reduced rows, transform rows or None, pivot columns). When
    track is set, transform[i] expresses reduced row i as a combination of
    input rows: reduced = transform @ input.
    """
    work = [dict(r) for r in rows]
    trans: list[Row] | None = [{i: Fraction(1)} for i in range(len(rows))] if track else None
    pivots: list[int] = []
    done = 0
    n = len(work)
    while True:
        # leftmost column with a nonzero entry in an unfinished row
        col = None
        for i in range(done, n):
            if work[i]:
                c = min(work[i])
                if col is None or c < col:
                    col = c
        if col is None:
            break
        # sparsest row with a pivot in that column (ties: lowest index)
        best = None
        for i in range(done, n):
            v = work[i].get(col)
            if v:
                key = (len(work[i]), i)
                if best is None or key < best[0]:
                    best = (key, i)
        i = best[1]
        work[done], work[i] = work[i], work[done]
        if trans is not None:
            trans[done], trans[i] = trans[i], trans[done]
        piv = work[done]
        inv = 1 / piv[col]
        for j in list(piv):
            piv[j] *= inv
        if trans is not None:
            for j in list(trans[done]):
                trans[done][j] *= inv
        for k in range(n):
            if k == done:
                continue
            c = work[k].get(col)
            if c:
                row_axpy(work[k], -c, piv)
                if trans is not None:
                    row_axpy(trans[k], -c, trans[done])
        pivots.append(col)
        done += 1
    return work, trans, pivots


def nullspace(rows: list[Row], ncols: int) -> list[Row]:
    """Basis of {x : rows @ x = 0} as sparse column vectors.

    Deterministic: one basis vector per free column, in column order, with a
    1 in the free column.
    """
    red, _, pivots = rref(rows)
    pivot_set = dict(zip(pivots, red))
    basis: list[Row] = []
    for j in range(ncols):
        if j in pivot_set:
            continue
        vec: Row = {j: Fraction(1)}
        for pcol, prow in pivot_set.items():
            c = prow.get(j)
            if c:
                vec[pcol] = -c
        basis.append(vec)
    return basis


class LinearSolver:
    """Cached exact solver for A x = b with A fixed.

    Factors A once into R = T A (R in reduced row-echelon form) and then
    answers solves by x[pivot col of row i] = (T b)_i with free variables
    set to zero. Returns None when the system is inconsistent.
    """

    def __init__(self, rows: list[Row]):
        self.red, self.trans, self.pivots = rref(rows, track=True)
        self.nrows = len(rows)

    def solve(self, b: Row) -> Row | None:
        # d = T b
        x: Row = {}
        r = len(self.pivots)
        for i in range(self.nrows):
            ti = self.trans[i]
            d = _ZERO
            for j, c in ti.items():
                v = b.get(j)
                if v:
                    d += c * v
            if i < r:
                if d:
                    x[self.pivots[i]] = d
            elif d:
                return None  # inconsistent: zero row with nonzero rhs
        # With free variables at zero, R x = d gives x directly on pivots
        # because each reduced row has coefficient 1 on its pivot column and
        # support only on free columns otherwise... that support would
        # contribute; since free vars are zero, x[pivot] = d_i exactly.
        return x
