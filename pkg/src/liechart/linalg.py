"""Exact row reduction over the rationals.

Pivoting is deterministic: columns are scanned left to right and the first
row (top to bottom) with a nonzero entry in the current column is the pivot.
Matrices are lists of rows; rows are lists of ``mpq``.
"""
from dataclasses import dataclass

from .rational import Q


@dataclass
class Echelon:
    """Reduced row echelon form of an augmented or plain matrix."""

    rows: list
    pivots: list  # pivot column of each nonzero row, increasing
    ncols: int

    @property
    def rank(self):
        return len(self.pivots)

    @property
    def free(self):
        pv = set(self.pivots)
        return [j for j in range(self.ncols) if j not in pv]


def rref(matrix, ncols=None):
    """Reduced row echelon form; pivots normalized to 1."""
    rows = [[Q(x) for x in r] for r in matrix]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((k for k in range(r, len(rows)) if rows[k][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        prow = [x * inv for x in rows[r]]
        rows[r] = prow
        nz = [j for j in range(c, len(prow)) if prow[j]]
        for k in range(len(rows)):
            if k != r:
                f = rows[k][c]
                if f:
                    rk = rows[k]
                    for j in nz:
                        rk[j] -= f * prow[j]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return Echelon(rows[:r], pivots, ncols)


def nullspace(matrix, ncols):
    """Kernel basis: one vector per free column, with a 1 in that column.

    With the fixed column order the first nonzero entry of every vector is
    that 1, so each vector is normalized to leading entry 1.
    """
    ech = rref(matrix, ncols) if matrix else Echelon([], [], ncols)
    basis = []
    for f in ech.free:
        v = [Q(0)] * ncols
        v[f] = Q(1)
        for row, pc in zip(ech.rows, ech.pivots):
            if row[f]:
                v[pc] = -row[f]
        basis.append(v)
    return basis


class Inconsistent(ValueError):
    """Raised by :func:`solve` when b is not in the image; ``rows`` lists the
    indices of equations (in the input order) that cannot be satisfied."""

    def __init__(self, rows):
        super().__init__(f"inconsistent linear system (equations {rows})")
        self.rows = rows


def solve(matrix, rhs, ncols):
    """One solution of ``matrix @ x = rhs`` with free variables set to zero,
    plus the kernel basis. Raises :class:`Inconsistent`."""
    if not matrix:
        return [Q(0)] * ncols, nullspace([], ncols)
    ech = rref([list(r) + [Q(b)] for r, b in zip(matrix, rhs)], ncols + 1)
    if ncols in ech.pivots:
        # redo with an identity tracker to name the offending equations
        m = len(matrix)
        aug = [list(r) + [Q(b)] + [Q(int(k == i)) for k in range(m)]
               for i, (r, b) in enumerate(zip(matrix, rhs))]
        full = rref(aug, ncols + 1)
        tracker = full.rows[full.pivots.index(ncols)][ncols + 1:]
        raise Inconsistent([i for i, t in enumerate(tracker) if t])
    x = [Q(0)] * ncols
    kernel = []
    free = [j for j in range(ncols) if j not in set(ech.pivots)]
    for row, pc in zip(ech.rows, ech.pivots):
        x[pc] = row[ncols]
    for f in free:
        v = [Q(0)] * ncols
        v[f] = Q(1)
        for row, pc in zip(ech.rows, ech.pivots):
            if row[f]:
                v[pc] = -row[f]
        kernel.append(v)
    return x, kernel


def matvec(matrix, v):
    return [sum((a * b for a, b in zip(row, v)), Q(0)) for row in matrix]


def rank(matrix, ncols=None):
    if not matrix:
        return 0
    return rref(matrix, ncols).rank


def inverse(matrix):
    n = len(matrix)
    aug = [list(r) + [Q(1) if i == j else Q(0) for j in range(n)] for i, r in enumerate(matrix)]
    ech = rref(aug, n)
    if ech.rank < n:
        raise ValueError("matrix is singular")
    return [row[n:] for row in ech.rows]
