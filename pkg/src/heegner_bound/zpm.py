"""Linear algebra over Z/p^m: Howell-form spans, Smith invariants, kernels.

Matrices are lists of row lists of ints in [0, p^m).  Every nonzero element
of the ring is unit * p^v, so reduction always pivots on an entry of minimal
valuation (ties: lowest row, then lowest column index -- deterministic).
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

Matrix = List[List[int]]


class ZpmRing:
    """The ring Z/p^m with valuation bookkeeping."""

    def __init__(self, p: int, m: int):
        if p < 2 or m < 1:
            raise ValueError("need prime p >= 2 and m >= 1")
        self.p = p
        self.m = m
        self.q = p**m

    def val(self, a: int) -> int:
        """p-adic valuation of a mod p^m; m for a = 0."""
        a %= self.q
        if a == 0:
            return self.m
        v = 0
        while a % self.p == 0:
            a //= self.p
            v += 1
        return v

    def unit_part(self, a: int) -> int:
        """u with a = u * p^val(a) mod p^m, u a unit (1 for a = 0)."""
        a %= self.q
        if a == 0:
            return 1
        return (a // self.p ** self.val(a)) % self.q

    def inv_unit(self, u: int) -> int:
        return pow(u, -1, self.q)


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(ring: ZpmRing, a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return []
    rows, inner, cols = len(a), len(b), len(b[0])
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai, oi = a[i], out[i]
        for k in range(inner):
            x = ai[k]
            if x == 0:
                continue
            bk = b[k]
            for j in range(cols):
                oi[j] = (oi[j] + x * bk[j]) % ring.q
    return out


def howell_form(ring: ZpmRing, rows: Sequence[Sequence[int]], width: int) -> Matrix:
    """Canonical generating set (Howell form) of the row span in (Z/p^m)^width.

    Pivots are normalized to pure powers of p; entries below a pivot vanish,
    entries above are reduced mod the pivot; annihilator rows p^(m-v) * row
    are folded back in so greedy reduction decides membership.
    """
    work = [[x % ring.q for x in r] for r in rows]
    work = [r for r in work if any(r)]
    result: List[List[int]] = []
    pivots: List[Tuple[int, int]] = []  # (column, valuation)
    col = 0
    while col < width:
        best, best_v = -1, ring.m
        for i, r in enumerate(work):
            v = ring.val(r[col])
            if v < best_v:
                best, best_v = i, v
        if best < 0:
            col += 1
            continue
        row = work.pop(best)
        ui = ring.inv_unit(ring.unit_part(row[col]))
        row = [(x * ui) % ring.q for x in row]  # pivot is now p^best_v
        piv = ring.p**best_v
        for r in work:
            if r[col]:
                mult = r[col] // piv  # exact-ish: leaves r[col] = 0 (val >= best_v)
                for j in range(col, width):
                    r[j] = (r[j] - mult * row[j]) % ring.q
        if best_v > 0:
            ann = [(x * ring.p ** (ring.m - best_v)) % ring.q for x in row]
            if any(ann):
                work.append(ann)
        work = [r for r in work if any(r)]
        result.append(row)
        pivots.append((col, best_v))
        col += 1
    # reduce above-pivot entries modulo the pivot for canonicity
    for idx in range(len(result)):
        c, v = pivots[idx]
        piv = ring.p**v
        for k in range(idx):
            mult = result[k][c] // piv
            if mult:
                for j in range(width):
                    result[k][j] = (result[k][j] - mult * result[idx][j]) % ring.q
    return result


def member(ring: ZpmRing, howell: Matrix, vec: Sequence[int], width: int) -> bool:
    """Membership of vec in the span described by a Howell form."""
    v = [x % ring.q for x in vec]
    for row in howell:
        c = next((j for j, x in enumerate(row) if x), None)
        if c is None or v[c] == 0:
            continue
        pv = ring.val(row[c])
        if ring.val(v[c]) < pv:
            return False
        mult = v[c] // ring.p**pv
        for j in range(width):
            v[j] = (v[j] - mult * row[j]) % ring.q
    return not any(v)


def span_size(ring: ZpmRing, rows: Sequence[Sequence[int]], width: int) -> int:
    """Order of the subgroup spanned by the rows."""
    size = 1
    for row in howell_form(ring, rows, width):
        c = next((j for j, x in enumerate(row) if x), None)
        if c is not None:
            size *= ring.p ** (ring.m - ring.val(row[c]))
    return size


def _snf(ring: ZpmRing, rows: Sequence[Sequence[int]], want_left: bool):
    """Smith normal form by p-adic reduction.  Returns (U or None, vals).

    Row operations are tracked in U when requested; column operations are
    applied but untracked (they do not affect the left kernel).
    """
    a = [[x % ring.q for x in r] for r in rows]
    nr = len(a)
    nc = len(a[0]) if a else 0
    u = identity(nr) if want_left else None
    vals: List[int] = []
    top = 0
    while top < min(nr, nc):
        best, best_v = None, ring.m
        for i in range(top, nr):
            for j in range(top, nc):
                v = ring.val(a[i][j])
                if v < best_v:
                    best, best_v = (i, j), v
        if best is None:
            break
        bi, bj = best
        a[top], a[bi] = a[bi], a[top]
        if u is not None:
            u[top], u[bi] = u[bi], u[top]
        for r in a:
            r[top], r[bj] = r[bj], r[top]
        ui = ring.inv_unit(ring.unit_part(a[top][top]))
        a[top] = [(x * ui) % ring.q for x in a[top]]
        if u is not None:
            u[top] = [(x * ui) % ring.q for x in u[top]]
        piv = ring.p**best_v
        # clear the pivot column (row ops); valuations below are >= best_v
        for i in range(top + 1, nr):
            if a[i][top]:
                mult = a[i][top] // piv
                for j in range(top, nc):
                    a[i][j] = (a[i][j] - mult * a[top][j]) % ring.q
                if u is not None:
                    for j in range(nr):
                        u[i][j] = (u[i][j] - mult * u[top][j]) % ring.q
        # clear the pivot row (column ops); only row `top` changes
        for j in range(top + 1, nc):
            if a[top][j]:
                mult = a[top][j] // piv
                for i in range(top, nr):
                    a[i][j] = (a[i][j] - mult * a[i][top]) % ring.q
        vals.append(best_v)
        top += 1
    return u, vals


def smith_valuations(ring: ZpmRing, rows: Sequence[Sequence[int]]) -> List[int]:
    """Diagonal valuations of the Smith normal form over Z/p^m, ascending."""
    _, vals = _snf(ring, rows, want_left=False)
    return sorted(vals)


def left_kernel(ring: ZpmRing, a: Matrix) -> Matrix:
    """Generators (Howell form) of {x : x*A = 0 over Z/p^m}."""
    nr = len(a)
    if nr == 0:
        return []
    if not a[0]:
        return identity(nr)
    u, vals = _snf(ring, a, want_left=True)
    gens: List[List[int]] = []
    for i, v in enumerate(vals):
        if v > 0:  # p^(m-v) kills the p^v pivot
            ann = ring.p ** (ring.m - v)
            gens.append([(ann * x) % ring.q for x in u[i]])
    for i in range(len(vals), nr):  # zero rows of the diagonal form
        gens.append(list(u[i]))
    return howell_form(ring, gens, nr)


def invariant_exponents(ring: ZpmRing, rows: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """Invariants of the subgroup spanned by rows: exponents x1 >= x2 >= ...

    Smith diagonal p^v contributes a cyclic factor Z/p^(m-v); zeros dropped.
    """
    _, vals = _snf(ring, rows, want_left=False)
    return tuple(sorted((ring.m - v for v in vals if v < ring.m), reverse=True))
