"""Exact linear algebra over Z and over the chain rings O_K / pi^gamma.

Integer matrices get a Smith normal form with both unimodular transforms. Matrices over
a ModRing get a Howell normal form with its left transform, from which kernels, affine
solution sets and precision lifting are derived. Vectors are column vectors throughout;
``A.apply(x)`` is ``A x``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import sympy

from hecke_pm.errors import PrecisionError
from hecke_pm.ring_tower import ModRing, RingElement

logger = logging.getLogger(__name__)


# =============================================================================
# Integer matrices
# =============================================================================


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix, row-major."""

    rows: tuple[tuple[int, ...], ...]
    ncols: int

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: Optional[int] = None) -> "IntMatrix":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise PrecisionError("an empty matrix needs an explicit column count")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise PrecisionError("ragged matrix rows")
        return cls(rows, ncols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls.from_rows([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def from_sympy(cls, M: sympy.Matrix) -> "IntMatrix":
        if any(not x.is_integer for x in M):
            raise PrecisionError("matrix has non-integral entries")
        return cls.from_rows([[int(M[i, j]) for j in range(M.cols)] for i in range(M.rows)], M.cols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(self.nrows, self.ncols, lambda i, j: self.rows[i][j])

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows([[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)], self.nrows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise PrecisionError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        cols = other.transpose().rows
        return IntMatrix.from_rows([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows], other.ncols)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix.from_rows([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix.from_rows([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix.from_rows([[c * a for a in r] for r in self.rows], self.ncols)

    def flatten(self) -> tuple[int, ...]:
        return tuple(x for r in self.rows for x in r)

    def rank(self) -> int:
        return self.to_sympy().rank() if self.nrows and self.ncols else 0

    def dump(self) -> str:
        """Debug format: ``rows cols`` then one row of integers per line."""
        lines = [f"{self.nrows} {self.ncols}"]
        lines += [" ".join(str(x) for x in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "IntMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        nrows, ncols = (int(x) for x in lines[0].split())
        rows = [[int(x) for x in ln.split()] for ln in lines[1 : nrows + 1]]
        return cls.from_rows(rows, ncols)


def smith_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with A = U D V, U and V unimodular, d_1 | d_2 | ... on the diagonal."""
    D = [list(r) for r in A.rows]
    nr, nc = A.nrows, A.ncols
    U = [[int(i == j) for j in range(nr)] for i in range(nr)]
    V = [[int(i == j) for j in range(nc)] for i in range(nc)]

    # Row op on D (row i += k row j) is undone on U by col j -= k col i; column ops dually on V.
    def add_row(i, j, k):
        D[i] = [a + k * b for a, b in zip(D[i], D[j])]
        for r in U:
            r[j] -= k * r[i]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        for r in U:
            r[i], r[j] = r[j], r[i]

    def negate_row(i):
        D[i] = [-a for a in D[i]]
        for r in U:
            r[i] = -r[i]

    def add_col(i, j, k):
        for r in D:
            r[i] += k * r[j]
        V[j] = [a - k * b for a, b in zip(V[j], V[i])]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        V[i], V[j] = V[j], V[i]

    for t in range(min(nr, nc)):
        while True:
            entries = [(abs(D[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if D[i][j]]
            if not entries:
                break
            _, pi, pj = min(entries)
            swap_rows(t, pi)
            swap_cols(t, pj)
            done = True
            for i in range(t + 1, nr):
                q = D[i][t] // D[t][t]
                if q:
                    add_row(i, t, -q)
                if D[i][t]:
                    done = False
            for j in range(t + 1, nc):
                q = D[t][j] // D[t][t]
                if q:
                    add_col(j, t, -q)
                if D[t][j]:
                    done = False
            if not done:
                continue
            bad = next(
                (i for i in range(t + 1, nr) for j in range(t + 1, nc) if D[i][j] % D[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if t < nr and t < nc and D[t][t] < 0:
            negate_row(t)
        if all(D[i][j] == 0 for i in range(t, nr) for j in range(t, nc)):
            break

    return (
        IntMatrix.from_rows(U, nr),
        IntMatrix.from_rows(D, nc),
        IntMatrix.from_rows(V, nc),
    )


def elementary_divisors(A: IntMatrix) -> list[int]:
    _, D, _ = smith_normal_form(A)
    return [D.rows[i][i] for i in range(min(D.nrows, D.ncols)) if D.rows[i][i]]


# =============================================================================
# Chain-ring matrices
# =============================================================================


Vector = tuple[RingElement, ...]


@dataclass(frozen=True)
class ChainRingMatrix:
    """Matrix over a ModRing; every entry shares ``ring``."""

    ring: ModRing
    rows: tuple[Vector, ...]
    ncols: int

    @classmethod
    def from_rows(cls, ring: ModRing, rows: Sequence[Sequence], ncols: Optional[int] = None) -> "ChainRingMatrix":
        rows = tuple(tuple(ring(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise PrecisionError("an empty matrix needs an explicit column count")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise PrecisionError("ragged matrix rows")
        return cls(ring, rows, ncols)

    @classmethod
    def from_int(cls, ring: ModRing, A: IntMatrix) -> "ChainRingMatrix":
        return cls.from_rows(ring, A.rows, A.ncols)

    @classmethod
    def identity(cls, ring: ModRing, n: int) -> "ChainRingMatrix":
        return cls.from_rows(ring, [[int(i == j) for j in range(n)] for i in range(n)], n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def transpose(self) -> "ChainRingMatrix":
        return ChainRingMatrix(
            self.ring, tuple(tuple(r[j] for r in self.rows) for j in range(self.ncols)), self.nrows
        )

    def apply(self, x: Sequence[RingElement]) -> Vector:
        return tuple(_dot(r, x, self.ring) for r in self.rows)

    def __matmul__(self, other: "ChainRingMatrix") -> "ChainRingMatrix":
        cols = other.transpose().rows
        return ChainRingMatrix(self.ring, tuple(tuple(_dot(r, c, self.ring) for c in cols) for r in self.rows), other.ncols)

    def hstack(self, other: "ChainRingMatrix") -> "ChainRingMatrix":
        return ChainRingMatrix(self.ring, tuple(a + b for a, b in zip(self.rows, other.rows)), self.ncols + other.ncols)

    def vstack(self, other: "ChainRingMatrix") -> "ChainRingMatrix":
        return ChainRingMatrix(self.ring, self.rows + other.rows, self.ncols)

    def lift_to(self, ring: ModRing) -> "ChainRingMatrix":
        return ChainRingMatrix(ring, tuple(tuple(x.lift_to(ring) for x in r) for r in self.rows), self.ncols)

    def row_span(self) -> set[Vector]:
        """All elements of the row span (desk scale only)."""
        span = {tuple(self.ring.zero for _ in range(self.ncols))}
        for row in self.rows:
            span = {_add(v, _scale(c, row)) for v in span for c in self.ring.elements()}
        return span


def _dot(a: Sequence[RingElement], b: Sequence[RingElement], ring: ModRing) -> RingElement:
    total = ring.zero
    for x, y in zip(a, b):
        if not x.is_zero() and not y.is_zero():
            total = total + x * y
    return total


def _add(a: Sequence[RingElement], b: Sequence[RingElement]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Sequence[RingElement], b: Sequence[RingElement]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def _scale(c: RingElement, a: Sequence[RingElement]) -> Vector:
    return tuple(c * x for x in a)


def zero_vector(ring: ModRing, n: int) -> Vector:
    return tuple(ring.zero for _ in range(n))


def _quotient(x: RingElement, v: int) -> RingElement:
    """q with x = q * pi^v, for x of valuation at least v."""
    w, unit = x.split()
    return x.parent.pi_power(w - v) * unit


def howell_form(A: ChainRingMatrix) -> tuple[ChainRingMatrix, ChainRingMatrix]:
    """Howell normal form H of the row span of A and T with T A = H.

    Pivots are normalized to pi^v, entries above a pivot are reduced to canonical
    remainders mod pi^v, and every pivot row contributes its annihilator shift
    pi^{gamma - v} * row, so the rows of H with leading zeros span every subspace of
    vectors with those leading zeros.
    """
    ring = A.ring
    gamma = ring.gamma
    n = A.nrows
    pending = [
        (list(row), [ring.one if i == j else ring.zero for j in range(n)])
        for i, row in enumerate(A.rows)
    ]
    pivots: list[tuple[list[RingElement], list[RingElement], int, int]] = []

    for col in range(A.ncols):
        best, best_v = None, gamma
        for idx, (h, _) in enumerate(pending):
            v = h[col].valuation()
            if v < best_v:
                best, best_v = idx, v
        if best is None:
            continue
        h, t = pending.pop(best)
        v, unit = h[col].split()
        inv = unit.inverse()
        h, t = list(_scale(inv, h)), list(_scale(inv, t))
        remaining = []
        for oh, ot in pending:
            x = oh[col]
            if not x.is_zero():
                q = _quotient(x, v)
                oh, ot = list(_sub(oh, _scale(q, h))), list(_sub(ot, _scale(q, t)))
            remaining.append((oh, ot))
        if v > 0:
            shift = ring.pi_power(gamma - v)
            remaining.append((list(_scale(shift, h)), list(_scale(shift, t))))
        pending = [(oh, ot) for oh, ot in remaining if any(not x.is_zero() for x in oh)]
        pivots.append((h, t, col, v))

    for k, (h, t, col, v) in enumerate(pivots):
        for i in range(k):
            hi, ti, ci, vi = pivots[i]
            x = hi[col]
            excess = x - x.remainder(v)
            if not excess.is_zero():
                q = _quotient(excess, v)
                pivots[i] = (list(_sub(hi, _scale(q, h))), list(_sub(ti, _scale(q, t))), ci, vi)

    H = ChainRingMatrix(ring, tuple(tuple(h) for h, _, _, _ in pivots), A.ncols)
    T = ChainRingMatrix(ring, tuple(tuple(t) for _, t, _, _ in pivots), n)
    return H, T


def _pivot(row: Sequence[RingElement]) -> Optional[int]:
    return next((j for j, x in enumerate(row) if not x.is_zero()), None)


def kernel(A: ChainRingMatrix) -> list[Vector]:
    """Generators of {x : A x = 0}; an empty list means the kernel is zero."""
    ring = A.ring
    At = A.transpose()
    augmented = At.hstack(ChainRingMatrix.identity(ring, A.ncols))
    H, _ = howell_form(augmented)
    r = A.nrows
    return [row[r:] for row in H.rows if all(x.is_zero() for x in row[:r])]


@dataclass(frozen=True)
class AffineSolution:
    """particular + span(kernel) inside ring^n."""

    ring: ModRing
    particular: Vector
    kernel: tuple[Vector, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.particular)

    def points(self) -> Iterator[Vector]:
        """Every solution exactly once, in a deterministic order."""
        ring = self.ring
        if not self.kernel:
            yield self.particular
            return
        H, _ = howell_form(ChainRingMatrix(ring, self.kernel, self.dimension))
        choices = []
        for row in H.rows:
            v = row[_pivot(row)].valuation()
            choices.append(ring.representatives(ring.gamma - v))
        seen = set()
        for coeffs in itertools.product(*choices):
            point = self.particular
            for c, row in zip(coeffs, H.rows):
                if not c.is_zero():
                    point = _add(point, _scale(c, row))
            if point not in seen:
                seen.add(point)
                yield point

    def count(self) -> int:
        ring = self.ring
        if not self.kernel:
            return 1
        H, _ = howell_form(ChainRingMatrix(ring, self.kernel, self.dimension))
        total = 1
        for row in H.rows:
            total *= ring.residue_size ** (ring.gamma - row[_pivot(row)].valuation())
        return total

    def contains(self, x: Sequence[RingElement]) -> bool:
        diff = _sub(x, self.particular)
        if all(d.is_zero() for d in diff):
            return True
        if not self.kernel:
            return False
        K = ChainRingMatrix(self.ring, self.kernel, self.dimension).transpose()
        return solve_affine(K, diff) is not None


def solve_affine(A: ChainRingMatrix, b: Sequence[RingElement]) -> Optional[AffineSolution]:
    """All x with A x = b, or None when b is outside the column span of A."""
    ring = A.ring
    if len(b) != A.nrows:
        raise PrecisionError(f"right-hand side has {len(b)} entries for {A.nrows} rows")
    b = tuple(ring(x) for x in b)
    H, T = howell_form(A.transpose())
    residual = list(b)
    y = [ring.zero] * H.nrows
    pivot_of = {}
    for k, row in enumerate(H.rows):
        j = _pivot(row)
        pivot_of[j] = (k, row[j].valuation())
    for j in range(A.nrows):
        x = residual[j]
        if x.is_zero():
            continue
        if j not in pivot_of:
            return None
        k, v = pivot_of[j]
        if x.valuation() < v:
            return None
        q = _quotient(x, v)
        residual = list(_sub(residual, _scale(q, H.rows[k])))
        y[k] = y[k] + q
    particular = tuple(_dot([y[k] for k in range(H.nrows)], [T.rows[k][i] for k in range(H.nrows)], ring) for i in range(A.ncols))
    return AffineSolution(ring, particular, tuple(kernel(A)))


def lift_solutions(A: ChainRingMatrix, b: Sequence[RingElement], known: AffineSolution) -> Optional[AffineSolution]:
    """Solutions of A x = b over A.ring that reduce into ``known`` (an exact solution set one precision lower).

    Writing x = x0 + K t + pi^g z with g the pi-adic precision of the lower ring turns the
    problem into a linear system in (t, z).
    """
    ring = A.ring
    lower = known.ring
    if lower.spec != ring.spec or lower.m >= ring.m:
        raise PrecisionError(f"cannot lift solutions from {lower} to {ring}")
    x0 = tuple(x.lift_to(ring) for x in known.particular)
    K = [tuple(x.lift_to(ring) for x in gen) for gen in known.kernel]
    shift = ring.pi_power(lower.gamma)
    n = A.ncols
    columns = [A.apply(gen) for gen in K]
    columns += [tuple(shift * A.rows[i][j] for i in range(A.nrows)) for j in range(n)]
    system = ChainRingMatrix(ring, tuple(tuple(col[i] for col in columns) for i in range(A.nrows)), len(columns))
    rhs = _sub(tuple(ring(x) for x in b), A.apply(x0))
    sol = solve_affine(system, rhs)
    if sol is None:
        return None

    def expand(tz: Sequence[RingElement], base: Vector) -> Vector:
        out = base
        for c, gen in zip(tz[: len(K)], K):
            out = _add(out, _scale(c, gen))
        z = tz[len(K):]
        return _add(out, _scale(shift, z))

    zero = zero_vector(ring, n)
    gens = []
    for g in sol.kernel:
        vec = expand(g, zero)
        if any(not x.is_zero() for x in vec):
            gens.append(vec)
    return AffineSolution(ring, expand(sol.particular, x0), tuple(gens))
