"""Hecke algebras of cusp-form spaces as integer matrix algebras in a saturated basis.

A ``SpaceBasis`` keeps the labelled integral generators it was built from (each with its
own weight and character) together with a saturated basis S = P G of the same rational
span. Hecke operators are solved on the generators, where the q-expansion formula applies
weight by weight, and conjugated into the saturated basis, where reduction mod p^m is
faithful. Forms are coordinate row vectors c with q-expansion c S; operators act by
c -> c M.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Optional, Sequence, Union

import sympy

from hecke_pm.errors import BasisError, NotInSpanError, PreconditionError, PrecisionError
from hecke_pm.linalg import ChainRingMatrix, IntMatrix, elementary_divisors, smith_normal_form, solve_affine
from hecke_pm.qexp import QExpansion, direct_sum_bound, hecke_Tn, sturm_bound
from hecke_pm.ring_tower import ModRing, RingElement
from hecke_pm.services.matrix_store import MatrixStore
from hecke_pm.services.observability import span

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpaceMember:
    """One summand S_k(Gamma(M), chi) of a (possibly direct-sum) space."""

    level: int
    weight: int
    group: str
    character: Optional[str] = None

    def describe(self) -> str:
        chi = self.character or "none"
        return f"level={self.level} weight={self.weight} group={self.group} char={chi}"


def _to_rational(v) -> sympy.Rational:
    v = Fraction(v)
    return sympy.Rational(v.numerator, v.denominator)


def _rational_rows(M: sympy.Matrix) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(M.cols)) for i in range(M.rows))


def _solve_rows(inverse: sympy.Matrix, pivots: Sequence[int], rows: Sequence[Sequence[int]], target: Sequence) -> list[Fraction]:
    """x with x * rows = target, from the pivot-column inverse; verified on every column."""
    t = sympy.Matrix([[_to_rational(target[j]) for j in pivots]])
    x = t * inverse
    coeffs = [Fraction(int(v.p), int(v.q)) for v in x]
    for col, expected in enumerate(target):
        if sum(c * r[col] for c, r in zip(coeffs, rows)) != expected:
            raise NotInSpanError(f"expansion is not in the rational span (mismatch at a_{col + 1})")
    return coeffs


@dataclass(frozen=True, eq=False)
class SpaceBasis:
    """Integral generators of a Hecke-stable space and a saturated basis of their span."""

    generators: tuple[QExpansion, ...]
    group: str
    truncation: int
    rows: tuple[tuple[int, ...], ...]
    transition: tuple[tuple[Fraction, ...], ...]
    elementary_divisors: tuple[int, ...]
    warnings: tuple[str, ...] = field(default=())

    @classmethod
    def from_generators(cls, generators: Sequence[QExpansion], group: str = "g0") -> "SpaceBasis":
        if not generators:
            raise BasisError("a space needs at least one generator")
        truncation = min(g.truncation for g in generators)
        for g in generators:
            if g.domain is not None or any(not isinstance(c, int) for c in g.coefficients):
                raise BasisError(f"basis row {g.label or '?'} must have integer coefficients")
            if isinstance(g.weight, tuple):
                raise BasisError(f"basis row {g.label or '?'} needs a single weight")
        G = [list(g.coefficients[1 : truncation + 1]) for g in generators]
        with span("hecke.saturate", rows=len(G), truncation=truncation):
            rows, transition, divisors = _saturate(G)
        warnings = ()
        if any(d != 1 for d in divisors):
            message = f"saturation repaired: elementary divisors {list(divisors)}"
            logger.warning(message)
            warnings = (message,)
        return cls(
            generators=tuple(g.truncate(truncation) for g in generators),
            group=group,
            truncation=truncation,
            rows=rows,
            transition=transition,
            elementary_divisors=divisors,
            warnings=warnings,
        )

    @classmethod
    def direct_sum(cls, spaces: Sequence["SpaceBasis"]) -> "SpaceBasis":
        weights = [m.weight for s in spaces for m in s.members]
        if len(set(weights)) != len(weights):
            raise BasisError(f"direct-sum members need distinct weights, got {weights}")
        group = "g1" if any(s.group == "g1" for s in spaces) else "g0"
        return cls.from_generators([g for s in spaces for g in s.generators], group)

    # -- metadata --------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.rows)

    @property
    def level(self) -> int:
        return lcm(*(g.level for g in self.generators))

    @cached_property
    def members(self) -> tuple[SpaceMember, ...]:
        seen: dict[SpaceMember, None] = {}
        for g in self.generators:
            chi = g.character.spec() if g.character is not None and not g.character.is_trivial() else None
            seen.setdefault(SpaceMember(g.level, g.weight, self.group, chi), None)
        return tuple(seen)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(sorted({g.weight for g in self.generators}))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.generators)

    def generator(self, label: str) -> QExpansion:
        for g in self.generators:
            if g.label == label:
                return g
        raise BasisError(f"no generator labelled {label!r}; have {list(self.labels)}")

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.group}|{self.truncation}\n".encode())
        for g in self.generators:
            chi = g.character.spec() if g.character is not None else "none"
            h.update(f"{g.label}|{g.level}|{g.weight}|{chi}|".encode())
            h.update(",".join(str(c) for c in g.coefficients).encode())
            h.update(b"\n")
        return h.hexdigest()

    def describe(self) -> str:
        members = "; ".join(m.describe() for m in self.members)
        return f"{members} trunc={self.truncation} dim={self.dimension}"

    # -- injectivity -------------------------------------------------------------

    @cached_property
    def injectivity_bound(self) -> int:
        """Truncation at which q-expansions determine forms, audited by a rank check."""
        weights = self.weights
        if len(weights) == 1:
            bound = sturm_bound(self.level, weights[0], self.group)
        else:
            bound = direct_sum_bound(self.level, max(weights), self.group)
        bound = max(bound, 1)
        while True:
            if bound > self.truncation:
                raise PrecisionError(
                    f"coefficient matrix has rank < {self.dimension} within truncation {self.truncation}"
                )
            if IntMatrix.from_rows([r[:bound] for r in self.rows], bound).rank() == self.dimension:
                return bound
            if bound == self.truncation:
                raise PrecisionError(f"coefficient matrix has rank < {self.dimension} within truncation {self.truncation}")
            logger.info("rank check failed at bound %d; doubling", bound)
            bound = min(2 * bound, self.truncation)

    # -- rational solving ---------------------------------------------------------

    @cached_property
    def _generator_solver(self) -> tuple[sympy.Matrix, tuple[int, ...]]:
        return _pivot_inverse([g.coefficients[1:] for g in self.generators], self.dimension)

    @cached_property
    def _basis_solver(self) -> tuple[sympy.Matrix, tuple[int, ...]]:
        return _pivot_inverse(self.rows, self.dimension)

    def generator_coordinates(self, values: Sequence) -> list[Fraction]:
        inverse, pivots = self._generator_solver
        rows = [g.coefficients[1 : len(values) + 1] for g in self.generators]
        return _solve_rows(inverse, pivots, rows, values)

    def basis_coordinates(self, values: Sequence) -> list[Fraction]:
        inverse, pivots = self._basis_solver
        rows = [r[: len(values)] for r in self.rows]
        return _solve_rows(inverse, pivots, rows, values)

    @cached_property
    def transition_matrix(self) -> sympy.Matrix:
        return sympy.Matrix(self.dimension, self.dimension, lambda i, j: _to_rational(self.transition[i][j]))


def _pivot_inverse(rows: Sequence[Sequence[int]], rank: int) -> tuple[sympy.Matrix, tuple[int, ...]]:
    """Inverse of the d x d submatrix on the first independent columns."""
    length = len(rows[0])
    width = rank
    while True:
        M = sympy.Matrix([list(r[:width]) for r in rows])
        _, pivots = M.rref()
        if len(pivots) == rank or width >= length:
            break
        width = min(2 * width, length)
    if len(pivots) < rank:
        raise BasisError(f"rows have rank {len(pivots)} < {rank}")
    sub = sympy.Matrix([[r[j] for j in pivots] for r in rows])
    return sub.inv(), tuple(pivots)


def _saturate(G: list[list[int]]) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[Fraction, ...], ...], tuple[int, ...]]:
    """Saturated basis S = P G of the row span of G, via Smith form on a column window."""
    d, B = len(G), len(G[0])
    rank = sympy.Matrix(G).rank()
    if rank < d:
        raise BasisError(f"basis rows are rationally dependent: rank {rank} < {d}")
    width = d
    while IntMatrix.from_rows([r[:width] for r in G], width).rank() < d:
        width = min(2 * width, B)
    while True:
        window = IntMatrix.from_rows([r[:width] for r in G], width)
        U, D, _ = smith_normal_form(window)
        divisors = tuple(D.rows[i][i] for i in range(d))
        P = sympy.diag(*[sympy.Rational(1, x) for x in divisors]) * U.to_sympy().inv()
        S = P * sympy.Matrix(G)
        if all(x.is_integer for x in S):
            break
        if width >= B:
            raise BasisError("saturation failed on the full truncation")
        width = min(2 * width, B)
        logger.debug("saturation window too narrow; widening to %d columns", width)
    rows = tuple(tuple(int(S[i, j]) for j in range(B)) for i in range(d))
    return rows, _rational_rows(P), divisors


# =============================================================================
# Hecke operators
# =============================================================================


@dataclass(frozen=True)
class HeckeOperator:
    """Matrix of an operator in the saturated basis (row convention: c -> c M)."""

    tag: str
    matrix: IntMatrix


class HeckeMatrixCache:
    """Thread-safe memo of Hecke matrices keyed by (basis digest, tag), optionally backed by a MatrixStore."""

    def __init__(self, store: Optional[MatrixStore] = None):
        self.store = store
        self._matrices: dict[tuple[str, str], IntMatrix] = {}
        self._lock = threading.Lock()

    def get(self, digest: str, tag: str) -> Optional[IntMatrix]:
        key = (digest, tag)
        matrix = self._matrices.get(key)
        if matrix is None and self.store is not None:
            stored = self.store.get_matrix(digest, tag)
            if stored is not None:
                matrix = stored.matrix
                with self._lock:
                    self._matrices.setdefault(key, matrix)
        return matrix

    def put(self, digest: str, tag: str, matrix: IntMatrix) -> IntMatrix:
        with self._lock:
            matrix = self._matrices.setdefault((digest, tag), matrix)
        if self.store is not None:
            self.store.save_matrix(digest, tag, matrix)
        return matrix

    def __len__(self) -> int:
        return len(self._matrices)


DEFAULT_CACHE = HeckeMatrixCache()


def hecke_matrix(S: SpaceBasis, n: int, cache: Optional[HeckeMatrixCache] = None) -> HeckeOperator:
    cache = DEFAULT_CACHE if cache is None else cache
    tag = f"T{n}"
    cached = cache.get(S.digest, tag)
    if cached is not None:
        return HeckeOperator(tag, cached)
    bound = S.injectivity_bound
    if S.truncation < n * bound:
        raise PrecisionError(f"T_{n} needs truncation {n * bound}, basis has {S.truncation}")
    with span("hecke.matrix", n=n, level=S.level, dim=S.dimension):
        out = S.truncation // n
        A = []
        for g in S.generators:
            image = hecke_Tn(g, n, out)
            try:
                A.append(S.generator_coordinates(image.coefficients[1:]))
            except NotInSpanError as exc:
                raise BasisError(f"span is not stable under T_{n}: image of {g.label or 'generator'} {exc}") from exc
        A_sym = sympy.Matrix([[_to_rational(x) for x in row] for row in A])
        P = S.transition_matrix
        M = P * A_sym * P.inv()
        if not all(x.is_integer for x in M):
            raise BasisError(f"T_{n} is not integral on the saturated lattice")
        matrix = IntMatrix.from_sympy(M)
    logger.debug("computed T_%d on %s", n, S.describe())
    return HeckeOperator(tag, cache.put(S.digest, tag, matrix))


def stroke_matrix(S: SpaceBasis, ell: int, cache: Optional[HeckeMatrixCache] = None) -> HeckeOperator:
    """[ell] = ell (T_ell^2 - T_{ell^2}), uniform across the weights of a direct sum."""
    if S.level % ell == 0:
        raise PreconditionError(f"stroke operator needs ell prime to the level {S.level}")
    t = hecke_matrix(S, ell, cache).matrix
    t2 = hecke_matrix(S, ell * ell, cache).matrix
    return HeckeOperator(f"[{ell}]", ((t @ t) - t2).scale(ell))


def algebra_rank(S: SpaceBasis, n_max: int, cache: Optional[HeckeMatrixCache] = None) -> int:
    """Z-rank of the span of T_1..T_{n_max} inside the d x d matrices."""
    if n_max < S.injectivity_bound:
        logger.warning("n_max=%d is below the injectivity bound %d", n_max, S.injectivity_bound)
    flat = [hecke_matrix(S, n, cache).matrix.flatten() for n in range(1, n_max + 1)]
    rank = len(elementary_divisors(IntMatrix.from_rows(flat)))
    if rank != S.dimension:
        logger.warning("Hecke algebra rank %d differs from dimension %d (n_max=%d)", rank, S.dimension, n_max)
    return rank


def pairing_matrix(S: SpaceBasis, n_max: int) -> IntMatrix:
    """Entry (i, j) = a_i(s_j) = a_1(T_i s_j) for the saturated basis s_j."""
    if n_max > S.truncation:
        raise PrecisionError(f"pairing up to {n_max} exceeds truncation {S.truncation}")
    return IntMatrix.from_rows([[row[i - 1] for row in S.rows] for i in range(1, n_max + 1)], S.dimension)


# =============================================================================
# Forms as coordinates
# =============================================================================


Scalar = Union[int, RingElement]


@dataclass(frozen=True, eq=False)
class CoefficientForm:
    """A form c S with coordinates in a ModRing (or integers when ``ring`` is None)."""

    basis: SpaceBasis
    coordinates: tuple
    ring: Optional[ModRing] = None
    label: str = ""

    def __eq__(self, other):
        if not isinstance(other, CoefficientForm):
            return NotImplemented
        return self.basis is other.basis and self.ring == other.ring and self.coordinates == other.coordinates

    def __hash__(self):
        return hash((self.basis.digest, self.ring, self.coordinates))

    @property
    def zero(self) -> Scalar:
        return 0 if self.ring is None else self.ring.zero

    @cached_property
    def values(self) -> tuple:
        """a_1..a_B."""
        out = []
        for i in range(self.basis.truncation):
            total = self.zero
            for c, row in zip(self.coordinates, self.basis.rows):
                if row[i]:
                    total = total + c * row[i]
            out.append(total)
        return tuple(out)

    def value(self, n: int) -> Scalar:
        if not 1 <= n <= self.basis.truncation:
            raise PrecisionError(f"a_{n} outside truncation {self.basis.truncation}")
        return self.values[n - 1]

    def apply(self, op: HeckeOperator) -> "CoefficientForm":
        M = op.matrix.rows
        d = self.basis.dimension
        coords = []
        for j in range(d):
            total = self.zero
            for i in range(d):
                if M[i][j] and self.coordinates[i] != 0:
                    total = total + self.coordinates[i] * M[i][j]
            coords.append(total)
        return CoefficientForm(self.basis, tuple(coords), self.ring)

    def scale(self, c: Scalar) -> "CoefficientForm":
        return CoefficientForm(self.basis, tuple(c * x for x in self.coordinates), self.ring, self.label)

    def __add__(self, other: "CoefficientForm") -> "CoefficientForm":
        return CoefficientForm(self.basis, tuple(a + b for a, b in zip(self.coordinates, other.coordinates)), self.ring)

    def __sub__(self, other: "CoefficientForm") -> "CoefficientForm":
        return CoefficientForm(self.basis, tuple(a - b for a, b in zip(self.coordinates, other.coordinates)), self.ring)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)

    def reduce(self, ring: ModRing) -> "CoefficientForm":
        if self.ring is None:
            coords = tuple(ring(c) for c in self.coordinates)
        else:
            coords = tuple(c.reduce_to(ring) if c.parent.spec == ring.spec else ring(c) for c in self.coordinates)
        return CoefficientForm(self.basis, coords, ring, self.label)

    def as_qexpansion(self) -> QExpansion:
        weights = self.basis.weights
        return QExpansion(
            (self.zero,) + self.values,
            level=self.basis.level,
            weight=weights[0] if len(weights) == 1 else weights,
            domain=self.ring,
            label=self.label,
        )

    def coordinate_text(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coordinates) + ")"


def form_from_generator(S: SpaceBasis, label: str) -> CoefficientForm:
    return reduce_form(S, S.generator(label))


def reduce_form(S: SpaceBasis, f: QExpansion) -> CoefficientForm:
    """Integral coordinates of an integral expansion in the saturated basis."""
    if f.truncation < S.truncation:
        raise PrecisionError(f"{f.label or 'form'} has truncation {f.truncation} < {S.truncation}")
    coords = S.basis_coordinates(f.coefficients[1 : S.truncation + 1])
    if any(c.denominator != 1 for c in coords):
        raise NotInSpanError(f"{f.label or 'form'} is not in the integral lattice of the space")
    return CoefficientForm(S, tuple(int(c) for c in coords), None, f.label)


def form_with_coefficients(S: SpaceBasis, values: Sequence, ring: ModRing) -> CoefficientForm:
    """The form of S(ring) with a_n = values[n-1]; raises NotInSpanError when there is none."""
    L = len(values)
    if L > S.truncation:
        raise PrecisionError(f"{L} values exceed truncation {S.truncation}")
    A = ChainRingMatrix.from_rows(ring, [[row[i] for row in S.rows] for i in range(L)], S.dimension)
    solution = solve_affine(A, [ring(v) for v in values])
    if solution is None:
        raise NotInSpanError(f"values are not the coefficients of a form in {S.describe()} over {ring}")
    if solution.kernel:
        logger.warning("%d values do not determine the form over %s; returning the canonical solution", L, ring)
    return CoefficientForm(S, solution.particular, ring)


def lift_form(f: CoefficientForm) -> CoefficientForm:
    """Least non-negative integral lift of the coordinates."""
    if f.ring is None:
        return f
    if not f.ring.is_base:
        raise PreconditionError(f"lifting from {f.ring} to characteristic zero is only supported over Z/p^m")
    return CoefficientForm(f.basis, tuple(c.coords[0] for c in f.coordinates), None, f.label)
