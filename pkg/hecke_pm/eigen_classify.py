"""Weak, dc-weak and strong eigenforms mod p^m and their eigenvalue systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Sequence, Union

import sympy

from hecke_pm.characters import DirichletCharacter
from hecke_pm.errors import NotAUnitError, PreconditionError, PrecisionError
from hecke_pm.hecke_algebra import (
    CoefficientForm,
    HeckeMatrixCache,
    SpaceBasis,
    hecke_matrix,
    stroke_matrix,
)
from hecke_pm.linalg import AffineSolution, ChainRingMatrix, lift_solutions, solve_affine
from hecke_pm.qexp import QExpansion, reduce_mod
from hecke_pm.ring_tower import ModRing, RingElement, congruent_mod_pm
from hecke_pm.services.observability import span

logger = logging.getLogger(__name__)

RESIDUAL_IRREDUCIBILITY = "unknown"


@dataclass(frozen=True)
class EigenSystem:
    """n -> f(T_n) for n <= bound coprime to ``away_from``."""

    ring: ModRing
    away_from: int
    bound: int
    values: tuple[tuple[int, RingElement], ...]
    provenance: str = "weak"
    level: int = 1
    weight: Union[int, tuple[int, ...], None] = None
    character: Optional[DirichletCharacter] = None
    strokes: tuple[tuple[int, RingElement], ...] = ()

    def value(self, n: int) -> RingElement:
        for k, v in self.values:
            if k == n:
                return v
        raise PrecisionError(f"T_{n} is not in the system (away from {self.away_from}, bound {self.bound})")

    def has(self, n: int) -> bool:
        return any(k == n for k, _ in self.values)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.values)

    def sort_key(self) -> tuple:
        return tuple((n, v.coords) for n, v in self.values)

    def is_multiplicative(self) -> bool:
        table = dict(self.values)
        if table.get(1) != self.ring.one:
            return False
        for n in table:
            for r in table:
                if n < r and gcd(n, r) == 1 and n * r in table and table[n] * table[r] != table[n * r]:
                    return False
        return True

    def describe(self) -> str:
        return " ".join(f"T{n}={v}" for n, v in self.values)


def hecke_indices(away_from: int, bound: int) -> list[int]:
    return [n for n in range(1, bound + 1) if gcd(n, away_from) == 1]


def default_away_from(S: SpaceBasis, p: int) -> int:
    return S.level * p


def _normalized(f: CoefficientForm) -> CoefficientForm:
    if f.ring is None:
        raise PrecisionError("eigenform tests need coefficients in a ModRing")
    a1 = f.value(1)
    if not a1.is_unit():
        raise NotAUnitError(f"a_1 = {a1} is not a unit; the form cannot be normalized")
    return f if a1 == f.ring.one else f.scale(a1.inverse())


def _system(f: CoefficientForm, away_from: int, bound: int, provenance: str, strokes=()) -> EigenSystem:
    S = f.basis
    weights = S.weights
    characters = {g.character for g in S.generators}
    return EigenSystem(
        ring=f.ring,
        away_from=away_from,
        bound=bound,
        values=tuple((n, f.value(n)) for n in hecke_indices(away_from, bound)),
        provenance=provenance,
        level=S.level,
        weight=weights[0] if len(weights) == 1 else weights,
        character=characters.pop() if len(characters) == 1 else None,
        strokes=tuple(strokes),
    )


def eigen_defects(
    f: CoefficientForm, away_from: int, bound: int, cache: Optional[HeckeMatrixCache] = None
) -> list[int]:
    """Indices n <= bound coprime to ``away_from`` with T_n f != f(T_n) f."""
    f = _normalized(f)
    failing = []
    for n in hecke_indices(away_from, bound):
        image = f.apply(hecke_matrix(f.basis, n, cache))
        if image != f.scale(f.value(n)):
            failing.append(n)
    return failing


def is_weak_eigenform(
    f: CoefficientForm, away_from: int, bound: int, cache: Optional[HeckeMatrixCache] = None
) -> Optional[EigenSystem]:
    f = _normalized(f)
    failing = eigen_defects(f, away_from, bound, cache)
    if failing:
        logger.debug("not an eigenform: T_n fails for n in %s", failing)
        return None
    return _system(f, away_from, bound, "weak")


def is_dc_weak_eigenform(
    f: CoefficientForm, away_from: int, bound: int, cache: Optional[HeckeMatrixCache] = None
) -> Optional[EigenSystem]:
    """Weak-eigen test on a direct sum of weights, also recording the stroke eigenvalues [ell]."""
    f = _normalized(f)
    if eigen_defects(f, away_from, bound, cache):
        return None
    strokes = []
    S = f.basis
    for ell in sympy.primerange(2, int(bound**0.5) + 1):
        if gcd(ell, away_from) != 1 or S.truncation < ell * ell * S.injectivity_bound:
            continue
        image = f.apply(stroke_matrix(S, ell, cache))
        eigenvalue = ell * (f.value(ell) * f.value(ell) - f.value(ell * ell))
        if image != f.scale(eigenvalue):
            logger.debug("stroke operator [%d] fails on the direct-sum form", ell)
            return None
        strokes.append((ell, eigenvalue))
    return _system(f, away_from, bound, "dc-weak", strokes)


# =============================================================================
# Enumeration
# =============================================================================


def _functional(S: SpaceBasis, n: int, ring: ModRing) -> list[RingElement]:
    """Coordinates -> a_n."""
    return [ring(row[n - 1]) for row in S.rows]


def _eigen_rows(M, lam: RingElement, ring: ModRing) -> list[list[RingElement]]:
    """Rows of M^T - lam I acting on coordinate column vectors."""
    d = len(M)
    return [[ring(M[k][i]) - (lam if i == k else ring.zero) for k in range(d)] for i in range(d)]


def _residue_layer(S, ring1, indices, matrices) -> list[tuple[RingElement, ...]]:
    d = S.dimension
    r1 = _functional(S, 1, ring1)
    branches: list[tuple[list, list, AffineSolution]] = []
    sol = solve_affine(ChainRingMatrix.from_rows(ring1, [r1], d), [ring1.one])
    if sol is None:
        return []
    branches.append(([r1], [ring1.one], sol))
    for n in indices:
        rn = _functional(S, n, ring1)
        grown = []
        for rows, rhs, _ in branches:
            for lam in ring1.residue_elements():
                new_rows = rows + _eigen_rows(matrices[n], lam, ring1) + [rn]
                new_rhs = rhs + [ring1.zero] * d + [lam]
                sol = solve_affine(ChainRingMatrix.from_rows(ring1, new_rows, d), new_rhs)
                if sol is not None:
                    grown.append((new_rows, new_rhs, sol))
        branches = grown
        logger.debug("after T_%d: %d residual eigen systems", n, len(branches))
    points = []
    for _, _, sol in branches:
        points.extend(sol.points())
    return points


def _lift_layer(S, ring_hi, points, indices, matrices) -> list[tuple[RingElement, ...]]:
    d = S.dimension
    r1 = _functional(S, 1, ring_hi)
    out = []
    for f0 in points:
        lower = f0[0].parent
        x0 = [x.lift_to(ring_hi) for x in f0]
        rows, rhs = [r1], [ring_hi.one]
        for n in indices:
            rn = _functional(S, n, ring_hi)
            lam = sum((a * b for a, b in zip(rn, x0)), ring_hi.zero)
            base = _eigen_rows(matrices[n], lam, ring_hi)
            for i in range(d):
                rows.append([base[i][k] - x0[i] * rn[k] for k in range(d)])
                rhs.append(-(lam * x0[i]))
        A = ChainRingMatrix.from_rows(ring_hi, rows, d)
        sol = lift_solutions(A, rhs, AffineSolution(lower, tuple(f0), ()))
        if sol is not None:
            out.extend(sol.points())
    return out


def enumerate_weak_eigenforms(
    S: SpaceBasis,
    ring: ModRing,
    away_from: Optional[int] = None,
    bound: Optional[int] = None,
    cache: Optional[HeckeMatrixCache] = None,
) -> list[tuple[CoefficientForm, EigenSystem]]:
    """Every normalized weak eigenform of S(ring) away from ``away_from``, once each.

    The residue layer is found by simultaneous linear conditions for every choice of
    eigenvalues; each higher precision layer linearizes T_n x - a_n(x) x = 0 around the
    already known lower-precision form and lifts the solution set.
    """
    if ring.spec.kind != "unramified":
        raise PreconditionError(f"enumeration needs an unramified coefficient ring, got {ring}")
    away_from = default_away_from(S, ring.p) if away_from is None else away_from
    bound = S.injectivity_bound if bound is None else bound
    indices = [n for n in hecke_indices(away_from, bound) if n > 1]
    matrices = {n: hecke_matrix(S, n, cache).matrix.rows for n in indices}

    with span("eigen.enumerate", level=S.level, p=ring.p, m=ring.m, bound=bound):
        points = _residue_layer(S, ring.with_precision(1), indices, matrices)
        logger.info("%d normalized eigenforms mod %d", len(points), ring.p)
        for j in range(2, ring.m + 1):
            with span("eigen.lift", precision=j, candidates=len(points)):
                points = _lift_layer(S, ring.with_precision(j), points, indices, matrices)
            logger.info("%d normalized eigenforms mod %d^%d", len(points), ring.p, j)

    results = []
    for coords in sorted(set(points), key=lambda c: tuple(x.coords for x in c)):
        form = CoefficientForm(S, tuple(coords), ring)
        results.append((form, _system(form, away_from, bound, "weak")))
    results.sort(key=lambda item: (item[1].sort_key(), tuple(x.coords for x in item[0].coordinates)))
    return results


# =============================================================================
# Comparison with characteristic zero
# =============================================================================


@dataclass(frozen=True)
class StrongMatch:
    label: str
    prime_index: int
    root: str = ""


def strong_match(e: EigenSystem, catalog: Sequence[QExpansion]) -> list[StrongMatch]:
    """Catalog members whose reduction, at some compatible prime, has the eigenvalues of ``e``."""
    matches = []
    for member in catalog:
        if member.truncation < e.bound:
            raise PrecisionError(f"catalog form {member.label} has truncation {member.truncation} < {e.bound}")
        if member.domain is None:
            candidates = [0]
            roots = [""]
        else:
            found = member.domain.roots_in(e.ring)
            candidates = list(range(len(found)))
            roots = [str(r) for r in found]
            if not found:
                logger.debug("%s has no compatible prime in %s", member.label, e.ring)
        for index in candidates:
            reduced = reduce_mod(member.truncate(e.bound), e.ring, index)
            if all(reduced[n] == v for n, v in e.values):
                matches.append(StrongMatch(member.label, index, roots[index]))
    return matches


def systems_agree(e1: EigenSystem, e2: EigenSystem, exclude: Sequence[int] = ()) -> bool:
    """Agreement of the two systems at every shared prime outside ``exclude``."""
    if e1.ring != e2.ring:
        # raises IncomparableRingsError for rings with no common overring
        e1.ring.common_overring(e2.ring)
    bound = min(e1.bound, e2.bound)
    for ell in sympy.primerange(2, bound + 1):
        if ell in exclude or not (e1.has(ell) and e2.has(ell)):
            continue
        if not congruent_mod_pm(e1.value(ell), e2.value(ell)):
            return False
    return True


# =============================================================================
# Half sums
# =============================================================================


@dataclass(frozen=True)
class HalfSumEntry:
    n: int
    lam: int
    mu: int
    eigenvalue: RingElement
    verified: bool


@dataclass(frozen=True)
class HalfSumResult:
    h: CoefficientForm
    entries: tuple[HalfSumEntry, ...]
    liftable: bool
    away_from: int
    bound: int

    @property
    def verified(self) -> bool:
        return all(e.verified for e in self.entries)


def half_sum_construct(
    f: CoefficientForm,
    g: CoefficientForm,
    p: int,
    away_from: Optional[int] = None,
    bound: Optional[int] = None,
    cache: Optional[HeckeMatrixCache] = None,
) -> HalfSumResult:
    """h = (f + g) / 2 mod p^2 for integral eigenforms f = g mod p, with its eigen certificate."""
    if p == 2:
        raise PreconditionError("the half-sum construction needs p odd")
    if f.ring is not None or g.ring is not None or f.basis is not g.basis:
        raise PreconditionError("half sums take integral forms of one space")
    S = f.basis
    residue = ModRing.integers_mod(p, 1)
    if f.reduce(residue) != g.reduce(residue):
        raise PreconditionError(f"f and g are not congruent mod {p}")
    away_from = default_away_from(S, p) if away_from is None else away_from
    bound = S.injectivity_bound if bound is None else bound
    ring = ModRing.integers_mod(p, 2)
    half = ring(2).inverse()
    h = (f.reduce(ring) + g.reduce(ring)).scale(half)

    entries = []
    liftable = True
    with span("eigen.half_sum", p=p, bound=bound):
        for n in hecke_indices(away_from, bound):
            op = hecke_matrix(S, n, cache)
            lam, mu = f.value(n), g.value(n)
            for form, value in ((f, lam), (g, mu)):
                if form.apply(op) != form.scale(value):
                    raise PreconditionError(f"{form.label or 'input'} is not a T_{n} eigenform")
            eigenvalue = ring(lam + mu) * half
            verified = h.apply(op) == h.scale(eigenvalue)
            entries.append(HalfSumEntry(n, lam, mu, eigenvalue, verified))
            if (lam - mu) % (p * p):
                liftable = False
    if liftable:
        logger.warning("eigenvalues agree mod %d everywhere checked; h may lift", p * p)
    return HalfSumResult(CoefficientForm(S, h.coordinates, ring, "h"), tuple(entries), liftable, away_from, bound)


# =============================================================================
# Classification
# =============================================================================


@dataclass
class SystemClassification:
    """One eigen system with the forms realizing it and its provenance."""

    system: EigenSystem
    forms: list[CoefficientForm] = field(default_factory=list)
    matches: list[StrongMatch] = field(default_factory=list)
    provenance: str = "weak-only"
    residual_irreducibility: str = RESIDUAL_IRREDUCIBILITY


def classify_space(
    S: SpaceBasis,
    ring: ModRing,
    away_from: Optional[int] = None,
    bound: Optional[int] = None,
    catalog: Sequence[QExpansion] = (),
    cache: Optional[HeckeMatrixCache] = None,
) -> list[SystemClassification]:
    found = enumerate_weak_eigenforms(S, ring, away_from, bound, cache)
    grouped: dict[tuple, SystemClassification] = {}
    for form, system in found:
        key = system.sort_key()
        if key not in grouped:
            grouped[key] = SystemClassification(system)
        grouped[key].forms.append(form)
    out = []
    direct_sum = len(S.weights) > 1
    for key in sorted(grouped):
        entry = grouped[key]
        entry.matches = strong_match(entry.system, catalog) if catalog else []
        if entry.matches:
            entry.provenance = "strong"
        else:
            entry.provenance = "dc-weak-only" if direct_sum else "weak-only"
        out.append(entry)
    return out
