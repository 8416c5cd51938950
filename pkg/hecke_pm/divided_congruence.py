"""Divided congruences, level stripping, weight congruences and Eisenstein weight equalization."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Optional, Protocol, Sequence, Union

import sympy

from hecke_pm.characters import DirichletCharacter
from hecke_pm.errors import (
    BasisError,
    CongruenceError,
    ConsistencyError,
    NotInSpanError,
    PreconditionError,
    PrecisionError,
)
from hecke_pm.hecke_algebra import CoefficientForm, SpaceBasis, form_with_coefficients, reduce_form
from hecke_pm.linalg import ChainRingMatrix, howell_form
from hecke_pm.nebentypus import decompose_character, eta_order_mod, eta_ring
from hecke_pm.numberfield import NumberFieldElement
from hecke_pm.qexp import QExpansion, reduce_mod, stroke
from hecke_pm.ring_tower import ModRing
from hecke_pm.services.observability import span

logger = logging.getLogger(__name__)


# =============================================================================
# Dividing a congruence
# =============================================================================


@dataclass(frozen=True)
class DividedCongruenceWitness:
    forms: tuple[QExpansion, ...]
    pi: Union[int, NumberFieldElement]
    exponent: int
    total: QExpansion
    quotient: QExpansion
    truncation: int
    coordinates: Optional[CoefficientForm] = None

    @property
    def weights(self) -> tuple:
        return tuple(f.weight for f in self.forms)


def _divisible(c, pi_power) -> bool:
    if isinstance(pi_power, NumberFieldElement):
        return (pi_power.field(c) / pi_power).is_integral()
    return c % pi_power == 0


def divide_congruence(
    forms: Sequence[QExpansion],
    pi: Union[int, NumberFieldElement],
    m: int,
    basis: Optional[SpaceBasis] = None,
) -> DividedCongruenceWitness:
    """f = (sum of the g_k) / pi^m, checked coefficientwise at the common truncation.

    Only the sum has to be divisible; the individual g_k / pi^m may be non-integral.
    With ``basis`` the quotient is also expressed in its saturated coordinates.
    """
    if not forms:
        raise PreconditionError("divide_congruence needs at least one form")
    if m < 1:
        raise PreconditionError(f"exponent must be positive, got {m}")
    total = forms[0]
    for g in forms[1:]:
        total = total + g
    pi_power = pi**m
    for n, c in enumerate(total.coefficients):
        if c != 0 and not _divisible(c, pi_power):
            raise CongruenceError(f"a_{n} = {c} of the sum is not divisible by {pi}^{m}", index=n)
    if isinstance(pi_power, int):
        coeffs = tuple(c // pi_power for c in total.coefficients)
    else:
        coeffs = tuple(pi_power.field(c) / pi_power for c in total.coefficients)
    quotient = replace(total, coefficients=coeffs, label="f")
    coordinates = reduce_form(basis, quotient) if basis is not None else None
    logger.info("divided %d forms by %s^%d at truncation %d", len(forms), pi, m, total.truncation)
    return DividedCongruenceWitness(tuple(forms), pi, m, total, quotient, total.truncation, coordinates)


# =============================================================================
# Eisenstein series
# =============================================================================


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    """B_0..B_n exactly by the Akiyama-Tanigawa recurrence (B_1 = +1/2)."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    A = [Fraction(0)] * (n + 1)
    out = []
    for m in range(n + 1):
        A[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            A[j - 1] = j * (A[j - 1] - A[j])
        out.append(A[0])
    return tuple(out)


def bernoulli(n: int) -> Fraction:
    return bernoulli_numbers(n)[n]


def sigma(n: int, k: int) -> int:
    return int(sympy.divisor_sigma(n, k))


def eisenstein_factor(k: int) -> Fraction:
    """-2k / B_k, the coefficient of sigma_{k-1}(n) in the normalized E_k."""
    return Fraction(-2 * k) / bernoulli(k)


def eisenstein_series(p: int, bound: int) -> QExpansion:
    """E_{p-1} = 1 + c sum sigma_{p-2}(n) q^n at level 1, with c p-integral and divisible by p."""
    if p < 5 or not sympy.isprime(p):
        raise PreconditionError(f"E_(p-1) needs a prime p >= 5, got {p}")
    k = p - 1
    factor = eisenstein_factor(k)
    if factor.denominator % p or factor.numerator % p:
        raise PreconditionError(f"-2k/B_k = {factor} is not divisible by {p}")
    coeffs: list = [1]
    for n in range(1, bound + 1):
        c = factor * sigma(n, k - 1)
        coeffs.append(int(c) if c.denominator == 1 else c)
    return QExpansion(tuple(coeffs), level=1, weight=k, character=DirichletCharacter.trivial(1), label=f"E{k}")


def eisenstein_power(p: int, m: int, bound: int, ring: Optional[ModRing] = None) -> QExpansion:
    """E~ = E_{p-1}^(p^(m-1)), of weight phi(p^m); reduced into ``ring`` when given."""
    E = eisenstein_series(p, bound)
    if ring is not None:
        E = reduce_mod(E, ring)
    with span("eisenstein.power", p=p, m=m, bound=bound):
        power = E if m == 1 else E ** (p ** (m - 1))
    return replace(power, label=f"E{p - 1}^{p ** (m - 1)}")


def _congruent_to_one(f: QExpansion, ring: ModRing) -> bool:
    reduced = reduce_mod(f, ring)
    return reduced[0] == 1 and all(c.is_zero() for c in reduced.coefficients[1:])


@dataclass(frozen=True)
class EqualizedForms:
    forms: tuple[QExpansion, ...]
    weight: int
    powers: tuple[int, ...]
    truncation: int


def equalize_weights(forms: Sequence[QExpansion], p: int, m: int) -> EqualizedForms:
    """Multiply each form by a power of E~ so every weight becomes the largest one.

    Expansions mod p^m are unchanged; this is checked coefficientwise at the audited
    truncation, which is the smallest input truncation.
    """
    if p < 5:
        raise PreconditionError(f"weight equalization needs p >= 5, got {p}")
    phi = (p - 1) * p ** (m - 1)
    weights = [f.weight for f in forms]
    if any(isinstance(k, tuple) for k in weights):
        raise PreconditionError("equalize single-weight components, not direct sums")
    top = max(weights)
    for k in weights:
        if (top - k) % phi:
            raise PreconditionError(f"weights {k} and {top} are not congruent mod phi(p^m) = {phi}")
    bound = min(f.truncation for f in forms)
    ring = ModRing.integers_mod(p, m)
    E = eisenstein_power(p, m, bound, ring)
    if not _congruent_to_one(E, ring):
        raise PreconditionError(f"E~ is not congruent to 1 mod {p}^{m}")
    out, powers = [], []
    for f in forms:
        k = (top - f.weight) // phi
        powers.append(k)
        g = reduce_mod(f.truncate(bound), ring)
        if k:
            g = replace(g * E**k, level=f.level, weight=top, label=f.label)
        if g.coefficients != reduce_mod(f.truncate(bound), ring).coefficients:
            raise PreconditionError(f"multiplying {f.label or 'form'} by E~^{k} changed its expansion mod {p}^{m}")
        out.append(replace(g, weight=top))
    logger.info("equalized weights %s to %d at truncation %d", weights, top, bound)
    return EqualizedForms(tuple(out), top, tuple(powers), bound)


# =============================================================================
# Level stripping
# =============================================================================


class BasisProvider(Protocol):
    def space(self, level: int, weight: int) -> Optional[SpaceBasis]: ...


@dataclass(frozen=True)
class StripResult:
    form: CoefficientForm
    weight: int
    level: int
    searched: tuple[int, ...]


def _p_part_only(ratio: int, p: int) -> bool:
    while ratio % p == 0:
        ratio //= p
    return ratio == 1


def strip_level_search(
    f: QExpansion,
    target_level: int,
    c_max: int,
    bound: int,
    bases: BasisProvider,
    ring: ModRing,
) -> Optional[StripResult]:
    """The lowest c <= c_max such that S_1 + ... + S_c at level ``target_level`` holds a form congruent to f mod p^m.

    The sum runs over the weights with basis data; ``searched`` lists those weights.
    None means not found within (c_max, bound), which says nothing about existence.
    """
    if f.level % target_level or not _p_part_only(f.level // target_level, ring.p):
        raise PreconditionError(f"level {f.level} is not {target_level} times a power of {ring.p}")
    if f.truncation < bound:
        raise PrecisionError(f"form has truncation {f.truncation} < {bound}")
    if ring.p < 5:
        logger.warning("p = %d: level stripping is only guaranteed for p >= 5; searching anyway", ring.p)
    values = reduce_mod(f, ring).cusp_coefficients(bound)
    spaces: list[SpaceBasis] = []
    searched = []
    for c in range(1, c_max + 1):
        S_c = bases.space(target_level, c)
        if S_c is None:
            logger.debug("no basis for weight %d at level %d", c, target_level)
            continue
        if S_c.truncation < bound:
            raise PrecisionError(f"basis for weight {c} has truncation {S_c.truncation} < {bound}")
        spaces.append(S_c)
        searched.append(c)
        S = spaces[0] if len(spaces) == 1 else SpaceBasis.direct_sum(spaces)
        with span("strip_level.weight", level=target_level, weight=c, p=ring.p, m=ring.m, summands=len(spaces)):
            try:
                g = form_with_coefficients(S, values, ring)
            except NotInSpanError:
                continue
        logger.info("found a level %d form in weights %s congruent mod %d^%d", target_level, searched, ring.p, ring.m)
        return StripResult(g, c, target_level, tuple(searched))
    if not searched:
        raise BasisError(f"no basis data for level {target_level} in weights 1..{c_max}")
    logger.info("search exhausted: weights %s at bound %d", searched, bound)
    return None


@dataclass(frozen=True)
class PlantedInstance:
    source: QExpansion
    planted: QExpansion
    weight: int


def planted_instances(
    S: SpaceBasis, p: int, m: int, count: int, seed: int = 0, bound: Optional[int] = None
) -> list[PlantedInstance]:
    """Random level-N forms times E~, re-declared at level N p, reduced mod p^m."""
    ring = ModRing.integers_mod(p, m)
    bound = S.truncation if bound is None else bound
    E = eisenstein_power(p, m, bound, ring)
    phi = (p - 1) * p ** (m - 1)
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        coeffs = [rng.randrange(-(p**m), p**m + 1) for _ in S.generators]
        if all(c % p == 0 for c in coeffs):
            continue
        source = None
        for c, g in zip(coeffs, S.generators):
            term = g.truncate(bound).scale(c)
            source = term if source is None else source + term
        weight = S.weights[0] + phi
        planted = replace(reduce_mod(source, ring) * E, level=S.level * p, weight=weight)
        out.append(PlantedInstance(replace(source, label=f"planted{len(out)}"), planted, weight))
    return out


# =============================================================================
# Weight congruences
# =============================================================================


@dataclass(frozen=True)
class WeightCongruenceVerdict:
    weights: tuple[int, ...]
    p: int
    m: int
    h: int
    modulus: int
    violations: tuple[tuple[int, int], ...] = ()
    stroke_values: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return not self.violations


def weight_congruence_verdict(weights: Sequence[int], h: int, p: int, m: int) -> WeightCongruenceVerdict:
    """Pairwise k_i = k_j mod phi(p^m)/h."""
    phi = (p - 1) * p ** (m - 1)
    if h < 1 or phi % h:
        raise PreconditionError(f"h = {h} does not divide phi({p}^{m}) = {phi}")
    modulus = phi // h
    violations = tuple(
        (a, b) for i, a in enumerate(weights) for b in weights[i + 1 :] if (a - b) % modulus
    )
    if violations:
        logger.warning("weights %s are not congruent mod %d: a precondition fails", list(weights), modulus)
    return WeightCongruenceVerdict(tuple(weights), p, m, h, modulus, violations)


def residue_rank(forms: Sequence[QExpansion], p: int, bound: Optional[int] = None) -> int:
    """Rank of the expansions mod p over F_p."""
    residue = ModRing.integers_mod(p, 1)
    bound = min(f.truncation for f in forms) if bound is None else bound
    rows = [reduce_mod(f, residue).cusp_coefficients(bound) for f in forms]
    H, _ = howell_form(ChainRingMatrix.from_rows(residue, rows, bound))
    return sum(1 for row in H.rows if any(not x.is_zero() for x in row))


def _stroke_primes(forms: Sequence[QExpansion], p: int, away_from: int, count: int = 3) -> list[int]:
    bound = min(f.truncation for f in forms)
    levels = lcm(*(f.level for f in forms))
    primes = []
    for ell in sympy.primerange(2, bound):
        if ell * ell * 4 > bound:
            break
        if gcd(ell, away_from * levels * p) == 1:
            primes.append(ell)
        if len(primes) == count:
            break
    if not primes:
        raise PrecisionError(f"truncation {bound} is too short for any stroke operator")
    return primes


def _stroke_eigenvalue(components: Sequence[QExpansion], ell: int, ring: ModRing):
    """The [ell]-eigenvalue of the sum of the components mod p^m, or None."""
    images = [stroke(c, ell) for c in components]
    bound = min(g.truncation for g in images)
    total = [sum((c[n] for c in components), ring.zero) for n in range(1, bound + 1)]
    image = [sum((g[n] for g in images), ring.zero) for n in range(1, bound + 1)]
    pivot = next((n for n, a in enumerate(total) if a.is_unit()), None)
    if pivot is None:
        return None
    lam = image[pivot] * total[pivot].inverse()
    if any(b != lam * a for a, b in zip(total, image)):
        return None
    return lam


def _reduced(forms: Sequence[QExpansion], ring: ModRing) -> list[QExpansion]:
    return [f if f.domain == ring else reduce_mod(f, ring) for f in forms]


def eta_exponent(forms: Sequence[QExpansion], p: int, m: int) -> tuple[int, ModRing]:
    """h = lcm of the orders mod p^m of the p-power parts eta_i of the characters.

    Also returns the ring the stroke eigenvalues live in: Z/p^m when every eta_i is
    trivial, otherwise Z_p[zeta_{p^s}] mod p^m for the largest conductor exponent s.
    """
    h = 1
    widest = None
    for f in forms:
        if f.character is None:
            logger.debug("%s carries no character; treating it as trivial", f.label or "a form")
            continue
        d = decompose_character(f.character, p)
        h = lcm(h, eta_order_mod(d, m))
        if widest is None or d.s > widest.s:
            widest = d
    ring = ModRing.integers_mod(p, m) if widest is None else eta_ring(widest, m)
    return h, ring


def _resolve_eta_exponent(
    forms: Sequence[QExpansion], p: int, m: int, h: Optional[int]
) -> tuple[int, ModRing]:
    derived, ring = eta_exponent(forms, p, m)
    if h is not None and h != derived:
        raise ConsistencyError(f"h = {h} was given, but the characters give h = {derived}")
    return derived, ring


def weight_congruence_check(
    forms: Sequence[QExpansion], p: int, m: int, h: Optional[int] = None, away_from: int = 1
) -> WeightCongruenceVerdict:
    """Verdict on k_i = k_j mod phi(p^m)/h for forms whose sum is a stroke eigenform mod p^m.

    h comes from the characters of the forms (see ``eta_exponent``); a given ``h`` is
    only checked against it. The reductions mod p must be independent and the sum must
    be an eigenform for [ell] at a few primes ell not dividing the level, p or ``away_from``.
    """
    if p == 2:
        raise PreconditionError("weight congruences need p odd")
    weights = [f.weight for f in forms]
    if len(forms) > 1 and residue_rank(forms, p) < len(forms):
        raise PreconditionError(f"the expansions are not linearly independent mod {p}")
    h, ring = _resolve_eta_exponent(forms, p, m, h)
    components = _reduced(forms, ring)
    strokes = {}
    with span("weights.check", p=p, m=m, forms=len(forms)):
        for ell in _stroke_primes(forms, p, away_from):
            lam = _stroke_eigenvalue(components, ell, ring)
            if lam is None:
                raise PreconditionError(f"the sum is not an eigenform for the stroke operator [{ell}]")
            strokes[ell] = lam
            for f, c in zip(forms, components):
                own = _stroke_eigenvalue([c], ell, ring)
                if own is not None and own != lam:
                    logger.warning("[%d] on %s gives %s, the sum gives %s", ell, f.label or "a component", own, lam)
    verdict = weight_congruence_verdict(weights, h, p, m)
    return replace(verdict, stroke_values=strokes)


def variant_congruence_check(
    forms: Sequence[QExpansion], p: int, m: int, h: Optional[int] = None, away_from: int = 1
) -> WeightCongruenceVerdict:
    """Same verdict for stroke-eigen forms whose sum vanishes mod p^m.

    Needs some i such that the expansions f_j, j != i, are independent mod p.
    """
    if p == 2:
        raise PreconditionError("weight congruences need p odd")
    h, ring = _resolve_eta_exponent(forms, p, m, h)
    components = _reduced(forms, ring)
    bound = min(f.truncation for f in components)
    for n in range(bound + 1):
        if not sum((c[n] for c in components), ring.zero).is_zero():
            raise CongruenceError(f"the sum does not vanish mod {p}^{m} at a_{n}", index=n)
    if len(forms) > 1:
        pivots = [i for i in range(len(forms)) if residue_rank([f for j, f in enumerate(forms) if j != i], p) == len(forms) - 1]
        if not pivots:
            raise PreconditionError(f"no form can be left out to make the rest independent mod {p}")
    strokes = {}
    for ell in _stroke_primes(forms, p, away_from):
        for f, c in zip(forms, components):
            lam = _stroke_eigenvalue([c], ell, ring)
            if lam is None:
                raise PreconditionError(f"{f.label or 'a form'} is not an eigenform for [{ell}]")
            strokes.setdefault(ell, []).append(lam)
    verdict = weight_congruence_verdict([f.weight for f in forms], h, p, m)
    return replace(verdict, stroke_values=strokes)
