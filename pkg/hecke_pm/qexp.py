"""Truncated q-expansions and the Hecke, diamond and stroke operators acting on them.

Coefficients live in one of three domains: ``None`` for rational integers (Python ints,
or Fractions for intermediate values), a ``NumberField``, or a ``ModRing``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Optional, Sequence, Union

import sympy

from hecke_pm.characters import DirichletCharacter
from hecke_pm.errors import PreconditionError, PrecisionError
from hecke_pm.numberfield import NumberField, NumberFieldElement
from hecke_pm.ring_tower import ModRing, RingElement

logger = logging.getLogger(__name__)

Coefficient = Union[int, Fraction, RingElement, NumberFieldElement]
Domain = Optional[Union[ModRing, NumberField]]
Weight = Union[int, tuple[int, ...]]


def sl2_index(level: int, group: str = "g0") -> int:
    """[SL_2(Z) : Gamma] for Gamma_0(M) or Gamma_1(M) (with -1 folded in)."""
    primes = list(sympy.factorint(level))
    index = Fraction(level)
    for ell in primes:
        index *= Fraction(ell + 1, ell)
    if group == "g1" and level > 2:
        index = Fraction(level * level)
        for ell in primes:
            index *= 1 - Fraction(1, ell * ell)
    elif group not in ("g0", "g1"):
        raise PreconditionError(f"unknown congruence subgroup {group!r}")
    return int(index)


def sturm_bound(level: int, weight: int, group: str = "g0") -> int:
    if level < 1 or weight < 1:
        raise PreconditionError(f"Sturm bound needs positive level and weight, got {level}, {weight}")
    return weight * sl2_index(level, group) // 12


def direct_sum_bound(level: int, max_weight: int, group: str = "g0") -> int:
    """Truncation used for direct sums of weights 1..max_weight; verified by a rank check by callers."""
    return sum(sturm_bound(level, k, group) for k in range(1, max_weight + 1)) + 1


def domain_zero(domain: Domain):
    return 0 if domain is None else domain.zero


def describe_domain(domain: Domain) -> str:
    if domain is None:
        return "int"
    return domain.describe()


@dataclass(frozen=True)
class QExpansion:
    """sum_{n=0}^{B} a_n q^n with its level, weight tag and optional nebentypus."""

    coefficients: tuple
    level: int = 1
    weight: Weight = 2
    character: Optional[DirichletCharacter] = None
    domain: Domain = None
    label: str = ""
    prime_index: Optional[int] = None

    def __post_init__(self):
        if len(self.coefficients) < 2:
            raise PrecisionError("a q-expansion needs at least a_1")

    @classmethod
    def from_cusp_coefficients(cls, values: Sequence[Coefficient], **kwargs) -> "QExpansion":
        """Build from a_1..a_B with a_0 = 0."""
        domain = kwargs.get("domain")
        return cls((domain_zero(domain),) + tuple(values), **kwargs)

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, n: int) -> Coefficient:
        if n > self.truncation:
            raise PrecisionError(f"a_{n} requested but truncation is {self.truncation}")
        return self.coefficients[n]

    def cusp_coefficients(self, bound: Optional[int] = None) -> tuple:
        bound = self.truncation if bound is None else bound
        if bound > self.truncation:
            raise PrecisionError(f"need {bound} coefficients, have {self.truncation}")
        return self.coefficients[1 : bound + 1]

    @property
    def zero_coefficient(self) -> Coefficient:
        return domain_zero(self.domain)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def is_normalized(self) -> bool:
        return self.coefficients[1] == 1

    def truncate(self, bound: int) -> "QExpansion":
        if bound > self.truncation:
            raise PrecisionError(f"cannot extend truncation {self.truncation} to {bound}")
        return replace(self, coefficients=self.coefficients[: bound + 1])

    def with_coefficients(self, coefficients: Sequence[Coefficient], **changes) -> "QExpansion":
        return replace(self, coefficients=tuple(coefficients), **changes)

    def map_coefficients(self, fn: Callable[[Coefficient], Coefficient], domain: Domain = None) -> "QExpansion":
        return replace(self, coefficients=tuple(fn(c) for c in self.coefficients), domain=domain)

    # -- arithmetic ----------------------------------------------------------

    def _merge_domain(self, other: "QExpansion") -> Domain:
        if self.domain is None:
            return other.domain
        if other.domain is None or other.domain == self.domain:
            return self.domain
        raise PrecisionError(f"mixed coefficient domains {describe_domain(self.domain)} and {describe_domain(other.domain)}")

    def _merge_weight(self, other: "QExpansion") -> Weight:
        if self.weight == other.weight:
            return self.weight
        mine = self.weight if isinstance(self.weight, tuple) else (self.weight,)
        theirs = other.weight if isinstance(other.weight, tuple) else (other.weight,)
        return tuple(sorted(set(mine) | set(theirs)))

    def __add__(self, other: "QExpansion") -> "QExpansion":
        bound = min(self.truncation, other.truncation)
        coeffs = tuple(a + b for a, b in zip(self.coefficients[: bound + 1], other.coefficients))
        character = self.character if self.character == other.character else None
        return QExpansion(
            coeffs,
            level=lcm(self.level, other.level),
            weight=self._merge_weight(other),
            character=character,
            domain=self._merge_domain(other),
        )

    def __neg__(self) -> "QExpansion":
        return replace(self, coefficients=tuple(-c for c in self.coefficients), label="")

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        return self + (-other)

    def scale(self, c: Coefficient) -> "QExpansion":
        domain = self.domain
        if isinstance(c, RingElement):
            domain = c.parent
        return replace(self, coefficients=tuple(c * a for a in self.coefficients), domain=domain, label="")

    def __mul__(self, other: "QExpansion") -> "QExpansion":
        """Series product, truncated at the shorter input."""
        bound = min(self.truncation, other.truncation)
        domain = self._merge_domain(other)
        zero = domain_zero(domain)
        a, b = self.coefficients, other.coefficients
        coeffs = []
        for n in range(bound + 1):
            total = zero
            for i in range(n + 1):
                if a[i] != 0 and b[n - i] != 0:
                    total = total + a[i] * b[n - i]
            coeffs.append(total)
        if self.character is not None and other.character is not None:
            character = self.character * other.character
        else:
            character = None
        if isinstance(self.weight, tuple) or isinstance(other.weight, tuple):
            raise PreconditionError("series products of direct-sum expansions are not defined")
        return QExpansion(
            tuple(coeffs),
            level=lcm(self.level, other.level),
            weight=self.weight + other.weight,
            character=character,
            domain=domain,
        )

    def __pow__(self, k: int) -> "QExpansion":
        if k < 1:
            raise PreconditionError("series powers need k >= 1")
        result, base = None, self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale_variable(self, d: int) -> "QExpansion":
        """f(q) -> f(q^d), truncation B (coefficients past B/d were never known)."""
        zero = self.zero_coefficient
        coeffs = [zero] * (self.truncation + 1)
        for n in range(self.truncation // d + 1):
            coeffs[n * d] = self.coefficients[n]
        return replace(self, coefficients=tuple(coeffs), level=self.level * d, label="")

    def __str__(self) -> str:
        terms = []
        for n, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if n == 0:
                terms.append(str(c))
                continue
            power = "q" if n == 1 else f"q^{n}"
            terms.append(power if c == 1 else f"({c})*{power}")
        return " + ".join(terms) + f" + O(q^{self.truncation + 1})"


def _single_weight(f: QExpansion) -> int:
    if isinstance(f.weight, tuple):
        raise PreconditionError(f"operator needs a single weight, got {f.weight}; use DirectSumForm")
    if f.weight < 1:
        raise PreconditionError(f"weight must be positive, got {f.weight}")
    return f.weight


def character_value(f: QExpansion, d: int) -> Coefficient:
    """chi(d) in the coefficient domain of ``f``; 0 when d shares a factor with the level."""
    if gcd(d, f.level) != 1:
        return 0
    if d % f.level == 1 or f.level == 1:
        return 1
    if f.character is None:
        raise PrecisionError(f"{f.label or 'form'} has no character metadata; chi({d}) is needed")
    return f.character.value(d % f.character.modulus, f.domain)


def hecke_Tn(f: QExpansion, n: int, truncation: Optional[int] = None) -> QExpansion:
    """T_n on q-expansions: a_r(T_n f) = sum_{d | (r, n), (d, M) = 1} d^{k-1} chi(d) a_{rn/d^2}(f).

    Divisors sharing a factor with the level drop out, which gives the U_ell action there.
    """
    k = _single_weight(f)
    out = f.truncation // n if truncation is None else truncation
    if out < 1 or f.truncation < out * n:
        raise PrecisionError(f"T_{n} to truncation {max(out, 1)} needs a_1..a_{max(out, 1) * n}, have {f.truncation}")
    zero = f.zero_coefficient
    weights = {d: character_value(f, d) for d in sympy.divisors(n)}
    coeffs = []
    for r in range(out + 1):
        total = zero
        g = gcd(r, n)
        for d in sympy.divisors(g):
            chi = weights[d]
            if chi == 0:
                continue
            a = f.coefficients[r * n // (d * d)]
            if a == 0:
                continue
            total = total + (d ** (k - 1)) * chi * a
        coeffs.append(total)
    return replace(f, coefficients=tuple(coeffs), label="")


def diamond(f: QExpansion, d: int) -> QExpansion:
    if gcd(d, f.level) != 1:
        raise PreconditionError(f"{d} is not a unit mod {f.level}")
    if f.character is None:
        raise PreconditionError("diamond operators act only on declared character eigencomponents")
    return f.scale(f.character.value(d % f.character.modulus, f.domain))


def stroke(f: QExpansion, ell: int, truncation: Optional[int] = None) -> QExpansion:
    """[ell] f = ell (T_ell T_ell f - T_{ell^2} f) = ell^k chi(ell) f on eigencomponents."""
    if not sympy.isprime(ell) or f.level % ell == 0:
        raise PreconditionError(f"stroke needs a prime not dividing the level {f.level}, got {ell}")
    if isinstance(f.domain, ModRing) and f.domain.p == ell:
        raise PreconditionError(f"stroke at ell = p = {ell} is not defined mod p-power")
    out = f.truncation // (ell * ell) if truncation is None else truncation
    twice = hecke_Tn(hecke_Tn(f, ell, out * ell), ell, out)
    square = hecke_Tn(f, ell * ell, out)
    coeffs = tuple(ell * (a - b) for a, b in zip(twice.coefficients, square.coefficients))
    return replace(f, coefficients=coeffs, label="")


def restrict_support(g: QExpansion, c: int, level: Optional[int] = None) -> QExpansion:
    """Keep a_n with gcd(n, c) = 1; the result may be re-declared at ``level``."""
    zero = g.zero_coefficient
    coeffs = tuple(a if gcd(n, c) == 1 else zero for n, a in enumerate(g.coefficients))
    if c == 1:
        coeffs = g.coefficients
    return replace(g, coefficients=coeffs, level=level or g.level, label="")


def reduce_mod(f: QExpansion, ring: ModRing, prime_index: int = 0) -> QExpansion:
    """Coefficientwise image in ``ring``; number-field coefficients go through a chosen root."""
    domain = f.domain
    if domain is None:
        coeffs = tuple(ring(Fraction(c)) for c in f.coefficients)
        return replace(f, coefficients=coeffs, domain=ring)
    if isinstance(domain, ModRing):
        if domain.spec == ring.spec and domain.m >= ring.m:
            return replace(f, coefficients=tuple(c.reduce_to(ring) for c in f.coefficients), domain=ring)
        return replace(f, coefficients=tuple(ring(c) for c in f.coefficients), domain=ring)
    roots = domain.roots_in(ring)
    if not roots:
        raise PreconditionError(f"{domain.describe()} has no root in {ring}: no compatible prime above {ring.p}")
    if not 0 <= prime_index < len(roots):
        raise PrecisionError(f"prime index {prime_index} out of range; {len(roots)} roots in {ring}")
    root = roots[prime_index]
    logger.debug("reducing %s at root %s (index %d of %d)", f.label, root, prime_index, len(roots))

    def image(c):
        return c.reduce_at(root) if isinstance(c, NumberFieldElement) else ring(c)

    return replace(f, coefficients=tuple(image(c) for c in f.coefficients), domain=ring, prime_index=prime_index)


@dataclass(frozen=True)
class DirectSumForm:
    """An element of a direct sum of weights, kept as its per-weight components."""

    components: tuple[QExpansion, ...] = field(default=())

    def __post_init__(self):
        weights = [_single_weight(c) for c in self.components]
        if len(set(weights)) != len(weights):
            raise PreconditionError(f"direct-sum components need distinct weights, got {weights}")

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(c.weight for c in self.components)

    def q_expansion(self) -> QExpansion:
        total = self.components[0]
        for c in self.components[1:]:
            total = total + c
        return total

    def hecke_Tn(self, n: int, truncation: Optional[int] = None) -> "DirectSumForm":
        return DirectSumForm(tuple(hecke_Tn(c, n, truncation) for c in self.components))

    def stroke(self, ell: int, truncation: Optional[int] = None) -> "DirectSumForm":
        return DirectSumForm(tuple(stroke(c, ell, truncation) for c in self.components))
