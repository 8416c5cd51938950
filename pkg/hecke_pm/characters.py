"""Dirichlet characters as exponent vectors on fixed generators of (Z/N)^x.

Generators come one per odd prime power (its smallest primitive root) and, for 2^a,
-1 together with 5 when a >= 3; each is lifted by CRT to be 1 on the other prime-power
components. A character value is a rational exponent e with chi(a) = exp(2 pi i e).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Union

import sympy
from sympy.ntheory.modular import crt

from hecke_pm.errors import ParseError, PrecisionError
from hecke_pm.numberfield import NumberField, NumberFieldElement
from hecke_pm.ring_tower import ModRing, RingElement


@dataclass(frozen=True)
class UnitGenerator:
    """One cyclic factor of (Z/N)^x: ``generator`` lifted mod N, acting on the ``prime_power`` component."""

    prime: int
    prime_power: int
    generator: int
    local_generator: int
    order: int


@lru_cache(maxsize=None)
def unit_group_generators(modulus: int) -> tuple[UnitGenerator, ...]:
    if modulus < 1:
        raise PrecisionError(f"modulus must be positive, got {modulus}")
    out = []
    for ell, a in sorted(sympy.factorint(modulus).items()):
        q = ell**a
        rest = modulus // q
        if ell == 2:
            local = []
            if a >= 2:
                local.append((q - 1, 2))
            if a >= 3:
                local.append((5, 2 ** (a - 2)))
        else:
            local = [(int(sympy.primitive_root(q)), q // ell * (ell - 1))]
        for g, order in local:
            lifted = int(crt([q, rest], [g, 1])[0]) if rest > 1 else g % modulus
            out.append(UnitGenerator(ell, q, lifted, g, order))
    return tuple(out)


@lru_cache(maxsize=None)
def _discrete_log_table(q: int, g: int) -> dict[int, int]:
    table, x = {}, 1
    for k in range(q):
        if x in table:
            break
        table[x] = k
        x = x * g % q
    return table


def local_log(gen: UnitGenerator, a: int) -> int:
    """Exponent of ``a`` on the cyclic factor ``gen``."""
    q = gen.prime_power
    a %= q
    if gen.prime == 2:
        if gen.local_generator == q - 1:
            return 0 if a % 4 == 1 else 1
        if a % 4 == 3:
            a = (-a) % q
        return _discrete_log_table(q, 5)[a]
    return _discrete_log_table(q, gen.local_generator)[a]


@dataclass(frozen=True)
class DirichletCharacter:
    """A character mod ``modulus`` given by exponents on ``unit_group_generators(modulus)``."""

    modulus: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        gens = self.generators
        if len(self.exponents) != len(gens):
            raise PrecisionError(
                f"character mod {self.modulus} needs {len(gens)} exponents, got {len(self.exponents)}"
            )
        object.__setattr__(
            self, "exponents", tuple(e % g.order for e, g in zip(self.exponents, gens))
        )

    @classmethod
    def trivial(cls, modulus: int) -> "DirichletCharacter":
        return cls(modulus, (0,) * len(unit_group_generators(modulus)))

    @classmethod
    def parse(cls, text: str) -> "DirichletCharacter":
        """``<modulus>:<e1>,<e2>,...`` (empty exponent list for modulus 1 or 2)."""
        try:
            mod_text, _, exp_text = text.partition(":")
            modulus = int(mod_text)
            exps = tuple(int(e) for e in exp_text.split(",") if e.strip())
            if not exp_text.strip() and exps == ():
                exps = (0,) * len(unit_group_generators(modulus))
            return cls(modulus, exps)
        except ValueError as exc:
            raise ParseError(f"bad character spec {text!r}: {exc}") from exc
        except PrecisionError as exc:
            raise ParseError(str(exc)) from exc

    @property
    def generators(self) -> tuple[UnitGenerator, ...]:
        return unit_group_generators(self.modulus)

    def spec(self) -> str:
        return f"{self.modulus}:" + ",".join(str(e) for e in self.exponents)

    def __str__(self) -> str:
        return self.spec()

    def is_trivial(self) -> bool:
        return not any(self.exponents)

    @property
    def order(self) -> int:
        out = 1
        for e, g in zip(self.exponents, self.generators):
            out = lcm(out, g.order // gcd(e, g.order))
        return out

    def exponent(self, a: int) -> Fraction:
        """chi(a) = exp(2 pi i * exponent(a)); raises for a not coprime to the modulus."""
        if gcd(a, self.modulus) != 1:
            raise PrecisionError(f"{a} is not a unit mod {self.modulus}")
        total = Fraction(0)
        for e, g in zip(self.exponents, self.generators):
            if e:
                total += Fraction(e * local_log(g, a), g.order)
        return total % 1

    def __call__(self, a: int) -> Fraction:
        return self.exponent(a)

    def value(self, a: int, domain=None) -> Union[int, RingElement, NumberFieldElement]:
        """chi(a) in ``domain``: integers (orders 1, 2), a ModRing, or a cyclotomic NumberField."""
        if gcd(a, self.modulus) != 1:
            return 0 if domain is None or not isinstance(domain, (ModRing, NumberField)) else domain(0)
        e = self.exponent(a)
        if isinstance(domain, ModRing):
            return domain.root_of_unity_power(e)
        if isinstance(domain, NumberField):
            return cyclotomic_field_value(domain, e)
        if e == 0:
            return 1
        if e == Fraction(1, 2):
            return -1
        raise PrecisionError(f"chi({a}) = exp(2 pi i {e}) is not an integer; pass a coefficient ring")

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            modulus = lcm(self.modulus, other.modulus)
            return self.lift(modulus) * other.lift(modulus)
        return DirichletCharacter(self.modulus, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k: int) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(e * k for e in self.exponents))

    def lift(self, modulus: int) -> "DirichletCharacter":
        """The induced character mod a multiple of the modulus."""
        if modulus % self.modulus:
            raise PrecisionError(f"{modulus} is not a multiple of {self.modulus}")
        exps = []
        for g in unit_group_generators(modulus):
            reduced = g.generator % self.modulus
            exps.append(int(self.exponent(reduced) * g.order) if gcd(reduced, self.modulus) == 1 else 0)
        return DirichletCharacter(modulus, tuple(exps))

    def restrict(self, modulus: int) -> "DirichletCharacter":
        """Component on the prime powers of ``modulus`` (which must be a unitary divisor)."""
        if self.modulus % modulus or gcd(modulus, self.modulus // modulus) != 1:
            raise PrecisionError(f"{modulus} is not a unitary divisor of {self.modulus}")
        primes = set(sympy.factorint(modulus))
        exps = tuple(e for e, g in zip(self.exponents, self.generators) if g.prime in primes)
        return DirichletCharacter(modulus, exps)

    def agrees_with(self, other: "DirichletCharacter") -> bool:
        """Equality of values on every unit of the common modulus."""
        modulus = lcm(self.modulus, other.modulus)
        return all(
            self.exponent(g.generator % self.modulus) == other.exponent(g.generator % other.modulus)
            for g in unit_group_generators(modulus)
        )


def cyclotomic_field_value(field: NumberField, exponent: Fraction) -> NumberFieldElement:
    """exp(2 pi i * exponent) inside Q(zeta_N) given by Phi_N, with x = zeta_N."""
    exponent = Fraction(exponent) % 1
    n = _cyclotomic_index(field)
    if n % exponent.denominator:
        raise PrecisionError(f"{field.describe()} does not contain a {exponent.denominator}-th root of unity")
    k = exponent.numerator * (n // exponent.denominator)
    return field.element([0] * k + [1]) if k else field.one


@lru_cache(maxsize=None)
def _cyclotomic_index(field: NumberField) -> int:
    x = sympy.Symbol("x")
    target = sympy.Poly(list(reversed(field.poly)), x)
    for n in range(1, 10 * field.degree * field.degree + 3):
        if sympy.totient(n) == field.degree and sympy.Poly(sympy.cyclotomic_poly(n, x), x) == target:
            return n
    raise PrecisionError(f"{field.describe()} is not a cyclotomic field")


def cyclotomic_field(n: int) -> NumberField:
    x = sympy.Symbol("x")
    coeffs = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()
    return NumberField(tuple(int(c) for c in reversed(coeffs)))
