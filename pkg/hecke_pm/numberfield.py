"""Number-field coefficients: polynomials in a root of a monic integer polynomial."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

from sympy import Poly, QQ, Symbol

from hecke_pm.errors import NotAUnitError, PrecisionError
from hecke_pm.ring_tower import ModRing, RingElement

logger = logging.getLogger(__name__)

_X = Symbol("x")


@dataclass(frozen=True)
class NumberField:
    """Q[x]/(P(x)) for a monic integer polynomial P, coefficients low to high."""

    poly: tuple[int, ...]

    def __post_init__(self):
        if len(self.poly) < 2 or self.poly[-1] != 1:
            raise PrecisionError(f"defining polynomial {self.poly} must be monic of degree >= 1")

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @cached_property
    def sympy_poly(self) -> Poly:
        return Poly(list(reversed(self.poly)), _X, domain=QQ)

    def element(self, coords: Sequence[Union[int, Fraction]]) -> "NumberFieldElement":
        coords = [Fraction(c) for c in coords]
        if len(coords) > self.degree:
            return self._reduce(coords)
        coords += [Fraction(0)] * (self.degree - len(coords))
        return NumberFieldElement(self, tuple(coords))

    def __call__(self, x) -> "NumberFieldElement":
        if isinstance(x, NumberFieldElement):
            return x
        return self.element([x])

    @property
    def zero(self) -> "NumberFieldElement":
        return self.element([0])

    @property
    def one(self) -> "NumberFieldElement":
        return self.element([1])

    def _reduce(self, coords: list[Fraction]) -> "NumberFieldElement":
        d = self.degree
        coords = list(coords)
        for k in range(len(coords) - 1, d - 1, -1):
            c = coords[k]
            if c:
                for i in range(d):
                    coords[k - d + i] -= c * self.poly[i]
            coords[k] = Fraction(0)
        return NumberFieldElement(self, tuple(coords[:d]))

    def describe(self) -> str:
        return "nf:" + ",".join(str(c) for c in self.poly)

    def roots_in(self, ring: ModRing) -> list[RingElement]:
        """Simple roots of the defining polynomial in ``ring``, sorted by coordinates.

        Each residue root with unit derivative is lifted by Newton iteration; repeated
        residue roots are skipped.
        """
        poly = self.poly
        deriv = tuple(i * c for i, c in enumerate(poly))[1:]

        def evaluate(coeffs, x):
            acc = ring.zero
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc

        roots = []
        for r in ring.residue_elements():
            if not evaluate(poly, r).residue() == ring.zero.residue():
                continue
            slope = evaluate(deriv, r)
            if not slope.is_unit():
                logger.debug("skipping non-simple residue root %s of %s", r, self.describe())
                continue
            x = r
            for _ in range(ring.gamma + 1):
                x = x - evaluate(poly, x) * evaluate(deriv, x).inverse()
            if not evaluate(poly, x).is_zero():
                raise PrecisionError(f"Newton lift of root {r} did not converge in {ring}")
            roots.append(x)
        return sorted(roots)


@dataclass(frozen=True)
class NumberFieldElement:
    field: NumberField
    coords: tuple[Fraction, ...]

    def _coerce(self, other) -> "NumberFieldElement":
        if isinstance(other, NumberFieldElement):
            if other.field != self.field:
                raise PrecisionError(f"mixed number fields {self.field.describe()} and {other.field.describe()}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.element([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return NumberFieldElement(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(self.field, tuple(a * other for a in self.coords))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = [Fraction(0)] * (2 * self.field.degree - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    prod[i + j] += a * b
        return self.field._reduce(prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one
        for _ in range(k):
            result = result * self
        return result

    def inverse(self) -> "NumberFieldElement":
        if self.is_zero():
            raise NotAUnitError("zero has no inverse")
        num = Poly(list(reversed(self.coords)), _X, domain=QQ)
        inv = num.invert(self.field.sympy_poly)
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(inv.all_coeffs())]
        return self.field.element(coeffs)

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == self.field.element([other])
        if not isinstance(other, NumberFieldElement):
            return NotImplemented
        return self.field == other.field and self.coords == other.coords

    def __hash__(self):
        return hash((self.field, self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        """Integrality of the power-basis coordinates (sufficient for membership in Z[x]/(P))."""
        return all(c.denominator == 1 for c in self.coords)

    def is_p_integral(self, p: int) -> bool:
        return all(c.denominator % p for c in self.coords)

    def reduce_at(self, root: RingElement) -> RingElement:
        """Image under x -> root in the ModRing of ``root``."""
        ring = root.parent
        if not self.is_p_integral(ring.p):
            raise NotAUnitError(f"{self} is not p-integral for p={ring.p}")
        acc = ring.zero
        for c in reversed(self.coords):
            acc = acc * root + ring(c)
        return acc

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coords):
            if c == 0:
                continue
            power = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if not power:
                terms.append(str(c))
            else:
                terms.append(power if c == 1 else f"{c}*{power}")
        return " + ".join(terms) if terms else "0"
