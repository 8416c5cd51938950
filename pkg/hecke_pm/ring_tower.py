"""Coefficient rings O_K / pi^gamma for the unramified and p-power cyclotomic towers.

A ring is stored as Z[y]/(Q(y)) with Q monic, together with a per-coordinate modulus
vector describing the ideal generated by pi^gamma. Unramified rings use a defining
polynomial irreducible mod p and pi = p; cyclotomic rings use y = pi = 1 - zeta and
Q(y) = Phi_{p^s}(1 - y) made monic (an Eisenstein polynomial). In both cases the ideal
pi^gamma is the coordinate lattice with moduli (p^m, p^c, ..., p^c), c = m for e = 1 and
c = m - 1 otherwise, so reduction after every operation yields a canonical form.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Optional, Sequence, Union

import sympy
from sympy import Poly, Symbol

from hecke_pm.errors import (
    IncomparableRingsError,
    NotAUnitError,
    ParseError,
    PrecisionError,
)

logger = logging.getLogger(__name__)

_Y = Symbol("y")

# Conway polynomials, coefficients low to high, monic.
UNRAMIFIED_POLYNOMIALS: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (5, 4): (2, 4, 4, 0, 1),
    (7, 2): (3, 6, 1),
    (7, 3): (4, 0, 6, 1),
    (7, 4): (3, 4, 5, 0, 1),
}


def gamma(m: int, e: int) -> int:
    """Working pi-adic precision (m - 1) e + 1 matching reduction mod p^m."""
    if m < 1 or e < 1:
        raise PrecisionError(f"gamma needs positive m and e, got m={m}, e={e}")
    return (m - 1) * e + 1


@dataclass(frozen=True)
class LocalFieldSpec:
    """A p-adic field from one of the two supported families."""

    p: int
    kind: str
    f: int = 1
    poly: tuple[int, ...] = (0, 1)
    s: int = 0

    def __post_init__(self):
        if not sympy.isprime(self.p):
            raise PrecisionError(f"p={self.p} is not prime")
        if self.kind == "unramified":
            if len(self.poly) != self.f + 1 or self.poly[-1] != 1:
                raise PrecisionError(f"defining polynomial {self.poly} is not monic of degree {self.f}")
            if self.f > 1 and not Poly(list(reversed(self.poly)), _Y, modulus=self.p).is_irreducible:
                raise PrecisionError(f"defining polynomial {self.poly} is reducible mod {self.p}")
        elif self.kind == "cyclotomic":
            if self.s < 1:
                raise PrecisionError("cyclotomic rings need s >= 1")
        else:
            raise PrecisionError(f"unknown field kind {self.kind!r}")

    @classmethod
    def base(cls, p: int) -> "LocalFieldSpec":
        return cls(p=p, kind="unramified")

    @classmethod
    def unramified(cls, p: int, f: int, poly: Optional[Sequence[int]] = None) -> "LocalFieldSpec":
        if f == 1 and poly is None:
            return cls.base(p)
        if poly is None:
            if (p, f) not in UNRAMIFIED_POLYNOMIALS:
                raise PrecisionError(f"no shipped defining polynomial for p={p}, f={f}; pass poly=")
            poly = UNRAMIFIED_POLYNOMIALS[(p, f)]
        return cls(p=p, kind="unramified", f=f, poly=tuple(int(c) for c in poly))

    @classmethod
    def cyclotomic(cls, p: int, s: int) -> "LocalFieldSpec":
        return cls(p=p, kind="cyclotomic", s=s)

    @property
    def e(self) -> int:
        if self.kind == "cyclotomic":
            return self.p ** (self.s - 1) * (self.p - 1)
        return 1

    @property
    def f_res(self) -> int:
        return self.f if self.kind == "unramified" else 1

    @property
    def is_base(self) -> bool:
        return self.kind == "unramified" and self.f == 1

    def describe(self) -> str:
        if self.kind == "cyclotomic":
            return f"cyclotomic s={self.s}"
        if self.is_base:
            return "unramified f=1"
        return f"unramified f={self.f} poly={','.join(str(c) for c in self.poly)}"


@dataclass(frozen=True)
class ModRing:
    """The residue ring O_K / pi^gamma(m) of a supported local field."""

    spec: LocalFieldSpec
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise PrecisionError(f"precision exponent must be positive, got m={self.m}")

    @classmethod
    def integers_mod(cls, p: int, m: int) -> "ModRing":
        return cls(LocalFieldSpec.base(p), m)

    @classmethod
    def cyclotomic(cls, p: int, s: int, m: int) -> "ModRing":
        return cls(LocalFieldSpec.cyclotomic(p, s), m)

    @classmethod
    def unramified(cls, p: int, f: int, m: int, poly: Optional[Sequence[int]] = None) -> "ModRing":
        return cls(LocalFieldSpec.unramified(p, f, poly), m)

    # -- structure ---------------------------------------------------------

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def e(self) -> int:
        return self.spec.e

    @property
    def gamma(self) -> int:
        return gamma(self.m, self.e)

    @property
    def degree(self) -> int:
        return self.spec.e * self.spec.f_res

    @property
    def residue_size(self) -> int:
        return self.p ** self.spec.f_res

    @property
    def cardinality(self) -> int:
        return self.residue_size ** self.gamma

    @property
    def is_base(self) -> bool:
        return self.spec.is_base

    @cached_property
    def relation(self) -> tuple[int, ...]:
        """Coefficients q_0..q_{d-1} of the monic relation Q(y) = y^d + ... + q_0."""
        if self.spec.kind == "unramified":
            return self.spec.poly[:-1]
        x = Symbol("x")
        phi = Poly(sympy.cyclotomic_poly(self.p ** self.spec.s, x), x)
        q = phi.compose(Poly(1 - x, x))
        coeffs = [int(c) for c in reversed(q.all_coeffs())]
        lead = coeffs[-1]
        return tuple(c * lead for c in coeffs[:-1])

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        top = self.p ** self.m
        rest = top if self.e == 1 else self.p ** (self.m - 1)
        return (top,) + (rest,) * (self.degree - 1)

    @cached_property
    def _p_over_pi(self) -> tuple[int, ...]:
        # p / pi = -sign * (pi^{e-1} + q_{e-1} pi^{e-2} + ... + q_1), sign = q_0 / p
        q = self.relation
        sign = q[0] // self.p
        return tuple(-sign * c for c in (q[1:] + (1,)))

    def with_precision(self, m: int) -> "ModRing":
        return ModRing(self.spec, m)

    def describe(self) -> str:
        return f"ring p={self.p} m={self.m} {self.spec.describe()}"

    def __str__(self) -> str:
        return self.describe()

    @property
    def generator_name(self) -> str:
        return "pi" if self.spec.kind == "cyclotomic" else "a"

    # -- element construction ------------------------------------------------

    def _canonical(self, coords: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(c) % mod for c, mod in zip(coords, self.moduli))

    def element(self, coords: Sequence[int]) -> "RingElement":
        coords = list(coords) + [0] * (self.degree - len(coords))
        if len(coords) != self.degree:
            raise PrecisionError(f"{len(coords)} coordinates for a ring of degree {self.degree}")
        return RingElement(self, self._canonical(coords))

    def __call__(self, x: Union[int, Fraction, "RingElement"]) -> "RingElement":
        if isinstance(x, RingElement):
            if x.parent == self:
                return x
            return x.parent.embed_into(self, x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise NotAUnitError(f"{x} is not p-integral for p={self.p}")
            return self(x.numerator) * self(x.denominator).inverse()
        return self.element([int(x)])

    @property
    def zero(self) -> "RingElement":
        return self.element([0])

    @property
    def one(self) -> "RingElement":
        return self.element([1])

    @cached_property
    def uniformizer(self) -> "RingElement":
        if self.spec.kind == "cyclotomic":
            return self.element([0, 1]) if self.degree > 1 else self.element([self.p])
        return self.element([self.p])

    @property
    def generator(self) -> "RingElement":
        return self.element([0, 1]) if self.degree > 1 else self.element([0])

    def pi_power(self, v: int) -> "RingElement":
        if v >= self.gamma:
            return self.zero
        return self.uniformizer ** v

    def residue_elements(self) -> list["RingElement"]:
        """Canonical representatives of the residue field, ordered by coordinates."""
        if self.spec.kind == "cyclotomic":
            return [self.element([d]) for d in range(self.p)]
        return [self.element(list(c)) for c in itertools.product(range(self.p), repeat=self.spec.f)]

    def representatives(self, k: int) -> list["RingElement"]:
        """All canonical representatives sum_{j<k} d_j pi^j of the ring modulo pi^k."""
        k = min(k, self.gamma)
        residues = self.residue_elements()
        out = []
        for digits in itertools.product(residues, repeat=k):
            x = self.zero
            for j, d in enumerate(digits):
                x = x + d * self.pi_power(j)
            out.append(x)
        return out

    def elements(self) -> Iterator["RingElement"]:
        for coords in itertools.product(*(range(mod) for mod in self.moduli)):
            yield RingElement(self, coords)

    # -- arithmetic on coordinates ------------------------------------------

    def _mul(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        d = self.degree
        top = self.p ** self.m
        prod = [0] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        rel = self.relation
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[k] % top
            if c:
                for i in range(d):
                    prod[k - d + i] -= c * rel[i]
            prod[k] = 0
        return self._canonical(prod[:d])

    def _divide_by_uniformizer(self, coords: Sequence[int]) -> tuple[int, ...]:
        """Exact quotient by pi of an element with zero residue."""
        p = self.p
        if self.spec.kind == "unramified" or self.degree == 1:
            return self._canonical([c // p for c in coords])
        head = coords[0] // p
        shifted = list(coords[1:]) + [0]
        return self._canonical([s + head * w for s, w in zip(shifted, self._p_over_pi)])

    def _digit(self, coords: Sequence[int]) -> tuple[int, ...]:
        if self.spec.kind == "unramified":
            return self._canonical([c % self.p for c in coords])
        return self._canonical([coords[0] % self.p])

    # -- residue field and roots of unity ------------------------------------

    @cached_property
    def residue_generator(self) -> "RingElement":
        """Smallest residue representative generating the multiplicative group of the residue field."""
        q = self.residue_size
        prime_factors = list(sympy.factorint(q - 1)) if q > 2 else []
        one = self.one.residue()
        for x in self.residue_elements():
            if x.residue() == self.zero.residue():
                continue
            if all((x ** ((q - 1) // ell)).residue() != one for ell in prime_factors):
                return x
        raise PrecisionError(f"no generator found for the residue field of {self}")

    def teichmuller_lift(self, x: "RingElement") -> "RingElement":
        """The root of unity of order prime to p congruent to the unit x mod pi."""
        if not x.is_unit():
            raise NotAUnitError(f"{x} is not a unit in {self}")
        q = self.residue_size
        for _ in range(self.gamma + 1):
            nxt = x ** q
            if nxt == x:
                return x
            x = nxt
        raise PrecisionError(f"Teichmuller iteration did not stabilize in {self}")

    def root_of_unity_power(self, exponent: Fraction) -> "RingElement":
        """exp(2 pi i * exponent) realized in this ring by the compatible system of roots of unity.

        Prime-to-p orders use powers of the Teichmuller lift of ``residue_generator``; p-power
        orders use zeta_{p^s} = 1 - pi of a cyclotomic ring.
        """
        exponent = Fraction(exponent) % 1
        n = exponent.denominator
        if n == 1:
            return self.one
        n_p = self.p ** sympy.multiplicity(self.p, n)
        n_r = n // n_p
        k = exponent.numerator
        value = self.one
        if n_r > 1:
            q = self.residue_size
            if (q - 1) % n_r:
                raise PrecisionError(f"{self} has no primitive {n_r}-th root of unity")
            a = (k * pow(n_p, -1, n_r)) % n_r
            zeta_r = self.teichmuller_lift(self.residue_generator) ** ((q - 1) // n_r)
            value = value * zeta_r ** a
        if n_p > 1:
            s = self.spec.s if self.spec.kind == "cyclotomic" else 0
            if self.p ** s < n_p or (s and (self.p ** s) % n_p):
                raise PrecisionError(f"{self} has no primitive {n_p}-th root of unity")
            b = (k * pow(n_r, -1, n_p)) % n_p
            zeta_p = (self.one - self.uniformizer) ** (self.p ** s // n_p)
            value = value * zeta_p ** b
        return value

    def root_choice(self) -> str:
        """Human-readable record of the root-of-unity normalization used by this ring."""
        g = self.residue_generator
        text = f"zeta_(q-1) = teichmuller({g})"
        if self.spec.kind == "cyclotomic":
            text += f"; zeta_{self.p}^{self.spec.s} = 1 - pi"
        return text

    # -- tower maps -----------------------------------------------------------

    def embed_base(self, x: Union[int, "RingElement"]) -> "RingElement":
        """Image of a residue mod p^m under Z/p^m -> this ring."""
        if isinstance(x, RingElement):
            if not x.parent.is_base or x.parent.p != self.p:
                raise IncomparableRingsError(f"{x.parent} is not the base ring of {self}")
            if x.parent.m != self.m:
                raise PrecisionError(f"precision mismatch: element mod p^{x.parent.m}, ring mod p^{self.m}")
            x = x.coords[0]
        return self.element([int(x)])

    def embed_into(self, target: "ModRing", x: "RingElement") -> "RingElement":
        """Tower map of ``x`` from this ring into ``target``."""
        if target == self:
            return x
        if target.p != self.p:
            raise IncomparableRingsError(f"{self} and {target} have different residue characteristics")
        if target.m != self.m:
            raise PrecisionError(f"precision mismatch between {self} and {target}")
        if self.is_base:
            return target.embed_base(x.coords[0])
        if (
            self.spec.kind == "cyclotomic"
            and target.spec.kind == "cyclotomic"
            and target.spec.s >= self.spec.s
        ):
            image = target.one - (target.one - target.uniformizer) ** (self.p ** (target.spec.s - self.spec.s))
            if self.degree == 1:
                image = target(self.p)
            out = target.zero
            power = target.one
            for c in x.coords:
                out = out + power * c
                power = power * image
            return out
        raise IncomparableRingsError(f"no declared tower map from {self} to {target}")

    def common_overring(self, other: "ModRing") -> "ModRing":
        for a, b in ((self, other), (other, self)):
            if a == b:
                return a
            try:
                a.embed_into(b, a.one)
                return b
            except IncomparableRingsError:
                continue
        raise IncomparableRingsError(f"{self} and {other} have no declared common overring")


@dataclass(frozen=True)
class RingElement:
    """An element of a ModRing in canonical coordinates."""

    parent: ModRing
    coords: tuple[int, ...] = field(default=())

    def _coerce(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.parent != self.parent:
                raise IncomparableRingsError(f"mixed parents {self.parent} and {other.parent}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.parent(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.parent.element([a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __neg__(self):
        return self.parent.element([-a for a in self.coords])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.parent.element([a - b for a, b in zip(self.coords, other.coords)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.parent.element([a * other for a in self.coords])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RingElement(self.parent, self.parent._mul(self.coords, other.coords))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.parent.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            return self == self.parent(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.parent == other.parent and self.coords == other.coords

    def __hash__(self):
        return hash((self.parent, self.coords))

    def __lt__(self, other: "RingElement") -> bool:
        return self.coords < other.coords

    def __bool__(self):
        return not self.is_zero()

    def __str__(self):
        name = self.parent.generator_name
        terms = []
        for i, c in enumerate(self.coords):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                power = name if i == 1 else f"{name}^{i}"
                terms.append(power if c == 1 else f"{c}*{power}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"RingElement({self}; {self.parent.describe()})"

    # -- chain-ring structure ------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coords)

    def residue(self) -> tuple[int, ...]:
        return self.parent._digit(self.coords)

    def is_unit(self) -> bool:
        return any(self.residue())

    def digits(self) -> list["RingElement"]:
        """pi-adic digits d_0..d_{gamma-1} with residue-field representatives."""
        ring = self.parent
        out = []
        coords = self.coords
        for _ in range(ring.gamma):
            d = ring._digit(coords)
            out.append(RingElement(ring, d))
            rest = ring._canonical([c - e for c, e in zip(coords, d)])
            coords = ring._divide_by_uniformizer(rest)
        return out

    def valuation(self) -> int:
        """pi-adic valuation, ``gamma`` for zero."""
        ring = self.parent
        coords = self.coords
        for v in range(ring.gamma):
            if any(ring._digit(coords)):
                return v
            coords = ring._divide_by_uniformizer(coords)
        return ring.gamma

    def split(self) -> tuple[int, "RingElement"]:
        """Write self = pi^v * u with u a unit; zero gives (gamma, 1)."""
        ring = self.parent
        digits = self.digits()
        v = next((i for i, d in enumerate(digits) if not d.is_zero()), ring.gamma)
        if v == ring.gamma:
            return v, ring.one
        unit = ring.zero
        for j, d in enumerate(digits[v:]):
            unit = unit + d * ring.pi_power(j)
        return v, unit

    def remainder(self, v: int) -> "RingElement":
        """Canonical representative of self modulo pi^v."""
        ring = self.parent
        out = ring.zero
        for j, d in enumerate(self.digits()[:v]):
            out = out + d * ring.pi_power(j)
        return out

    def inverse(self) -> "RingElement":
        ring = self.parent
        if not self.is_unit():
            raise NotAUnitError(f"{self} is not a unit in {ring}")
        if ring.degree == 1:
            return ring.element([pow(self.coords[0], -1, ring.moduli[0])])
        y = self ** (ring.residue_size - 2) if ring.residue_size > 2 else ring.one
        for _ in range(2 * ring.gamma + 2):
            if self * y == ring.one:
                return y
            y = y * (2 - self * y)
        raise PrecisionError(f"Newton inversion of {self} did not converge")

    def multiplicative_order(self) -> int:
        if not self.is_unit():
            raise NotAUnitError(f"{self} has no multiplicative order")
        x, k = self, 1
        while x != self.parent.one:
            x = x * self
            k += 1
        return k

    def lift(self) -> tuple[int, ...]:
        return self.coords

    def reduce_to(self, target: ModRing) -> "RingElement":
        if target.spec != self.parent.spec or target.m > self.parent.m:
            raise PrecisionError(f"cannot reduce from {self.parent} to {target}")
        return target.element(self.coords)

    def lift_to(self, target: ModRing) -> "RingElement":
        """Canonical lift to a higher precision of the same field."""
        if target.spec != self.parent.spec or target.m < self.parent.m:
            raise PrecisionError(f"cannot lift from {self.parent} to {target}")
        return target.element(self.coords)


def embed_base(x: Union[int, RingElement], ring: ModRing) -> RingElement:
    return ring.embed_base(x)


def congruent_mod_pm(alpha: RingElement, beta: RingElement) -> bool:
    """True when alpha - beta vanishes in a common overring of both parents."""
    if alpha.parent != beta.parent:
        ring = alpha.parent.common_overring(beta.parent)
        alpha, beta = ring(alpha), ring(beta)
    return (alpha - beta).is_zero()


def teichmuller(a: int, ring: ModRing) -> RingElement:
    if a % ring.p == 0:
        raise NotAUnitError(f"{a} is not a unit mod {ring.p}")
    return ring.teichmuller_lift(ring(a))


def in_base_subring(alpha: RingElement) -> Optional[int]:
    """The residue x mod p^m with embed_base(x) = alpha, or None if alpha is not in the base image."""
    if any(alpha.coords[1:]):
        return None
    return alpha.coords[0]


def parse_ring(text: str) -> ModRing:
    """Parse ``ring p=3 m=2 cyclotomic s=1`` style descriptions."""
    tokens = text.split()
    if not tokens or tokens[0] != "ring":
        raise ParseError(f"ring description must start with 'ring': {text!r}")
    fields: dict[str, str] = {}
    kind = "unramified"
    for token in tokens[1:]:
        if token in ("cyclotomic", "unramified"):
            kind = token
        elif "=" in token:
            key, value = token.split("=", 1)
            fields[key] = value
        else:
            raise ParseError(f"unexpected token {token!r} in ring description")
    try:
        p, m = int(fields["p"]), int(fields["m"])
        if kind == "cyclotomic":
            return ModRing.cyclotomic(p, int(fields.get("s", "1")), m)
        poly = [int(c) for c in fields["poly"].split(",")] if "poly" in fields else None
        return ModRing.unramified(p, int(fields.get("f", "1")), m, poly)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad ring description {text!r}: {exc}") from exc
