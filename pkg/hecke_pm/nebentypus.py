"""Nebentypus decompositions chi = psi * omega^i * eta and the determinant obstruction.

The p-part of (Z/N p^r)^x is cyclic, generated by ``g``. With t the discrete log of g mod p
against the residue generator of Z/p^m, omega has exponent t p^(r-1) at g, and a p-part
exponent e splits as i t p^(r-1) + j (p - 1) modulo (p - 1) p^(r-1).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd

import sympy
from sympy.ntheory import discrete_log

from hecke_pm.characters import DirichletCharacter, unit_group_generators
from hecke_pm.eigen_classify import EigenSystem
from hecke_pm.errors import ConsistencyError, PreconditionError, PrecisionError
from hecke_pm.ring_tower import ModRing, RingElement, in_base_subring

logger = logging.getLogger(__name__)

BLOCKED = "blocked"
NOT_BLOCKED = "not_blocked_by_this_test"


@dataclass(frozen=True)
class CharacterDecomposition:
    character: DirichletCharacter
    p: int
    r: int
    psi: DirichletCharacter
    i: int
    eta: DirichletCharacter
    s: int

    @property
    def prime_to_p(self) -> int:
        return self.psi.modulus

    def describe(self) -> str:
        return f"psi={self.psi.spec()} i={self.i} eta={self.eta.spec()} s={self.s}"


def _split_modulus(modulus: int, p: int) -> tuple[int, int]:
    r = sympy.multiplicity(p, modulus)
    return modulus // p**r, r


def _omega_twist(p: int, r: int) -> int:
    """t with g = residue_generator^t mod p for the generator g of (Z/p^r)^x."""
    (gen,) = unit_group_generators(p**r)
    root = ModRing.integers_mod(p, 1).residue_generator.coords[0]
    return int(discrete_log(p, gen.local_generator % p, root))


def teichmuller_character(p: int, r: int = 1) -> DirichletCharacter:
    """omega mod p^r: the Teichmuller lift of a mod p, of order p - 1."""
    if p == 2:
        raise PreconditionError("the Teichmuller character is used for odd p only")
    r = max(r, 1)
    t = _omega_twist(p, r)
    return DirichletCharacter(p**r, (t * p ** (r - 1),))


def decompose_character(chi: DirichletCharacter, p: int) -> CharacterDecomposition:
    if p == 2:
        raise PreconditionError("character decomposition needs p odd")
    N, r = _split_modulus(chi.modulus, p)
    if gcd(N, p) != 1:
        raise PreconditionError(f"p = {p} divides the prime-to-p part {N}")
    psi = chi.restrict(N)
    if r == 0:
        return CharacterDecomposition(chi, p, 0, psi, 0, DirichletCharacter.trivial(1), 0)
    (e,) = chi.restrict(p**r).exponents
    t = _omega_twist(p, r)
    pr1 = p ** (r - 1)
    i = e * pow(t * pr1, -1, p - 1) % (p - 1)
    j = e * pow(p - 1, -1, pr1) % pr1 if pr1 > 1 else 0
    eta = DirichletCharacter(p**r, (j * (p - 1),))
    s = sympy.multiplicity(p, eta.order) if not eta.is_trivial() else 0
    decomposition = CharacterDecomposition(chi, p, r, psi, i, eta, s)
    _check_round_trip(decomposition)
    return decomposition


def _check_round_trip(d: CharacterDecomposition) -> None:
    M = d.character.modulus
    product = d.psi.lift(M) * (teichmuller_character(d.p, d.r) ** d.i).lift(M) * d.eta.lift(M)
    if product.exponents != d.character.exponents:
        raise ConsistencyError(f"psi omega^i eta = {product.spec()} differs from {d.character.spec()}")


def eta_ring(d: CharacterDecomposition, m: int) -> ModRing:
    """Z_p[zeta_{p^s}] / pi^gamma, where the values of eta live."""
    if d.s == 0:
        return ModRing.integers_mod(d.p, m)
    return ModRing.cyclotomic(d.p, d.s, m)


def eta_values(d: CharacterDecomposition, m: int) -> list[tuple[int, RingElement]]:
    ring = eta_ring(d, m)
    if d.r == 0:
        return []
    return [(g.generator, d.eta.value(g.generator, ring)) for g in d.eta.generators]


def eta_order_mod(d: CharacterDecomposition, m: int) -> int:
    """Order of eta once its values are reduced mod p^m."""
    order = 1
    for _, value in eta_values(d, m):
        order = max(order, value.multiplicative_order())
    return order


def cyclotomic_twist(x: int, shift: int, ring: ModRing) -> RingElement:
    """epsilon^shift(x) = x^shift for a p-adic unit x."""
    if x % ring.p == 0:
        raise PrecisionError(f"{x} is not a p-adic unit")
    return ring(x) ** shift


def twist_matches(d: CharacterDecomposition, shift: int, m: int) -> bool:
    """Whether eta = epsilon^shift holds mod p^m on the generators of the p-part."""
    ring = eta_ring(d, m)
    return all(value == cyclotomic_twist(g, shift, ring) for g, value in eta_values(d, m))


@dataclass(frozen=True)
class ObstructionVerdict:
    decomposition: CharacterDecomposition
    m: int
    verdict: str
    ring: str
    ring_size: int
    base_image_size: int
    outside_base: tuple[int, ...]

    @property
    def blocked(self) -> bool:
        return self.verdict == BLOCKED


def obstruction_check(d: CharacterDecomposition, m: int) -> ObstructionVerdict:
    """Blocked when some eta value mod p^m lies outside the image of Z/p^m.

    The materialized test is cross-checked against m >= 2 and eta != 1.
    """
    ring = eta_ring(d, m)
    outside = tuple(g for g, value in eta_values(d, m) if in_base_subring(value) is None)
    blocked = bool(outside)
    shortcut = m >= 2 and not d.eta.is_trivial()
    if blocked != shortcut:
        raise ConsistencyError(
            f"subring test says {'blocked' if blocked else 'not blocked'} for {d.describe()} at m={m}"
        )
    base_image = {ring.embed_base(x) for x in range(d.p**m)}
    verdict = BLOCKED if blocked else NOT_BLOCKED
    logger.info("obstruction for %s at m=%d: %s", d.describe(), m, verdict)
    return ObstructionVerdict(
        d, m, verdict, ring.describe(), ring.cardinality, len(base_image), outside
    )


@dataclass(frozen=True)
class DetData:
    ell: int
    det: RingElement
    stroke_value: RingElement

    @property
    def consistent(self) -> bool:
        return self.ell * self.det == self.stroke_value


def det_data(e: EigenSystem, ell: int) -> DetData:
    """ell^(k-1) chi(ell), checked against ell^-1 [ell] = ell^-1 ell (f(T_ell)^2 - f(T_ell^2)).

    The identity is compared after multiplying through by ell, so ell = p is allowed.
    """
    if not sympy.isprime(ell) or e.level % ell == 0 or gcd(ell, e.away_from) != 1:
        raise PreconditionError(f"ell = {ell} must be a prime outside the level and away_from set")
    if not isinstance(e.weight, int):
        raise PreconditionError(f"determinant data needs a single weight, got {e.weight}")
    if not (e.has(ell) and e.has(ell * ell)):
        raise PrecisionError(f"the system lacks T_{ell} or T_{ell * ell} (bound {e.bound})")
    ring = e.ring
    chi = e.character.value(ell, ring) if e.character is not None else ring.one
    det = ring(ell) ** (e.weight - 1) * chi
    lam = e.value(ell)
    stroke_value = ell * (lam * lam - e.value(ell * ell))
    data = DetData(ell, det, stroke_value)
    if not data.consistent:
        raise ConsistencyError(f"ell det = {ell * det} but the stroke eigenvalue is {stroke_value}")
    return data
