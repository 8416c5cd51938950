"""Weight-2 newforms of elliptic curves over Q from point counts.

This is how the shipped fixtures were produced; it is kept so the corpus can be
regenerated and audited.
"""

from __future__ import annotations

import logging
from typing import Sequence

import sympy

from hecke_pm.characters import DirichletCharacter
from hecke_pm.qexp import QExpansion

logger = logging.getLogger(__name__)


def count_points(ainvs: Sequence[int], p: int) -> int:
    """#E(F_p) including the point at infinity (good or bad reduction)."""
    a1, a2, a3, a4, a6 = ainvs
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    count += 1
        return count
    count = 1
    for x in range(p):
        # (2y + a1 x + a3)^2 = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2
        disc = (4 * (x**3 + a2 * x * x + a4 * x + a6) + (a1 * x + a3) ** 2) % p
        count += 1 if disc == 0 else 1 + sympy.legendre_symbol(disc, p)
    return count


def trace_of_frobenius(ainvs: Sequence[int], p: int) -> int:
    return p + 1 - count_points(ainvs, p)


def newform_from_curve(ainvs: Sequence[int], conductor: int, bound: int, label: str = "") -> QExpansion:
    """q-expansion a_1..a_bound of the newform attached to the curve with the given a-invariants."""
    ap = {p: trace_of_frobenius(ainvs, p) for p in sympy.primerange(2, bound + 1)}
    a = [0, 1] + [0] * (bound - 1)
    for n in range(2, bound + 1):
        factors = sympy.factorint(n)
        q = min(factors)
        pk = q ** factors[q]
        rest = n // pk
        if rest > 1:
            a[n] = a[pk] * a[rest]
        elif pk == q:
            a[n] = ap[q]
        elif conductor % q == 0:
            a[n] = ap[q] * a[n // q]
        else:
            a[n] = ap[q] * a[n // q] - q * a[n // (q * q)]
    logger.debug("computed %d coefficients for curve %s of conductor %d", bound, list(ainvs), conductor)
    return QExpansion(
        tuple(a),
        level=conductor,
        weight=2,
        character=DirichletCharacter.trivial(conductor),
        label=label,
    )
