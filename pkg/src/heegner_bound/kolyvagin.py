"""Kolyvagin primes and conductors, derivative-operator identities, the
order formula for the derived classes, and assembly of the three
Shafarevich-Tate bound exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime, primerange

from .curves import EllipticCurveQ, trace_of_frobenius
from .numeric import INFINITE, ValidationError, Valuation, kronecker_symbol, ord_p
from .tate import LocalData


@dataclass(frozen=True)
class KolyvaginPrime:
    ell: int
    a_ell: int
    M: int  # ord_p(gcd(a_ell, ell + 1))


@dataclass(frozen=True)
class Conductor:
    """Square-free product of Kolyvagin primes; c = 1 is the empty product."""

    primes: Tuple[KolyvaginPrime, ...]

    @property
    def c(self) -> int:
        return math.prod(kp.ell for kp in self.primes)

    @property
    def f_c(self) -> int:
        return len(self.primes)

    @property
    def M(self):
        """min over factors; infinite for c = 1."""
        if not self.primes:
            return INFINITE
        return Valuation(min(kp.M for kp in self.primes))

    def epsilon(self, eps_curve: int) -> int:
        return epsilon_sign(eps_curve, self)


def epsilon_sign(eps: int, conductor: Conductor) -> int:
    """Eigen-sign of the derived class: eps * (-1)^(number of prime factors)."""
    if eps not in (1, -1):
        raise ValidationError("eps must be +1 or -1")
    return eps * (-1) ** conductor.f_c


def find_kolyvagin_primes(
    curve: EllipticCurveQ, D: int, p: int, bound: int
) -> List[KolyvaginPrime]:
    """All Kolyvagin primes l <= bound: l coprime to N*D*p, inert in
    Q(sqrt(-D)), with p | a_l and p | l + 1."""
    if p == 2 or not isprime(p):
        raise ValidationError("p must be an odd prime")
    N = curve.conductor
    out = []
    for ell in primerange(2, bound + 1):
        if (N * D * p) % ell == 0:
            continue
        if (ell + 1) % p:
            continue
        if kronecker_symbol(-D, ell) != -1:
            continue
        a = trace_of_frobenius(curve, ell)
        if a % p:
            continue
        out.append(KolyvaginPrime(ell, a, ord_p(math.gcd(a, ell + 1), p)))
    return out


def enumerate_conductors(
    primes: Sequence[KolyvaginPrime], r: int, m: int
) -> List[Conductor]:
    """Lambda^r_m: all r-element square-free products with min M(l) >= m."""
    if len({kp.ell for kp in primes}) != len(primes):
        raise ValidationError("primes must be pairwise distinct")
    if r == 0:
        return [Conductor(())]
    out = []
    for combo in combinations(sorted(primes, key=lambda k: k.ell), r):
        if min(kp.M for kp in combo) >= m:
            out.append(Conductor(tuple(combo)))
    return out


def derivative_operator(ell: int) -> List[int]:
    """D_l = sum_{i=1}^{l} i sigma^i as a coefficient vector over Z[Z/(l+1)],
    indexed by powers sigma^0 .. sigma^l."""
    if ell + 1 < 2:
        raise ValidationError("need ell + 1 >= 2")
    return [0] + list(range(1, ell + 1))


def group_ring_multiply(u: Sequence[int], v: Sequence[int]) -> List[int]:
    """Convolution in Z[Z/n] for vectors of equal length n."""
    n = len(u)
    out = [0] * n
    for i, ui in enumerate(u):
        if ui:
            for j, vj in enumerate(v):
                if vj:
                    out[(i + j) % n] += ui * vj
    return out


def derivative_identity_residual(ell: int) -> List[int]:
    """(sigma - 1) D_l - ((1 + l) - Tr) in Z[Z/(l+1)]; all zeros iff the
    derivative identity holds exactly."""
    n = ell + 1
    D = derivative_operator(ell)
    sigma_minus_1 = [0] * n
    sigma_minus_1[1 % n] += 1
    sigma_minus_1[0] -= 1
    lhs = group_ring_multiply(sigma_minus_1, D)
    rhs = [-1] * n  # -Tr
    rhs[0] += 1 + ell
    return [x - y for x, y in zip(lhs, rhs)]


def kappa_order(m: int, m_c: Valuation, M_c) -> int:
    """ord of the derived class at level m: zero iff m <= m(c), else m - m(c)."""
    if isinstance(M_c, Valuation):
        ok = M_c >= m
    else:
        ok = M_c >= m
    if not ok:
        raise ValidationError(f"class undefined: m = {m} exceeds M(c) = {M_c}")
    if m_c.is_infinite or int(m_c) >= m:
        return 0
    return m - int(m_c)


@dataclass
class BoundReport:
    p: int
    m0: int
    tamagawa_valuations: Dict[int, int]
    m_max: int
    exponent_kolyvagin: int
    exponent_improved: int
    exponent_bsd: int
    m_infinity_lower: int
    m_infinity_conjectured: int  # ord_p(prod c_q): the BSD prediction, not computed

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "m0": self.m0,
            "tamagawa_valuations": {str(q): v for q, v in sorted(self.tamagawa_valuations.items())},
            "m_max": self.m_max,
            "exponent_kolyvagin": self.exponent_kolyvagin,
            "exponent_improved": self.exponent_improved,
            "exponent_bsd": self.exponent_bsd,
            "m_infinity_lower_bound": self.m_infinity_lower,
            "m_infinity_conjectured_value": self.m_infinity_conjectured,
        }


def sha_bounds(m0: int, local_data: Sequence[LocalData], p: int) -> BoundReport:
    """The three even exponents: Kolyvagin's 2*m0, the improved 2*m0 - 2*m_max,
    and the BSD-predicted 2*(m0 - sum_q ord_p(c_q)) with the Manin factor
    dropped (p does not divide the conductor)."""
    if p == 2 or not isprime(p):
        raise ValidationError("p must be an odd prime")
    if m0 < 0:
        raise ValidationError("m0 must be a nonnegative integer")
    for ld in local_data:
        if ld.q == p and ld.v_disc > 0:
            raise ValidationError(f"p = {p} divides the conductor")
    vals = {ld.q: ord_p(ld.tamagawa, p) for ld in local_data if ld.v_disc > 0}
    m_max = max(vals.values(), default=0)
    total = sum(vals.values())
    report = BoundReport(
        p=p,
        m0=m0,
        tamagawa_valuations=vals,
        m_max=m_max,
        exponent_kolyvagin=2 * m0,
        exponent_improved=2 * m0 - 2 * m_max,
        exponent_bsd=2 * (m0 - total),
        m_infinity_lower=m_max,
        m_infinity_conjectured=total,
    )
    if report.exponent_improved < 0:
        raise ValidationError(
            f"m0 = {m0} < m_max = {m_max} contradicts the improved bound; "
            "the supplied index or generator is inconsistent"
        )
    assert report.exponent_bsd <= report.exponent_improved <= report.exponent_kolyvagin
    return report
