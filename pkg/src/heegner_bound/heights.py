"""Neron-Tate canonical heights, normalized so hhat(P) = lim 4^-n h(x(2^n P)).

Strategy: replace P by k*P with k = lcm of the Tamagawa numbers, so that
every non-archimedean local correction vanishes (k*P lies in E^0 everywhere);
then hhat(kP) = lambda_inf(kP) + log den(x(kP)), and hhat(P) = hhat(kP)/k^2.

The archimedean term uses the duplication series on a model shifted so the
identity component lies in x >= 1; points on the bounded real component take
one exact doubling backstep first.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp

from .curves import EllipticCurveQ, RationalPoint, _is_torsion, transform_a_invariants
from .numeric import ValidationError


def _lambda_inf_series(x0, b2, b4, b6, b8, steps):
    """Archimedean local height at real x0 >= 1 on the identity component:
    log|x| + sum_n 4^-(n+1) log|z_n| along the duplication iteration."""
    t = 1 / mp.mpf(x0)
    mu = mp.log(mp.mpf(x0))
    factor = mp.mpf(1)
    for _ in range(steps):
        factor /= 4
        t2 = t * t
        w = t * (4 + t * (b2 + t * (2 * b4 + t * b6)))
        z = 1 - t2 * (b4 + t * (2 * b6 + t * b8))
        mu += factor * mp.log(abs(z))
        t = w / z
    return mu


def _duplicate_x(curve: EllipticCurveQ, P: RationalPoint) -> Fraction:
    x = P.x
    num = x**4 - curve.b4 * x * x - 2 * curve.b6 * x - curve.b8
    den = 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6
    return num / den


def _psi2_squared(curve: EllipticCurveQ, P: RationalPoint) -> Fraction:
    x = P.x
    return 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6


def _log_fraction(f: Fraction):
    return mp.log(mp.mpf(abs(f.numerator))) - mp.log(mp.mpf(f.denominator))


def canonical_height(curve: EllipticCurveQ, P: RationalPoint, precision: int = 40):
    """hhat(P) as an mpf with absolute error below 10^(-precision/2)."""
    if not curve.is_on_curve(P):
        raise ValidationError("point not on curve")
    if P.infinity or _is_torsion(curve, P):
        return mp.mpf(0)

    k = 1
    for q in curve.bad_primes():
        k = math.lcm(k, curve.local_data_at(q).tamagawa)
    Q = curve.multiply(k, P)

    steps = int(precision * 1.7) + 25
    dps = precision + 30 + steps // 3
    with mp.workdps(dps):
        roots = mp.polyroots([4, curve.b2, 2 * curve.b4, curve.b6], maxsteps=200, extraprec=100)
        tol = mp.mpf(10) ** (-dps // 2)
        real_roots = sorted(r.real for r in roots if abs(r.imag) < tol * (1 + abs(r)))
        e1 = real_roots[-1]
        shift = int(mp.floor(e1)) - 1
        a1, a2, a3, a4, a6 = transform_a_invariants(curve.a_invariants, shift, 0, 0)
        sb2 = a1 * a1 + 4 * a2
        sb4 = 2 * a4 + a1 * a3
        sb6 = a3 * a3 + 4 * a6
        sb8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

        on_egg = False
        if len(real_roots) == 3 and curve.discriminant > 0:
            threshold = (real_roots[-1] + real_roots[-2]) / 2
            on_egg = mp.mpf(Q.x.numerator) / Q.x.denominator < threshold

        if on_egg:
            x2 = _duplicate_x(curve, Q) - shift
            lam2 = _lambda_inf_series(mp.mpf(x2.numerator) / x2.denominator, sb2, sb4, sb6, sb8, steps)
            lam = (lam2 + _log_fraction(_psi2_squared(curve, Q))) / 4
        else:
            xq = Q.x - shift
            lam = _lambda_inf_series(mp.mpf(xq.numerator) / xq.denominator, sb2, sb4, sb6, sb8, steps)

        total = (lam + mp.log(mp.mpf(Q.x.denominator))) / (k * k)
        result = +total
    with mp.workdps(precision):
        return +result
