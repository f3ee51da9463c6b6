"""Integral Weierstrass models over Q: exact point arithmetic, point counting,
torsion, twists, naive generator search.

The model y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6 is kept globally
minimal; non-minimal input is rejected at construction (see tate.py).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from sympy import factorint, isprime

from .numeric import ValidationError

Q = Fraction


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class RationalPoint:
    """Point of E(Q): affine (x, y) in exact rationals, or the origin."""

    x: Optional[Fraction] = None
    y: Optional[Fraction] = None
    infinity: bool = False

    @classmethod
    def zero(cls) -> "RationalPoint":
        return cls(infinity=True)

    @classmethod
    def affine(cls, x, y) -> "RationalPoint":
        return cls(Q(x), Q(y), False)

    def __repr__(self):
        return "O" if self.infinity else f"({self.x}, {self.y})"


O = RationalPoint.zero()


# ---------------------------------------------------------------------------
# the curve


class EllipticCurveQ:
    """Globally minimal integral Weierstrass model with conductor-level data."""

    def __init__(self, a_invariants, label: Optional[str] = None):
        a1, a2, a3, a4, a6 = (int(a) for a in a_invariants)
        self.a1, self.a2, self.a3, self.a4, self.a6 = a1, a2, a3, a4, a6
        self.label = label
        self.b2 = a1 * a1 + 4 * a2
        self.b4 = 2 * a4 + a1 * a3
        self.b6 = a3 * a3 + 4 * a6
        self.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        self.c4 = self.b2**2 - 24 * self.b4
        self.c6 = -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6
        self.discriminant = (self.c4**3 - self.c6**2) // 1728
        if self.discriminant == 0:
            raise ValidationError("singular model: discriminant is zero")
        # local data at every bad prime; rejects non-minimal models
        from .tate import local_data

        self._local = {}
        for q in sorted(factorint(abs(self.discriminant))):
            self._local[q] = local_data(self, q)
        self.conductor = 1
        for q, ld in self._local.items():
            self.conductor *= q**ld.conductor_exponent

    @property
    def a_invariants(self) -> Tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def bad_primes(self) -> List[int]:
        return sorted(self._local)

    def local_data_at(self, q: int):
        from .tate import local_data

        return self._local[q] if q in self._local else local_data(self, q)

    def __repr__(self):
        tag = f" {self.label}" if self.label else ""
        return f"EllipticCurveQ{self.a_invariants}{tag}"

    def __eq__(self, other):
        return isinstance(other, EllipticCurveQ) and self.a_invariants == other.a_invariants

    def __hash__(self):
        return hash(self.a_invariants)

    # -- exact point arithmetic ---------------------------------------------

    def is_on_curve(self, P: RationalPoint) -> bool:
        if P.infinity:
            return True
        x, y = P.x, P.y
        return (
            y * y + self.a1 * x * y + self.a3 * y
            == x**3 + self.a2 * x * x + self.a4 * x + self.a6
        )

    def negate(self, P: RationalPoint) -> RationalPoint:
        if P.infinity:
            return P
        return RationalPoint(P.x, -P.y - self.a1 * P.x - self.a3)

    def add(self, P: RationalPoint, R: RationalPoint) -> RationalPoint:
        if P.infinity:
            return R
        if R.infinity:
            return P
        a1, a2, a3, a4, a6 = self.a_invariants
        x1, y1, x2, y2 = P.x, P.y, R.x, R.y
        if x1 == x2:
            if y1 + y2 + a1 * x2 + a3 == 0:
                return O
            den = 2 * y1 + a1 * x1 + a3
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / den
            nu = (-(x1**3) + a4 * x1 + 2 * a6 - a3 * y1) / den
        else:
            lam = (y2 - y1) / (x2 - x1)
            nu = y1 - lam * x1
        x3 = lam * lam + a1 * lam - a2 - x1 - x2
        y3 = -(lam + a1) * x3 - nu - a3
        return RationalPoint(x3, y3)

    def multiply(self, n: int, P: RationalPoint) -> RationalPoint:
        if n < 0:
            return self.multiply(-n, self.negate(P))
        R, B = O, P
        while n:
            if n & 1:
                R = self.add(R, B)
            B = self.add(B, B)
            n >>= 1
        return R

    def lift_x(self, x) -> Optional[RationalPoint]:
        """Rational point with this x-coordinate, if one exists (either y)."""
        x = Q(x)
        # y^2 + h*y - f = 0 with h = a1*x + a3
        h = self.a1 * x + self.a3
        f = x**3 + self.a2 * x * x + self.a4 * x + self.a6
        disc = h * h + 4 * f
        if disc < 0:
            return None
        num, den = disc.numerator, disc.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn != num or rd * rd != den:
            return None
        y = (-h + Q(rn, rd)) / 2
        return RationalPoint(x, y)


# ---------------------------------------------------------------------------
# point counting over F_ell


def _affine_count_bruteforce(curve: EllipticCurveQ, ell: int) -> int:
    a1, a2, a3, a4, a6 = (a % ell for a in curve.a_invariants)
    cnt = 0
    for x in range(ell):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % ell
        for y in range(ell):
            if (y * y + a1 * x * y + a3 * y - rhs) % ell == 0:
                cnt += 1
    return cnt


def trace_of_frobenius(curve: EllipticCurveQ, ell: int) -> int:
    """a_ell = ell + 1 - #E~(F_ell) by direct counting (quadratic-character sum)."""
    if not isprime(ell):
        raise ValidationError(f"{ell} is not prime")
    if curve.discriminant % ell == 0:
        raise ValidationError(f"bad reduction at {ell}")
    if ell == 2:
        return ell + 1 - (_affine_count_bruteforce(curve, 2) + 1)
    # complete the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    b2, b4, b6 = curve.b2 % ell, curve.b4 % ell, curve.b6 % ell
    if ell < 300:
        s = 0
        for x in range(ell):
            g = (4 * x * x * x + b2 * x * x + 2 * b4 * x + b6) % ell
            if g:
                s += 1 if pow(g, (ell - 1) // 2, ell) == 1 else -1
        return -s
    x = np.arange(ell, dtype=np.int64)
    g = (4 * ((x * x % ell) * x % ell) + b2 * (x * x % ell) + (2 * b4 % ell) * x + b6) % ell
    sq = np.zeros(ell, dtype=bool)
    sq[(x * x) % ell] = True
    nonzero = g != 0
    s = int(np.count_nonzero(sq[g] & nonzero)) - int(np.count_nonzero(~sq[g] & nonzero))
    return -s


def ap_table(curve: EllipticCurveQ, bound: int) -> dict:
    """a_p for every prime p <= bound (bad primes get the local L-factor value)."""
    from sympy import primerange

    out = {}
    for p in primerange(2, bound + 1):
        if curve.discriminant % p:
            out[p] = trace_of_frobenius(curve, p)
        else:
            ld = curve.local_data_at(p)
            out[p] = {"split-multiplicative": 1, "nonsplit-multiplicative": -1}.get(
                ld.reduction, 0
            )
    return out


# ---------------------------------------------------------------------------
# torsion


def _square_divisors(n: int) -> List[int]:
    fac = factorint(n)
    divs = [1]
    for p, e in fac.items():
        divs = [d * p**k for d in divs for k in range(0, e // 2 + 1)]
    return sorted(set(divs))


@lru_cache(maxsize=None)
def _torsion_points_cached(a_invs: Tuple[int, int, int, int, int]):
    curve = EllipticCurveQ(a_invs)
    # work on the u = 1/2 scaled model where all torsion is integral:
    # X = 4x, Y = 8y + ... handled implicitly through candidate x in (1/4)Z.
    # Lutz-Nagell on Y^2 = 4X^3 + b2 X^2 + 2 b4 X + b6 at scale 4:
    # candidates Y with Y^2 | 16 * |disc| * 2^12 on the scaled model.
    b2, b4, b6 = curve.b2, curve.b4, curve.b6
    scaled_disc = abs(curve.discriminant) * 2**12
    found = {O}
    ys = _square_divisors(2**8 * scaled_disc)
    seen_x = set()
    for Y in [0] + ys:
        # solve 4X^3 + 4b2 X^2 + 32 b4 X + 64 b6 = Y^2 with X = 4x integral:
        # g(X) = 4X^3 + (4 b2) X^2 + (2 * 16 b4) X + 64 b6  (scaled b-invs)
        coeffs = (4, 4 * b2, 32 * b4, 64 * b6)
        for X in _integer_cubic_roots(coeffs, Y * Y):
            x = Q(X, 4)
            if x in seen_x:
                continue
            seen_x.add(x)
            P = curve.lift_x(x)
            if P is None:
                continue
            for cand in (P, curve.negate(P)):
                if _is_torsion(curve, cand):
                    found.add(cand)
    # close under the group law (cheap: torsion group is tiny)
    changed = True
    pts = set(found)
    while changed:
        changed = False
        for A in list(pts):
            for B in list(pts):
                C = curve.add(A, B)
                if C not in pts and _is_torsion(curve, C):
                    pts.add(C)
                    changed = True
    return frozenset(pts)


def _integer_cubic_roots(coeffs, target: int) -> List[int]:
    """Integer roots X of c3 X^3 + c2 X^2 + c1 X + c0 = target."""
    c3, c2, c1, c0 = coeffs
    c0 = c0 - target
    # numeric roots then exact verification
    roots = np.roots([c3, c2, c1, c0])
    out = []
    for r in roots:
        if abs(r.imag) > 1e-6 * (1 + abs(r.real)):
            continue
        for X in {round(r.real), math.floor(r.real), math.ceil(r.real)}:
            if c3 * X**3 + c2 * X**2 + c1 * X + c0 == 0:
                out.append(int(X))
    return sorted(set(out))


def _is_torsion(curve: EllipticCurveQ, P: RationalPoint, cap: int = 16) -> bool:
    if P.infinity:
        return True
    R = P
    for _ in range(cap):
        R = curve.add(R, P)
        if R.infinity:
            return True
        # torsion points on the quarter-integral grid only
        if R.x.denominator > 4:
            return False
    return False


def torsion_points(curve: EllipticCurveQ) -> List[RationalPoint]:
    return sorted(
        _torsion_points_cached(curve.a_invariants),
        key=lambda P: (not P.infinity, P.x if not P.infinity else 0, P.y if not P.infinity else 0),
    )


def torsion_order(curve: EllipticCurveQ) -> int:
    """#E(Q)_tors via Lutz-Nagell candidates, exact multiplication checks and
    Mazur's bound; cross-checked against reduction mod good primes."""
    n = len(_torsion_points_cached(curve.a_invariants))
    assert n <= 16, "Mazur bound exceeded: torsion search is broken"
    # injectivity of reduction at odd good primes
    check = 0
    p = 3
    while check < 2:
        if curve.discriminant % p:
            np_ = p + 1 - trace_of_frobenius(curve, p)
            assert np_ % n == 0, f"torsion {n} does not divide #E(F_{p}) = {np_}"
            check += 1
        p += 2
        while not isprime(p):
            p += 2
    return n


# ---------------------------------------------------------------------------
# minimal models and quadratic twists


def minimal_model_from_c4c6(c4: int, c6: int, label: Optional[str] = None) -> EllipticCurveQ:
    """Laska-Kraus-Connell: the minimal integral model with given invariants."""
    disc, rem = divmod(c4**3 - c6**2, 1728)
    if rem or disc == 0:
        raise ValidationError("invalid (c4, c6): 1728*disc = c4^3 - c6^2 fails")
    u_max = 1
    for p in sorted(factorint(abs(disc))):
        e = min(
            (p_exp(abs(c4), p) // 4) if c4 else 10**9,
            (p_exp(abs(c6), p) // 6) if c6 else 10**9,
            p_exp(abs(disc), p) // 12,
        )
        u_max *= p**e
    divisors = sorted(_all_divisors(u_max), reverse=True)
    for u in divisors:
        if c4 % u**4 == 0 and c6 % u**6 == 0:
            model = _model_from_invariants(c4 // u**4, c6 // u**6)
            if model is not None:
                return EllipticCurveQ(model, label=label)
    raise ValidationError("no integral model found")  # pragma: no cover


def p_exp(n: int, p: int) -> int:
    if n == 0:
        return 10**9
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def _all_divisors(n: int) -> List[int]:
    divs = [1]
    for p, e in factorint(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return divs


def _model_from_invariants(c4: int, c6: int) -> Optional[Tuple[int, int, int, int, int]]:
    """(a1,..,a6) with the given (c4, c6), or None if no integral model exists."""
    for b2 in range(-5, 7):
        if (b2 * b2 - c4) % 24:
            continue
        b4 = (b2 * b2 - c4) // 24
        num = -(b2**3) + 36 * b2 * b4 - c6
        if num % 216:
            continue
        b6 = num // 216
        a1 = b2 % 2
        if (b2 - a1) % 4:
            continue
        a2 = (b2 - a1) // 4
        a3 = b6 % 2
        if (b4 - a1 * a3) % 2:
            continue
        a4 = (b4 - a1 * a3) // 2
        if (b6 - a3) % 4:
            continue
        a6 = (b6 - a3) // 4
        # verify round trip
        test_b2 = a1 * a1 + 4 * a2
        test_b4 = 2 * a4 + a1 * a3
        test_b6 = a3 * a3 + 4 * a6
        if (test_b2**2 - 24 * test_b4, -(test_b2**3) + 36 * test_b2 * test_b4 - 216 * test_b6) == (
            c4,
            c6,
        ):
            return (a1, a2, a3, a4, a6)
    return None


def quadratic_twist(curve: EllipticCurveQ, d: int) -> EllipticCurveQ:
    """The twist E^(d) by a squarefree integer, as a minimal model."""
    if d == 0:
        raise ValidationError("twist by zero")
    for p, e in factorint(abs(d)).items():
        if e > 1:
            raise ValidationError(f"{d} is not squarefree")
    label = f"{curve.label}^({d})" if curve.label else None
    return minimal_model_from_c4c6(curve.c4 * d * d, curve.c6 * d**3, label=label)


def transform_a_invariants(a_invs, r, s, t):
    """New a-invariants under x = x' + r, y = y' + s x' + t (u = 1)."""
    a1, a2, a3, a4, a6 = a_invs
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
    )


def isomorphism_to(src: EllipticCurveQ, dst: EllipticCurveQ):
    """(r, s, t) with [1, r, s, t] mapping src to dst, or None.

    Two minimal models of the same curve share (c4, c6), so u = 1 suffices.
    """
    if (src.c4, src.c6) != (dst.c4, dst.c6):
        return None
    s = Q(dst.a1 - src.a1, 2)
    r = Q(dst.b2 - src.b2, 12)
    t = Q(dst.a3 - src.a3 - r * src.a1, 2)
    if transform_a_invariants(src.a_invariants, r, s, t) == dst.a_invariants:
        return (r, s, t)
    return None


def map_point_between_models(src: EllipticCurveQ, dst: EllipticCurveQ, P: RationalPoint):
    """Transport P from src to the isomorphic model dst (exact)."""
    if P.infinity:
        return P
    iso = isomorphism_to(src, dst)
    if iso is None:
        raise ValidationError("models are not related by a [1,r,s,t] change")
    r, s, t = iso
    # inverse map: x' = x - r, y' = y - s(x - r) - t
    Pn = RationalPoint(P.x - r, P.y - s * (P.x - r) - t)
    if not dst.is_on_curve(Pn):
        raise ValidationError("point transport failed")
    return Pn


# ---------------------------------------------------------------------------
# identity component membership


def in_identity_component(curve: EllipticCurveQ, P: RationalPoint, q: int) -> bool:
    """True iff P mod q is a nonsingular point of the special fiber."""
    if not curve.is_on_curve(P):
        raise ValidationError("point not on curve")
    if P.infinity or curve.discriminant % q != 0:
        return True
    vx = p_exp(P.x.denominator, q)
    if vx > 0:
        return True  # reduces to the origin
    from .tate import singular_point_mod

    x0, y0 = singular_point_mod(curve, q)
    xr = P.x.numerator * pow(P.x.denominator, -1, q) % q
    yr = P.y.numerator * pow(P.y.denominator, -1, q) % q
    return not (xr == x0 and yr == y0)


# ---------------------------------------------------------------------------
# naive generator search


def search_generator(
    curve: EllipticCurveQ, naive_height_bound: int, p_saturation: Optional[int] = None
) -> Optional[RationalPoint]:
    """Non-torsion point of minimal canonical height among x = m/e^2 with
    |m| <= bound, e^2 <= bound.  None if the search space is empty of them.

    Saturation is heuristic at desk scale: the returned point has minimal
    height among everything the exhaustive search found (so a p-divisible
    generator would be caught whenever its divisor enters the search range).
    """
    if naive_height_bound < 0:
        raise ValidationError("negative bound")
    if naive_height_bound == 0:
        return None
    from .heights import canonical_height

    best, best_h = None, None
    e = 1
    while e * e <= naive_height_bound:
        for m in range(-naive_height_bound, naive_height_bound + 1):
            if math.gcd(m, e) != 1:
                continue
            P = curve.lift_x(Q(m, e * e))
            if P is None:
                continue
            if _is_torsion(curve, P):
                continue
            h = canonical_height(curve, P, precision=30)
            if best is None or h < best_h:
                best, best_h = P, h
        e += 1
    return best
