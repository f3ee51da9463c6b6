"""Heegner points: CM-point sums over class groups, algebraic recognition of
the trace point, the index exponent m0, and the numeric distribution relation.

The recognized avatar lives on E itself (Fricke sign +1) or on the twist by
the fundamental discriminant -D (sign -1); recognition doubles the trace
point so rational 2-torsion translation ambiguity drops out, and only odd-p
valuations of height ratios are ever consumed downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath as mp

from .curves import (
    EllipticCurveQ,
    RationalPoint,
    quadratic_twist,
    torsion_order,
    trace_of_frobenius,
)
from .forms import (
    Form,
    class_number,
    heegner_discriminants,
    heegner_form_representatives,
    is_fundamental_discriminant,
    reduced_forms,
)
from .heights import canonical_height
from .modular import (
    lattice_distance,
    modular_param,
    period_lattice,
    reduce_mod_lattice,
    terms_needed,
    weierstrass_xy,
)
from .numeric import ComputationError, GUARD_DIGITS, ValidationError, kronecker_symbol


@dataclass
class HeegnerSetup:
    """Level-N Heegner data for K = Q(sqrt(-D)): the square root beta of -D
    mod 4N fixes the ideal class used for every conductor."""

    curve: EllipticCurveQ
    D: int
    beta: int
    class_number: int
    forms: List[Form]
    allow_unit_discriminants: bool = False

    def __init__(self, curve: EllipticCurveQ, D: int, allow_unit_discriminants: bool = False):
        N = curve.conductor
        if not is_fundamental_discriminant(-D):
            raise ValidationError(f"-{D} is not a fundamental discriminant")
        for q in curve.bad_primes():
            if kronecker_symbol(-D, q) != 1:
                raise ValidationError(f"{q} | N is not split in Q(sqrt(-{D})): not Heegner")
        if D in (3, 4) and not allow_unit_discriminants:
            raise ValidationError(
                f"D = {D} has extra units (field unit group of order {6 if D == 3 else 4}); "
                "pass allow_unit_discriminants=True and mind the class-count correction"
            )
        beta = next((b for b in range(2 * N) if (b * b + D) % (4 * N) == 0), None)
        if beta is None:
            raise ValidationError(f"no square root of -{D} mod 4N")  # pragma: no cover
        self.curve = curve
        self.D = D
        self.beta = beta
        self.forms = reduced_forms(-D)
        self.class_number = len(self.forms)
        self.allow_unit_discriminants = allow_unit_discriminants


def heegner_forms(setup: HeegnerSetup, c: int = 1) -> List[Form]:
    """One level-N form per class of the order of conductor c (B = c*beta mod 2N)."""
    N = setup.curve.conductor
    if math.gcd(c, N * setup.D) != 1:
        raise ValidationError(f"conductor {c} must be prime to N*D")
    disc = -setup.D * c * c
    beta_c = (c * setup.beta) % (2 * N)
    return heegner_form_representatives(disc, N, beta_c)


def tau_of_form(form: Form, dps: int):
    A, B, C = form
    with mp.workdps(dps):
        disc = B * B - 4 * A * C
        return (-B + mp.sqrt(mp.mpc(disc))) / (2 * A)


@dataclass
class HeegnerPointResult:
    z: object  # elliptic log of the class-group sum (mpc)
    omega1: object
    omega2: object
    eigen_sign: int  # +1: avatar on E; -1: avatar on the twist by -D
    recognized: Optional[RationalPoint]
    recognized_curve: Optional[EllipticCurveQ]
    residual: object
    height: object
    precision: int
    unrecognized_reason: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.recognized is not None


def _continued_fraction_reconstruct(x, max_den: int) -> Tuple[Fraction, object]:
    """Best rational approximation with denominator <= max_den, plus the error."""
    p0, q0, p1, q1 = 1, 0, 0, 1  # convergents of the CF expansion
    v = mp.mpf(x)
    rem = v
    for _ in range(20000):
        a = int(mp.floor(rem))
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        if q0 > max_den:
            best = Fraction(p1, q1)
            return best, abs(v - mp.mpf(p1) / q1)
        frac = rem - a
        if frac < mp.mpf(10) ** (-mp.mp.dps + 6):
            return Fraction(p0, q0), abs(v - mp.mpf(p0) / q0)
        rem = 1 / frac
    return Fraction(p0, q0), abs(v - mp.mpf(p0) / q0)  # pragma: no cover


def _standard_model_to(curve: EllipticCurveQ, X: Fraction, Y: Fraction) -> Optional[RationalPoint]:
    """Pull (X, Y) on Y^2 = X^3 - 27 c4 X - 54 c6 back to the given model."""
    x = (X - 3 * curve.b2) / 36
    y = (Y / 108 - curve.a1 * x - curve.a3) / 2
    P = RationalPoint(x, y)
    return P if curve.is_on_curve(P) else None


def heegner_point(setup: HeegnerSetup, precision: int = 80, n_terms_cap: int = 500000) -> HeegnerPointResult:
    """Sum the modular parametrization over the class group, split off the
    eigen-sign, and recognize twice the (anti-)trace as an exact point."""
    curve = setup.curve
    dps = precision + GUARD_DIGITS
    with mp.workdps(dps):
        w1, w2 = period_lattice(curve, precision + 10)
        z = mp.mpc(0)
        for form in heegner_forms(setup, 1):
            tau = tau_of_form(form, dps)
            nt = terms_needed(abs(mp.exp(2j * mp.pi * tau)), precision + 8, cap=n_terms_cap)
            z += modular_param(curve, tau, precision + 5, nt)
        zbar = mp.conj(z)
        tol = mp.mpf(10) ** (-(precision // 2))
        k2 = 2 * torsion_order(curve)
        d_minus_part = lattice_distance(k2 * (z + zbar), w1, w2)
        d_plus_part = lattice_distance(k2 * (z - zbar), w1, w2)

        def unrecognized(reason):
            return HeegnerPointResult(
                z, w1, w2, 0, None, None, mp.inf, mp.mpf(0), precision, reason
            )

        if d_plus_part < tol and d_minus_part < tol:
            return unrecognized("class-group sum is torsion: y_K has finite order")
        if d_plus_part < tol:
            sign, u = +1, z + zbar
            target = curve
            C4, C6 = curve.c4, curve.c6
        elif d_minus_part < tol:
            sign, u = -1, z - zbar
            target = quadratic_twist(curve, -setup.D)
            C4, C6 = curve.c4 * setup.D**2, -curve.c6 * setup.D**3
        else:
            raise ComputationError(
                "neither eigen-projection of the Heegner sum is torsion at this precision"
            )

        u_rec, _ = reduce_mod_lattice(2 * u, w1, w2)
        xc, yc = weierstrass_xy(curve, u_rec, w1, w2, precision)
        X_std = 36 * xc + 3 * curve.b2
        Y_std = 108 * (2 * yc + curve.a1 * xc + curve.a3)
        if sign == +1:
            Xt, Yt = mp.re(X_std), mp.re(Y_std)
            imag_leak = abs(mp.im(X_std)) + abs(mp.im(Y_std))
        else:
            Xt = -setup.D * mp.re(X_std)
            Yt = setup.D * mp.sqrt(mp.mpf(setup.D)) * mp.im(Y_std)
            imag_leak = abs(mp.im(X_std)) + abs(mp.re(Y_std))
        if imag_leak > tol:
            raise ComputationError(f"eigen-projection leaked off the real locus: {imag_leak}")

        max_den = 10 ** (precision // 3)
        Xr, err_x = _continued_fraction_reconstruct(Xt, max_den)
        if err_x > tol:
            return unrecognized(f"x-coordinate reconstruction residual {mp.nstr(err_x, 6)}")
        point = _standard_model_to(target, Xr, Fraction(0))
        # solve for Y exactly on the standard model
        rhs = Xr**3 - 27 * C4 * Xr - 54 * C6
        ynum, yden = rhs.numerator, rhs.denominator
        sy = math.isqrt(abs(ynum)) if ynum >= 0 else -1
        sd = math.isqrt(yden)
        if sy < 0 or sy * sy != ynum or sd * sd != yden:
            return unrecognized("recognized x does not lift: Y^2 value is not a square")
        Yr = Fraction(sy, sd)
        if mp.mpf(Yt) < 0:
            Yr = -Yr
        point = _standard_model_to(target, Xr, Yr)
        if point is None:
            return unrecognized("standard-model point failed the exact on-curve check")
        residual = err_x + abs(Yt - mp.mpf(Yr.numerator) / Yr.denominator)
        height = canonical_height(target, point, precision=min(precision, 60))
        return HeegnerPointResult(z, w1, w2, sign, point, target, residual, height, precision)


def heegner_index(
    setup: HeegnerSetup,
    p: int,
    generator: RationalPoint,
    result: Optional[HeegnerPointResult] = None,
    precision: int = 80,
) -> int:
    """m0 = ord_p of the index [E(K) : Z y_K], from the height ratio of the
    recognized avatar against a Mordell-Weil generator on the same curve.

    Powers of 2 in the ratio are discarded (p is odd), which also absorbs the
    doubling used during recognition.
    """
    if p == 2 or p < 2:
        raise ValidationError("p must be an odd prime")
    if result is None:
        result = heegner_point(setup, precision)
    if not result.ok:
        raise ComputationError(f"no recognized Heegner avatar: {result.unrecognized_reason}")
    target = result.recognized_curve
    if not target.is_on_curve(generator):
        raise ValidationError("generator must lie on the recognized avatar's curve")
    with mp.workdps(precision + GUARD_DIGITS):
        hy = result.height
        hg = canonical_height(target, generator, precision=min(precision, 60))
        if hg <= 0:
            raise ValidationError("generator is torsion")
        ratio = hy / hg
        s = mp.sqrt(ratio)
        n = int(mp.nint(s))
        if n < 1 or abs(s - n) > mp.mpf("1e-10"):
            frac, err = _continued_fraction_reconstruct(s, 10**4)
            if err < mp.mpf("1e-10") and frac.denominator > 1:
                raise ComputationError(
                    f"height ratio sqrt {mp.nstr(s, 12)} is {frac}: generator not saturated"
                )
            raise ComputationError(
                f"height ratio sqrt {mp.nstr(s, 12)} is not near an integer"
            )
    m0 = 0
    while n % p == 0:
        n //= p
        m0 += 1
    return m0


def verify_distribution(setup: HeegnerSetup, ell: int, precision: int = 60, n_terms_cap: int = 500000):
    """Residual of Tr y_l = a_l * y_1 as a lattice distance: sums the
    parametrization over all conductor-l classes minus a_l times the
    conductor-1 sum."""
    curve = setup.curve
    N = curve.conductor
    if math.gcd(ell, N * setup.D) != 1:
        raise ValidationError("l must be coprime to N*D")
    if kronecker_symbol(-setup.D, ell) != -1:
        raise ValidationError(f"{ell} is not inert in Q(sqrt(-{setup.D}))")
    a_ell = trace_of_frobenius(curve, ell)
    dps = precision + GUARD_DIGITS
    with mp.workdps(dps):
        w1, w2 = period_lattice(curve, precision + 10)
        z1 = mp.mpc(0)
        for form in heegner_forms(setup, 1):
            tau = tau_of_form(form, dps)
            nt = terms_needed(abs(mp.exp(2j * mp.pi * tau)), precision + 8, cap=n_terms_cap)
            z1 += modular_param(curve, tau, precision + 5, nt)
        z_ell = mp.mpc(0)
        forms_ell = heegner_forms(setup, ell)
        if setup.D > 4 and len(forms_ell) != setup.class_number * (ell + 1):
            raise ComputationError(
                f"conductor-{ell} class count {len(forms_ell)} != h*(l+1) "
                f"= {setup.class_number * (ell + 1)}"
            )
        for form in forms_ell:
            tau = tau_of_form(form, dps)
            nt = terms_needed(abs(mp.exp(2j * mp.pi * tau)), precision + 8, cap=n_terms_cap)
            z_ell += modular_param(curve, tau, precision + 5, nt)
        residual = lattice_distance(z_ell - a_ell * z1, w1, w2)
        return +residual
