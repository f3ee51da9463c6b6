"""Modular-side analytics: L-series coefficients, the modular parametrization
as an elliptic-log series, period lattices via AGM, Weierstrass functions,
and the Fricke eigenvalue from the functional equation.

All heavy arithmetic runs under mpmath working precision with guard digits;
results are plain mpf/mpc values produced inside explicit workdps blocks.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import mpmath as mp

from .curves import EllipticCurveQ, ap_table
from .numeric import ComputationError, ValidationError, GUARD_DIGITS

_AN_CACHE: Dict[Tuple[int, int, int, int, int], List[int]] = {}


def an_list(curve: EllipticCurveQ, n_max: int) -> List[int]:
    """[a_0 .. a_n_max] with a_0 = 0, by the Hecke recursion from point counts."""
    key = curve.a_invariants
    cached = _AN_CACHE.get(key)
    if cached is not None and len(cached) > n_max:
        return cached[: n_max + 1]
    ap = ap_table(curve, n_max)
    spf = list(range(n_max + 1))
    for i in range(2, int(n_max**0.5) + 1):
        if spf[i] == i:
            for j in range(i * i, n_max + 1, i):
                if spf[j] == j:
                    spf[j] = i
    an = [0] * (n_max + 1)
    if n_max >= 1:
        an[1] = 1
    for n in range(2, n_max + 1):
        p = spf[n]
        m = n // p
        if m % p:
            an[n] = an[m] * ap[p]
        elif curve.conductor % p == 0:
            an[n] = ap[p] * an[m]
        else:
            an[n] = ap[p] * an[m] - p * an[m // p]
    _AN_CACHE[key] = an
    return an


def qseries_tail_bound(abs_q, n_terms: int):
    """Upper bound for sum_{n > T} d(n) sqrt(n) |q|^n, using d(n) sqrt(n) <= n^1.5."""
    T = n_terms
    rho = abs_q * (1 + mp.mpf(1) / T) ** mp.mpf("1.5")
    if rho >= 1:
        return mp.inf
    return mp.mpf(T + 1) ** mp.mpf("1.5") * abs_q ** (T + 1) / (1 - rho)


def terms_needed(abs_q, precision: int, cap: int = 2_000_000) -> int:
    """Smallest T with the q-series tail below 10^-precision."""
    target = mp.mpf(10) ** (-precision)
    T = max(8, int(precision / max(-mp.log10(abs_q), mp.mpf("1e-9"))))
    while T <= cap:
        if qseries_tail_bound(abs_q, T) < target:
            return T
        T = int(T * 1.3) + 8
    raise ComputationError("q-series does not reach the requested precision under the term cap")


def modular_param(curve: EllipticCurveQ, tau, precision: int, n_terms: int):
    """z(tau) = sum a_n/n q^n, an elliptic log on C/Lambda_E.

    Rejects up front if n_terms cannot meet the tail bound 10^-precision.
    """
    with mp.workdps(precision + GUARD_DIGITS):
        tau = mp.mpc(tau)
        if mp.im(tau) <= 0:
            raise ValidationError("tau must lie in the upper half-plane")
        q = mp.exp(2j * mp.pi * tau)
        if qseries_tail_bound(abs(q), n_terms) >= mp.mpf(10) ** (-precision):
            raise ValidationError(
                f"n_terms = {n_terms} insufficient for precision {precision} at |q| = {mp.nstr(abs(q), 8)}"
            )
        an = an_list(curve, n_terms)
        z = mp.mpc(0)
        qn = mp.mpc(1)
        for n in range(1, n_terms + 1):
            qn *= q
            if an[n]:
                z += mp.mpf(an[n]) / n * qn
        return +z


def period_lattice(curve: EllipticCurveQ, precision: int):
    """(w1, w2): w1 the least positive real period, Im(w2/w1) > 0.

    AGM on the roots of 4x^3 + b2 x^2 + 2 b4 x + b6; validated by
    reconstructing c4 and c6 through Eisenstein series.
    """
    dps = precision + GUARD_DIGITS
    with mp.workdps(dps):
        roots = mp.polyroots(
            [4, curve.b2, 2 * curve.b4, curve.b6], maxsteps=200, extraprec=120
        )
        tol = mp.mpf(10) ** (-dps + 8)
        reals = sorted((r for r in roots if abs(mp.im(r)) < tol), key=lambda r: mp.re(r))
        if len(reals) == 3:
            e3, e2, e1 = (mp.mpc(r.real) for r in reals)
        else:
            e1 = mp.mpc(max(r.real for r in roots if abs(mp.im(r)) < tol))
            others = sorted(
                (r for r in roots if abs(mp.im(r)) >= tol), key=lambda r: mp.im(r)
            )
            e3, e2 = others[0], others[1]
        a = mp.sqrt(e1 - e3)
        b = mp.sqrt(e1 - e2)
        c = mp.sqrt(e2 - e3)
        w1 = mp.pi / _optimal_agm(a, b, dps)
        w2 = mp.mpc(0, 1) * mp.pi / _optimal_agm(a, c, dps)
        w1 = mp.re(w1) + 0j if abs(mp.im(w1)) < tol * abs(w1) else w1
        if mp.im(w2 / w1) < 0:
            w2 = -w2
        _validate_lattice(curve, w1, w2, precision)
        return +w1, +w2


def _optimal_agm(x, y, dps):
    x, y = mp.mpc(x), mp.mpc(y)
    eps = mp.mpf(10) ** (-dps + 4)
    while abs(x - y) > eps * abs(x):
        am = (x + y) / 2
        g = mp.sqrt(x * y)
        if abs(am - g) > abs(am + g):
            g = -g
        x, y = am, g
    return x


def eisenstein_E4_E6(tau, precision: int):
    with mp.workdps(precision + GUARD_DIGITS):
        q = mp.exp(2j * mp.pi * mp.mpc(tau))
        n_terms = terms_needed(abs(q), precision)
        sigma3 = _sigma_table(n_terms, 3)
        sigma5 = _sigma_table(n_terms, 5)
        E4, E6 = mp.mpc(1), mp.mpc(1)
        qn = mp.mpc(1)
        for n in range(1, n_terms + 1):
            qn *= q
            E4 += 240 * sigma3[n] * qn
            E6 -= 504 * sigma5[n] * qn
        return E4, E6


def _sigma_table(n_max: int, k: int) -> List[int]:
    table = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dk = d**k
        for m in range(d, n_max + 1, d):
            table[m] += dk
    return table


def _validate_lattice(curve: EllipticCurveQ, w1, w2, precision: int):
    check_prec = min(precision, 30)
    tau = w2 / w1
    E4, E6 = eisenstein_E4_E6(tau, check_prec)
    c4_an = (2 * mp.pi / w1) ** 4 * E4
    c6_an = (2 * mp.pi / w1) ** 6 * E6
    err = abs(c4_an - curve.c4) + abs(c6_an - curve.c6)
    if err > mp.mpf(10) ** (-check_prec + 10) * (1 + abs(curve.c4) + abs(curve.c6)):
        raise ComputationError(f"period lattice failed c4/c6 reconstruction: err = {err}")


def reduce_mod_lattice(z, w1, w2):
    """(z reduced to the centered fundamental parallelogram, distance to Lambda)."""
    z = mp.mpc(z)
    det = mp.re(w1) * mp.im(w2) - mp.re(w2) * mp.im(w1)
    t = (mp.re(z) * 0 + mp.im(z) * mp.re(w1) - mp.re(z) * mp.im(w1)) / det
    s = (mp.re(z) * mp.im(w2) - mp.im(z) * mp.re(w2)) / det
    sf = s - mp.nint(s)
    tf = t - mp.nint(t)
    zr = sf * w1 + tf * w2
    return zr, abs(zr)


def lattice_distance(z, w1, w2):
    """Distance from z to the nearest lattice point (nearby points swept)."""
    zr, _ = reduce_mod_lattice(z, w1, w2)
    best = abs(zr)
    for ds in (-1, 0, 1):
        for dt in (-1, 0, 1):
            best = min(best, abs(zr + ds * w1 + dt * w2))
    return best


def weierstrass_xy(curve: EllipticCurveQ, z, w1, w2, precision: int):
    """Coordinates (x, y) on the given Weierstrass model for z mod Lambda."""
    with mp.workdps(precision + GUARD_DIGITS):
        z = mp.mpc(z)
        tau = w2 / w1
        q = mp.exp(2j * mp.pi * tau)
        u = mp.exp(2j * mp.pi * z / w1)
        n_terms = terms_needed(abs(q), precision + 8)
        one = mp.mpc(1)
        pw = mp.mpf(1) / 12 + u / (one - u) ** 2
        pwp = u * (one + u) / (one - u) ** 3
        qn = mp.mpc(1)
        for _ in range(1, n_terms + 1):
            qn *= q
            qu = qn * u
            qiu = qn / u
            pw += qu / (one - qu) ** 2 + qiu / (one - qiu) ** 2 - 2 * qn / (one - qn) ** 2
            pwp += qu * (one + qu) / (one - qu) ** 3 - qiu * (one + qiu) / (one - qiu) ** 3
        scale = 2j * mp.pi / w1
        pw = scale**2 * pw
        pwp = scale**3 * pwp
        x = pw - mp.mpf(curve.b2) / 12
        y = (pwp - curve.a1 * x - curve.a3) / 2
        return +x, +y


def elliptic_log(curve: EllipticCurveQ, point_xy, w1, w2, precision: int):
    """Elliptic logarithm of a real point (x, y), by inverting the x-series.

    Only used for cross-checks; Newton iteration on weierstrass_xy from a
    crude starting value.
    """
    with mp.workdps(precision + GUARD_DIGITS):
        x_target = mp.mpf(point_xy[0])
        # crude search on the real period circle, then Newton on x(z)
        best_z, best_err = None, mp.inf
        for k in range(1, 400):
            z = w1 * k / mp.mpf(400)
            try:
                x, _ = weierstrass_xy(curve, z, w1, w2, 20)
            except ZeroDivisionError:
                continue
            err = abs(x - x_target)
            if err < best_err:
                best_z, best_err = z, err
        z = best_z
        h = mp.mpf(10) ** (-(precision // 2))
        for _ in range(60):
            x, y = weierstrass_xy(curve, z, w1, w2, precision)
            dx = 2 * y + curve.a1 * x + curve.a3  # dx/dz = psi2 value
            if abs(dx) < mp.mpf(10) ** (-precision):
                break
            step = (x - x_target) / dx
            z = z - step
            if abs(step) < h:
                break
        return +z


def fricke_eigenvalue(curve: EllipticCurveQ, precision: int = 24) -> int:
    """Sign of the Fricke involution on the newform: f(-1/(N tau)) = eps N tau^2 f(tau)."""
    N = curve.conductor
    with mp.workdps(precision + GUARD_DIGITS):
        t = mp.mpf("1.37")
        tau1 = mp.mpc(0, t / mp.sqrt(N))
        tau2 = mp.mpc(0, 1 / (t * mp.sqrt(N)))  # = -1/(N tau1)
        q1 = mp.exp(2j * mp.pi * tau1)
        q2 = mp.exp(2j * mp.pi * tau2)
        n_terms = terms_needed(max(abs(q1), abs(q2)), precision + 6)
        an = an_list(curve, n_terms)

        def f(q):
            total = mp.mpc(0)
            qn = mp.mpc(1)
            for n in range(1, n_terms + 1):
                qn *= q
                if an[n]:
                    total += an[n] * qn
            return total

        ratio = f(q2) / (N * tau1**2 * f(q1))
        eps = int(mp.nint(mp.re(ratio)))
        if abs(ratio - eps) > mp.mpf("1e-6") or eps not in (-1, 1):
            raise ComputationError(f"Fricke eigenvalue did not converge: ratio = {ratio}")
        return eps
