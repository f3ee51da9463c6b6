"""Tate's algorithm at a prime q: Kodaira type, Tamagawa number, reduction
type and conductor exponent, on a globally minimal integral model.

Runs the full algorithm for every residue characteristic (q = 2, 3 included).
Reaching the non-minimality step rejects the input instead of rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

from sympy import GF, Poly, Symbol, isprime

from .numeric import ValidationError


class NonMinimalModel(ValidationError):
    """The input model is not minimal at some prime."""


@dataclass(frozen=True)
class LocalData:
    q: int
    kodaira: str
    tamagawa: int
    reduction: str  # good | split-multiplicative | nonsplit-multiplicative | additive
    v_disc: int
    conductor_exponent: int


def _transform(a, r, s, t):
    """a-invariants under x = x' + r, y = y' + s x' + t."""
    a1, a2, a3, a4, a6 = a
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
    )


def _b_invariants(a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def _vq(n: int, q: int) -> int:
    if n == 0:
        return 10**9
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


def _poly_roots_mod(coeffs, q):
    """Distinct roots mod q of the polynomial with descending coefficients."""
    coeffs = [c % q for c in coeffs]
    if q <= 1000:
        roots = []
        for x in range(q):
            acc = 0
            for c in coeffs:
                acc = (acc * x + c) % q
            if acc == 0:
                roots.append(x)
        return roots
    T = Symbol("T")
    expr = 0
    for c in coeffs:
        expr = expr * T + c
    poly = Poly(expr, T, domain=GF(q))
    return sorted(int(r) % q for r in poly.ground_roots())


def _quadratic_has_root(A, B, C, q):
    """Does A T^2 + B T + C = 0 have a root in F_q (A may vanish mod q)?"""
    A, B, C = A % q, B % q, C % q
    if q == 2 or A == 0:
        return bool(_poly_roots_mod([A, B, C], q))
    disc = (B * B - 4 * A * C) % q
    return disc == 0 or pow(disc, (q - 1) // 2, q) == 1


def _double_root_of_quadratic(A, B, C, q):
    """alpha with A T^2 + B T + C = A (T - alpha)^2 mod q (assumed to exist)."""
    if q != 2:
        return (-B * pow(2 * A, -1, q)) % q
    for alpha in (0, 1):
        if (A * alpha * alpha + B * alpha + C) % 2 == 0:
            return alpha
    raise AssertionError("no double root found")  # pragma: no cover


def singular_point_mod(curve, q: int):
    """The unique singular point (x0, y0) of the reduced curve mod q."""
    a1, a2, a3, a4, a6 = (a % q for a in curve.a_invariants)
    if q <= 3:
        for x in range(q):
            for y in range(q):
                f = (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % q
                fx = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % q
                fy = (2 * y + a1 * x + a3) % q
                if f == 0 and fx == 0 and fy == 0:
                    return (x, y)
        raise AssertionError(f"no singular point mod {q}")  # pragma: no cover
    b2, b4, b6, _ = _b_invariants(curve.a_invariants)
    # repeated root of G(x) = 4x^3 + b2 x^2 + 2 b4 x + b6 via gcd(G, G')
    g = [4 % q, b2 % q, (2 * b4) % q, b6 % q]
    dg = [12 % q, (2 * b2) % q, (2 * b4) % q]
    h = _poly_gcd_mod(g, dg, q)
    if len(h) == 2:  # linear: (x - x0)
        x0 = (-h[1] * pow(h[0], -1, q)) % q
    elif len(h) == 3:  # (x - x0)^2
        x0 = (-h[1] * pow(2 * h[0], -1, q)) % q
    else:  # pragma: no cover
        raise AssertionError("unexpected gcd degree in singular point search")
    y0 = (-(a1 * x0 + a3) * pow(2, -1, q)) % q
    return (x0, y0)


def _poly_strip(p, q):
    p = [c % q for c in p]
    i = 0
    while i < len(p) and p[i] == 0:
        i += 1
    return p[i:]


def _poly_mod(f, g, q):
    """Remainder of f by nonzero g over F_q (dense, descending coefficients)."""
    f = _poly_strip(f, q)
    ginv = pow(g[0], -1, q)
    while len(f) >= len(g):
        c = (f[0] * ginv) % q
        if c:
            for i in range(len(g)):
                f[i] = (f[i] - c * g[i]) % q
        f = _poly_strip(f[1:], q)
    return f


def _poly_gcd_mod(f, g, q):
    """Monic gcd over F_q; [1] when coprime, [] only if both inputs vanish."""
    f, g = _poly_strip(f, q), _poly_strip(g, q)
    while g:
        f, g = g, _poly_mod(f, g, q)
    if not f:
        return []
    inv = pow(f[0], -1, q)
    return [(c * inv) % q for c in f]


def _cubic_root_structure(coeffs, q):
    """Root multiplicity pattern of a monic cubic mod q.

    Returns ("separable", roots) or ("double", alpha) or ("triple", alpha).
    Brute force for small q (safe in characteristic 2 and 3), gcd with the
    derivative otherwise.
    """
    c3, c2, c1, c0 = (c % q for c in coeffs)
    assert c3 == 1
    if q <= 1000:
        roots = []
        for x in range(q):
            if (((x + c2) * x + c1) * x + c0) % q == 0:
                roots.append(x)
        for alpha in roots:
            # synthetic division by (T - alpha), twice
            b2 = (c2 + alpha) % q
            b1 = (c1 + alpha * b2) % q
            if (b1 + alpha * (b2 + alpha)) % q == 0:
                # (T - alpha)^2 divides; triple iff remaining root is alpha too
                beta = (-(c2 + 2 * alpha)) % q
                return ("triple", alpha) if beta == alpha else ("double", alpha)
        return ("separable", roots)
    dp = [3 % q, (2 * c2) % q, c1]
    h = _poly_gcd_mod(coeffs, dp, q)
    if len(h) == 1:
        return ("separable", _poly_roots_mod(coeffs, q))
    if len(h) == 2:
        return ("double", (-h[1]) % q)
    # h = (T - alpha)^2
    return ("triple", (-h[1] * pow(2, -1, q)) % q)


def local_data(curve, q: int) -> LocalData:
    if not isprime(q):
        raise ValidationError(f"{q} is not prime")
    a = tuple(curve.a_invariants)
    disc = curve.discriminant
    n = _vq(disc, q)
    if n == 0:
        return LocalData(q, "I0", 1, "good", 0, 0)

    # move the singular point of the reduction to (0, 0)
    x0, y0 = singular_point_mod(curve, q)
    a = _transform(a, x0, 0, y0)
    a1, a2, a3, a4, a6 = a
    assert a3 % q == 0 and a4 % q == 0 and a6 % q == 0
    b2, b4, b6, b8 = _b_invariants(a)

    if b2 % q != 0:
        # multiplicative: I_n with the node's tangent quadratic T^2 + a1 T - a2
        split = _quadratic_has_root(1, a1, -a2, q)
        if split:
            c = n
            red = "split-multiplicative"
        else:
            c = 2 if n % 2 == 0 else 1
            red = "nonsplit-multiplicative"
        return LocalData(q, f"I{n}", c, red, n, 1)

    # additive from here on
    if _vq(a6, q) < 2:
        return LocalData(q, "II", 1, "additive", n, n)
    if _vq(b8, q) < 3:
        return LocalData(q, "III", 2, "additive", n, n - 1)
    if _vq(b6, q) < 3:
        c = 3 if _quadratic_has_root(1, a3 // q, -(a6 // q**2), q) else 1
        return LocalData(q, "IV", c, "additive", n, n - 2)

    # normalize to q | a1, a2; q^2 | a3, a4; q^3 | a6
    if q == 2:
        s = a2 % 2
        a = _transform(a, 0, s, 0)
        t = 2 * ((a[4] // 4) % 2)
        a = _transform(a, 0, 0, t)
    else:
        s = (-a1 * pow(2, -1, q)) % q
        a = _transform(a, 0, s, 0)
        t = (-a[2] * pow(2, -1, q * q)) % (q * q)
        a = _transform(a, 0, 0, t)
    a1, a2, a3, a4, a6 = a
    assert a1 % q == 0 and a2 % q == 0
    assert a3 % q**2 == 0 and a4 % q**2 == 0 and a6 % q**3 == 0

    # P(T) = T^3 + (a2/q) T^2 + (a4/q^2) T + (a6/q^3) mod q
    p_coeffs = [1, (a2 // q) % q, (a4 // q**2) % q, (a6 // q**3) % q]
    kind, data = _cubic_root_structure(p_coeffs, q)

    if kind == "separable":
        c = 1 + len(data)
        return LocalData(q, "I0*", c, "additive", n, n - 4)

    if kind == "double":
        # I_m* for some m >= 1: move the double root to 0
        alpha = data
        a = _transform(a, q * alpha, 0, 0)
        a1, a2, a3, a4, a6 = a
        assert _vq(a2, q) == 1 and _vq(a3, q) >= 2 and _vq(a4, q) >= 3 and _vq(a6, q) >= 4
        m_star = 1
        k = 2
        while True:
            # stage A: Y^2 + (a3/q^k) Y - a6/q^(2k)
            A3, A6 = a3 // q**k, a6 // q ** (2 * k)
            if (A3 * A3 + 4 * A6) % q != 0:
                c = 4 if _quadratic_has_root(1, A3, -A6, q) else 2
                return LocalData(q, f"I{m_star}*", c, "additive", n, n - 4 - m_star)
            alpha = _double_root_of_quadratic(1, A3, -A6, q)
            a = _transform(a, 0, 0, q**k * alpha)
            a1, a2, a3, a4, a6 = a
            m_star += 1
            # stage B: (a2/q) X^2 + (a4/q^(k+1)) X + a6/q^(2k+1)
            A2, A4, A6 = a2 // q, a4 // q ** (k + 1), a6 // q ** (2 * k + 1)
            if (A4 * A4 - 4 * A2 * A6) % q != 0:
                c = 4 if _quadratic_has_root(A2, A4, A6, q) else 2
                return LocalData(q, f"I{m_star}*", c, "additive", n, n - 4 - m_star)
            alpha = _double_root_of_quadratic(A2, A4, A6, q)
            a = _transform(a, q**k * alpha, 0, 0)
            a1, a2, a3, a4, a6 = a
            m_star += 1
            k += 1

    # triple root: move it to 0
    alpha = data
    a = _transform(a, q * alpha, 0, 0)
    a1, a2, a3, a4, a6 = a
    assert _vq(a2, q) >= 2 and _vq(a4, q) >= 3 and _vq(a6, q) >= 4

    # Y^2 + (a3/q^2) Y - a6/q^4
    A3, A6 = a3 // q**2, a6 // q**4
    if (A3 * A3 + 4 * A6) % q != 0:
        c = 3 if _quadratic_has_root(1, A3, -A6, q) else 1
        return LocalData(q, "IV*", c, "additive", n, n - 6)
    alpha = _double_root_of_quadratic(1, A3, -A6, q)
    a = _transform(a, 0, 0, q**2 * alpha)
    a1, a2, a3, a4, a6 = a
    assert _vq(a3, q) >= 3 and _vq(a6, q) >= 5

    if _vq(a4, q) < 4:
        return LocalData(q, "III*", 2, "additive", n, n - 7)
    if _vq(a6, q) < 6:
        return LocalData(q, "II*", 1, "additive", n, n - 8)
    raise NonMinimalModel(f"model is not minimal at {q}")
