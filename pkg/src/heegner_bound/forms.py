"""Binary quadratic forms of negative discriminant: reduced representatives,
class numbers, and Heegner representatives of level N.

A form is the integer triple (A, B, C) of A x^2 + B x y + C y^2, positive
definite, discriminant B^2 - 4AC < 0.
"""

from __future__ import annotations

import math
from typing import List, Tuple

from .numeric import ValidationError, kronecker_symbol

Form = Tuple[int, int, int]


def discriminant_of(form: Form) -> int:
    a, b, c = form
    return b * b - 4 * a * c


def is_fundamental_discriminant(d: int) -> bool:
    """Fundamental negative discriminant (d < 0)."""
    if d >= 0:
        return False
    if d % 4 == 1:
        return _squarefree(-d)
    if d % 4 == 0:
        k = d // 4
        return _squarefree(-k) and (k % 4 == 2 or k % 4 == 3)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    i = 2
    while i * i <= n:
        if n % (i * i) == 0:
            return False
        i += 1
    return True


def reduced_forms(disc: int, primitive_only: bool = True) -> List[Form]:
    """All reduced forms of the given negative discriminant, sorted.

    Reduced: |B| <= A <= C, with B >= 0 when |B| = A or A = C.  The count of
    primitive ones is the class number h(disc).
    """
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValidationError(f"{disc} is not a negative discriminant")
    out = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a, a + 1):
            if (b - disc) % 2:
                continue
            num = b * b - disc
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (a == c or -b == a):
                continue
            if primitive_only and math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return sorted(out)


def class_number(disc: int) -> int:
    return len(reduced_forms(disc))


def reduce_form(form: Form) -> Form:
    """Classical reduction: normalize then flip until reduced."""
    a, b, c = form
    if a <= 0 or discriminant_of(form) >= 0:
        raise ValidationError("form must be positive definite")
    while True:
        if not (-a < b <= a):
            # normalize: b -> b + 2ka with -a < b' <= a
            k = (a - b) // (2 * a)
            b, c = b + 2 * k * a, a * k * k + b * k + c
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        break
    return (a, b, c)


def form_apply(form: Form, mat) -> Form:
    """Right action of [[p, q], [r, s]] in SL2(Z) on a form."""
    a, b, c = form
    p, q, r, s = mat
    A = a * p * p + b * p * r + c * r * r
    B = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s
    C = a * q * q + b * q * s + c * s * s
    return (A, B, C)


def reduce_form_with_transform(form: Form):
    """(reduced form, M in SL2(Z)) with reduced = form acted on by M."""
    g = form
    mat = (1, 0, 0, 1)
    while True:
        a, b, c = g
        if not (-a < b <= a):
            k = (a - b) // (2 * a)  # b + 2ka in (-a, a]
            g = form_apply(g, (1, k, 0, 1))
            mat = _mat_mul(mat, (1, k, 0, 1))
            continue
        if a > c:
            g = form_apply(g, (0, -1, 1, 0))
            mat = _mat_mul(mat, (0, -1, 1, 0))
            continue
        if a == c and b < 0:
            g = form_apply(g, (0, -1, 1, 0))
            mat = _mat_mul(mat, (0, -1, 1, 0))
            continue
        return g, mat


def _mat_mul(m1, m2):
    p1, q1, r1, s1 = m1
    p2, q2, r2, s2 = m2
    return (p1 * p2 + q1 * r2, p1 * q2 + q1 * s2, r1 * p2 + s1 * r2, r1 * q2 + s1 * s2)


def heegner_discriminants(N: int, bound: int) -> List[int]:
    """Fundamental D in (0, bound] with every prime q | N split in Q(sqrt(-D))."""
    if N < 1:
        raise ValidationError("level must be positive")
    qs = _prime_factors(N)
    out = []
    for D in range(3, bound + 1):
        if not is_fundamental_discriminant(-D):
            continue
        if all(kronecker_symbol(-D, q) == 1 for q in qs):
            out.append(D)
    return out


def _prime_factors(n: int) -> List[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def sqrt_mod(a: int, n: int) -> List[int]:
    """All square roots of a modulo n (brute force; n stays desk-sized here)."""
    a %= n
    return [x for x in range(n) if (x * x - a) % n == 0]


def heegner_form_representatives(disc: int, N: int, beta: int) -> List[Form]:
    """One form per class of discriminant disc, each with N | A and
    B = beta (mod 2N).  Requires beta^2 = disc (mod 4N).

    For each reduced class representative g, scans the finitely many
    projective solutions (u : v) of g(u, v) = 0 mod N, transports g by a
    completed SL2 matrix, and keeps the transport whose B lands on beta.
    """
    if (beta * beta - disc) % (4 * N):
        raise ValidationError("beta^2 != disc mod 4N: not a Heegner setup")
    result = []
    for g in reduced_forms(disc):
        rep = _heegner_representative(g, N, beta, disc)
        if rep is None:
            raise ValidationError(
                f"no level-{N} representative with B = {beta} mod {2*N} for class {g}"
            )
        result.append(rep)
    return result


def _heegner_representative(g: Form, N: int, beta: int, disc: int):
    a, b, c = g
    seen = set()
    candidates = []
    for u in range(N):
        if (a * u * u + b * u + c) % N == 0:
            candidates.append((u, 1))
    if a % N == 0:
        candidates.append((1, 0))
    # also non-unit v for composite N
    for v in range(2, N):
        if math.gcd(v, N) <= 1:
            continue
        for u in range(N):
            if math.gcd(math.gcd(u, v), N) != 1:
                continue
            if (a * u * u + b * u * v + c * v * v) % N == 0:
                candidates.append((u, v))
    for u, v in candidates:
        u, v = _coprime_lift(u, v, N)
        if (u, v) in seen:
            continue
        seen.add((u, v))
        # complete to SL2 with first column (u, v): need u*s + q*v = 1
        gcd, s, q = _ext_gcd(u, v)
        if gcd != 1:
            continue
        mat = (u, -q, v, s)  # det = u*s - (-q)*v = 1
        A, B, C = form_apply(g, mat)
        if A % N:
            continue
        if (B - beta) % (2 * N) == 0:
            return _minimize_level_rep((A, B, C), N, beta)
    return None


def _minimize_level_rep(form: Form, N: int, beta: int) -> Form:
    """Smallest-A representative of the Gamma_0(N) orbit of a level-N form.

    A is minimized over the orbit (so Im tau is maximal and the q-series
    converges fastest); B mod 2N is a Gamma_0(N) invariant, so the beta
    congruence survives.  Finally B is translated into (-A, A].
    """
    A, B, C = form
    disc = discriminant_of(form)
    paired = (A // N, B, C * N)  # same discriminant
    _, mat = reduce_form_with_transform(paired)
    p, q, r, s = mat
    bestA, best_col = A, (1, 0)
    for alpha in range(-4, 5):
        for gamma in range(-4, 5):
            x = p * alpha + q * gamma
            y0 = r * alpha + s * gamma
            if math.gcd(x, N * y0) != 1:
                continue
            val = A * x * x + B * x * (N * y0) + C * (N * y0) ** 2
            if 0 < val < bestA:
                bestA, best_col = val, (x, N * y0)
    x, y = best_col
    gcd, ss, qq = _ext_gcd(x, y)
    A2, B2, C2 = form_apply((A, B, C), (x, -qq, y, ss))
    assert A2 == bestA and A2 % N == 0
    # translate B into (-A, A]; steps of 2A stay in the beta class since N | A
    k = 0
    while B2 + 2 * A2 * k > A2:
        k -= 1
    while B2 + 2 * A2 * k <= -A2:
        k += 1
    B3 = B2 + 2 * A2 * k
    C3 = (B3 * B3 - disc) // (4 * A2)
    assert (B3 - beta) % (2 * N) == 0
    return (A2, B3, C3)


def _coprime_lift(u: int, v: int, N: int) -> Tuple[int, int]:
    """Lift (u, v) mod N to coprime integers."""
    if u == 0 and v == 0:
        return (1, 0)
    if v == 0:
        return (1, 0) if u != 0 else (1, 0)
    if u == 0:
        return (0, 1)
    while math.gcd(u, v) != 1:
        u += N
    return (u, v)


def _ext_gcd(a: int, b: int):
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return (g, y, x - (a // b) * y)
