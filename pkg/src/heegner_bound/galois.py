"""One-sided surjectivity test for the mod-p Galois representation.

Sampled Frobenius data (a_l mod p, a_l^2 - 4l mod p) rules out each maximal
subgroup class of GL_2(F_p); once all are excluded the image is the full
group.  "inconclusive" is NOT a proof of non-surjectivity -- reports say so.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

from sympy import isprime, primerange

from .curves import EllipticCurveQ, trace_of_frobenius
from .numeric import ValidationError

WITNESS_KINDS = ("borel-or-split-cartan", "nonsplit-cartan-normalizer", "exceptional")

CAVEAT = (
    "one-sided test: 'inconclusive' is not a proof of non-surjectivity; "
    "absolute irreducibility alone would suffice for the descent machinery, "
    "but this check gates on full surjectivity"
)


@dataclass
class ImageVerdict:
    status: str  # "surjective" | "inconclusive"
    witnesses: Dict[str, int] = field(default_factory=dict)  # kind -> witness prime
    missing: List[str] = field(default_factory=list)
    sample_bound: int = 0
    caveat: str = CAVEAT


def _is_square_mod(a: int, p: int) -> bool:
    a %= p
    return a == 0 or pow(a, (p - 1) // 2, p) == 1


def _exceptional_excluded_set(p: int) -> set:
    """Values of tr^2/det mod p realized by elements of projective order <= 5.

    Projective images A4, S4, A5 consist of such elements: u = 0 (order 2),
    1 (order 3), 2 (order 4), 4 (order 1 or p), and the roots of
    z^2 - 3z + 1 (order 5).
    """
    excluded = {0, 1, 2, 4 % p}
    for z in range(p):
        if (z * z - 3 * z + 1) % p == 0:
            excluded.add(z)
    return excluded


def mod_p_image_surjective(
    curve: EllipticCurveQ, p: int, sample_bound: int = 10000
) -> ImageVerdict:
    """Certify that the mod-p representation is surjective, or report which
    conjugacy-class witnesses are missing.

    Witnesses collected from good l <= sample_bound, l != p, with
    u = a_l^2 - 4l mod p:
      - u a nonsquare, a_l != 0: rules out Borel and split Cartan normalizer;
      - u a nonzero square, a_l != 0: rules out the nonsplit Cartan normalizer;
      - a_l^2/l mod p outside {0,1,2,4} u roots(z^2-3z+1): rules out the
        exceptional projective images A4, S4, A5.
    """
    if p == 2 or not isprime(p):
        raise ValidationError("p must be an odd prime")
    if curve.conductor % p == 0:
        raise ValidationError(f"p = {p} divides the conductor ({curve.conductor})")
    excluded = _exceptional_excluded_set(p)
    witnesses: Dict[str, int] = {}
    for ell in primerange(2, sample_bound + 1):
        if ell == p or curve.discriminant % ell == 0:
            continue
        a = trace_of_frobenius(curve, ell) % p
        u = (a * a - 4 * ell) % p
        if "borel-or-split-cartan" not in witnesses and a != 0 and not _is_square_mod(u, p):
            witnesses["borel-or-split-cartan"] = ell
        if (
            "nonsplit-cartan-normalizer" not in witnesses
            and a != 0
            and u != 0
            and _is_square_mod(u, p)
        ):
            witnesses["nonsplit-cartan-normalizer"] = ell
        if "exceptional" not in witnesses and a != 0:
            t = (a * a * pow(ell, -1, p)) % p
            if t not in excluded:
                witnesses["exceptional"] = ell
        if len(witnesses) == len(WITNESS_KINDS):
            return ImageVerdict("surjective", witnesses, [], sample_bound)
    missing = [k for k in WITNESS_KINDS if k not in witnesses]
    return ImageVerdict("inconclusive", witnesses, missing, sample_bound)
