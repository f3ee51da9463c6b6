"""Synthetic global-duality models over Z/p^m: local symplectic slots with
kummer/transverse lines, a Lagrangian standing in for the global cohomology
image, Selmer modules cut out by per-place conditions, orthogonal-complement
duality, lozenge identities, and the stringent-condition invariant replay.

Everything is graded by the complex-conjugation sign; the two eigenspaces
never interact (the local pairing restricts to each), so every computation
runs per sign on a rank-2-per-place symplectic module.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .numeric import ValidationError
from .zpm import (
    ZpmRing,
    howell_form,
    invariant_exponents,
    left_kernel,
    mat_mul,
    member,
    span_size,
)

SIGNS = ("+", "-")

# place labels; stringent(k) is an index-p^k subline of kummer, extended(k)
# its orthogonal complement (the label set must be closed under duals)
LABELS = ("zero", "kummer", "transverse", "full", "stringent", "extended")


@dataclass(frozen=True)
class PlaceCondition:
    label: str
    k: int = 0  # exponent for stringent/extended

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValidationError(f"unknown label {self.label}")
        if self.label in ("stringent", "extended") and self.k < 0:
            raise ValidationError("stringent/extended exponent must be >= 0")

    def normalized(self, m: int) -> "PlaceCondition":
        if self.label == "stringent" and self.k == 0:
            return PlaceCondition("kummer")
        if self.label == "extended" and self.k == 0:
            return PlaceCondition("kummer")
        if self.label == "stringent" and self.k >= m:
            return PlaceCondition("zero")
        if self.label == "extended" and self.k >= m:
            return PlaceCondition("full")
        return self

    def __str__(self):
        if self.label in ("stringent", "extended"):
            return f"{self.label}({self.k})"
        return self.label


KUMMER = PlaceCondition("kummer")
TRANSVERSE = PlaceCondition("transverse")
FULL = PlaceCondition("full")
ZERO = PlaceCondition("zero")


def stringent(k: int) -> PlaceCondition:
    return PlaceCondition("stringent", k)


def extended(k: int) -> PlaceCondition:
    return PlaceCondition("extended", k)


@dataclass(frozen=True)
class SelmerStructureSpec:
    """One local condition per place (applied to both eigenspaces)."""

    places: Tuple[PlaceCondition, ...]

    @classmethod
    def uniform(cls, label: PlaceCondition, n_places: int) -> "SelmerStructureSpec":
        return cls(tuple(label for _ in range(n_places)))

    def replaced(self, idx: int, cond: PlaceCondition) -> "SelmerStructureSpec":
        lst = list(self.places)
        lst[idx] = cond
        return SelmerStructureSpec(tuple(lst))

    def __str__(self):
        return "[" + ", ".join(str(c) for c in self.places) + "]"


def condition_generators(cond: PlaceCondition, ring: ZpmRing) -> List[List[int]]:
    """Generators of the condition inside one rank-2 slot (u, t)."""
    cond = cond.normalized(ring.m)
    if cond.label == "zero":
        return []
    if cond.label == "kummer":
        return [[1, 0]]
    if cond.label == "transverse":
        return [[0, 1]]
    if cond.label == "full":
        return [[1, 0], [0, 1]]
    if cond.label == "stringent":
        return [[ring.p**cond.k % ring.q, 0]]
    if cond.label == "extended":
        return [[1, 0], [0, ring.p ** (ring.m - cond.k) % ring.q]]
    raise AssertionError(cond)


def condition_size_log(cond: PlaceCondition, m: int) -> int:
    """log_p of the condition subgroup order within one rank-2 slot."""
    cond = cond.normalized(m)
    return {
        "zero": 0,
        "kummer": m,
        "transverse": m,
        "full": 2 * m,
        "stringent": m - cond.k,
        "extended": m + cond.k,
    }[cond.label]


def dual_condition(cond: PlaceCondition, m: int) -> PlaceCondition:
    """Orthogonal complement under the slot pairing <u, t> = 1 (alternating)."""
    cond = cond.normalized(m)
    return {
        "zero": FULL,
        "full": ZERO,
        "kummer": KUMMER,
        "transverse": TRANSVERSE,
        "stringent": extended(cond.k),
        "extended": stringent(cond.k),
    }[cond.label]


def dual_structure(model: "SyntheticDualityModel", spec: SelmerStructureSpec) -> SelmerStructureSpec:
    """Place-wise orthogonal complement; label arithmetic verified against an
    explicit kernel computation by the test suite."""
    return SelmerStructureSpec(tuple(dual_condition(c, model.ring.m) for c in spec.places))


def modify_structure(
    spec: SelmerStructureSpec,
    a_places: Sequence[int] = (),
    b_places: Sequence[int] = (),
    c_places: Sequence[int] = (),
) -> SelmerStructureSpec:
    """F^a_b(c): full at a-places, zero at b-places, transverse at c-places."""
    sets = [set(a_places), set(b_places), set(c_places)]
    for i in range(3):
        for j in range(i + 1, 3):
            if sets[i] & sets[j]:
                raise ValidationError("a, b, c place sets must be pairwise disjoint")
    out = spec
    for v in a_places:
        out = out.replaced(v, FULL)
    for v in b_places:
        out = out.replaced(v, ZERO)
    for v in c_places:
        out = out.replaced(v, TRANSVERSE)
    return out


def structure_leq(F: SelmerStructureSpec, G: SelmerStructureSpec, m: int) -> bool:
    """F <= G place-wise (subgroup containment of the conditions)."""
    order = {
        # (label, k) pairs comparable through explicit containment
    }
    ring = ZpmRing(2, 1)  # placeholder; containment checked via generators below
    for cf, cg in zip(F.places, G.places):
        if not _condition_contained(cf, cg, m):
            return False
    return True


def _condition_contained(cf: PlaceCondition, cg: PlaceCondition, m: int) -> bool:
    # check span containment with a small concrete ring
    from .zpm import ZpmRing as _R

    ring = _ring_for_containment(m)
    gens_f = condition_generators(cf, ring)
    span_g = howell_form(ring, condition_generators(cg, ring), 2)
    return all(member(ring, span_g, g, 2) for g in gens_f)


_CONTAINMENT_RINGS: Dict[int, ZpmRing] = {}


def _ring_for_containment(m: int) -> ZpmRing:
    ring = _CONTAINMENT_RINGS.get(m)
    if ring is None:
        ring = ZpmRing(3, m)
        _CONTAINMENT_RINGS[m] = ring
    return ring


@dataclass
class SyntheticDualityModel:
    """Local slots (rank 2 per eigenspace per place, pairing <u,t> = 1) and a
    graded Lagrangian L = L+ (+) L- playing the global image."""

    ring: ZpmRing
    n_places: int
    lagrangian: Dict[str, List[List[int]]]  # sign -> Howell basis in R^(2n)

    def __post_init__(self):
        width = 2 * self.n_places
        for sign in SIGNS:
            L = self.lagrangian[sign]
            for x in L:
                for y in L:
                    if self.pair(x, y) != 0:
                        raise ValidationError("global image is not isotropic")
            size = span_size(self.ring, L, width)
            if size * size != self.ring.q**width:
                raise ValidationError(
                    f"global image is not maximal isotropic: size {size}"
                )

    @property
    def width(self) -> int:
        return 2 * self.n_places

    def pair(self, x: Sequence[int], y: Sequence[int]) -> int:
        """Sum of the slot pairings <(u,t),(u',t')> = u t' - t u'."""
        total = 0
        for v in range(self.n_places):
            total += x[2 * v] * y[2 * v + 1] - x[2 * v + 1] * y[2 * v]
        return total % self.ring.q

    def pair_at(self, x, y, v: int) -> int:
        return (x[2 * v] * y[2 * v + 1] - x[2 * v + 1] * y[2 * v]) % self.ring.q


@dataclass
class GradedSelmerModule:
    generators: Dict[str, List[List[int]]]  # sign -> rows in ambient coords
    invariants: Dict[str, Tuple[int, ...]]

    def size_log(self, sign: str) -> int:
        return sum(self.invariants[sign])


def selmer_module(model: SyntheticDualityModel, spec: SelmerStructureSpec) -> GradedSelmerModule:
    """H_F = {x in L : x_v in F_v for all v}, with invariants per eigenspace."""
    if len(spec.places) != model.n_places:
        raise ValidationError("structure and model disagree on the number of places")
    ring = model.ring
    gens_out, invs_out = {}, {}
    for sign in SIGNS:
        L = model.lagrangian[sign]
        if not L:
            gens_out[sign] = []
            invs_out[sign] = ()
            continue
        constraints: List[List[int]] = []  # one column per (place, dual gen)
        for v, cond in enumerate(spec.places):
            dual_gens = condition_generators(dual_condition(cond, ring.m), ring)
            for dg in dual_gens:
                w = [0] * model.width
                w[2 * v], w[2 * v + 1] = dg[0], dg[1]
                constraints.append([model.pair_at(row, w, v) for row in L])
        if constraints:
            # columns of C are the constraint values: build C with rows = L-gens
            C = [[col[i] for col in constraints] for i in range(len(L))]
            K = left_kernel(ring, C)
        else:
            K = [[1 if i == j else 0 for j in range(len(L))] for i in range(len(L))]
        H = mat_mul(ring, K, L) if K else []
        H = howell_form(ring, H, model.width)
        gens_out[sign] = H
        invs_out[sign] = invariant_exponents(ring, H)
    return GradedSelmerModule(gens_out, invs_out)


def _span_intersection(ring: ZpmRing, A, B, width: int):
    """Generators of span(A) intersect span(B)."""
    if not A or not B:
        return []
    stacked = [row + [0] * 0 for row in A] + [[-x % ring.q for x in row] for row in B]
    # kernel of (y, z) -> y A - z B, i.e. left kernel of the stacked matrix
    K = left_kernel(ring, stacked)
    out = []
    for row in K:
        y = row[: len(A)]
        vec = [0] * width
        for i, yi in enumerate(y):
            if yi:
                for j in range(width):
                    vec[j] = (vec[j] + yi * A[i][j]) % ring.q
        out.append(vec)
    return howell_form(ring, out, width)


def _quotient_invariants(ring: ZpmRing, big, small, width: int) -> Tuple[int, ...]:
    """Invariants of span(big)/span(small) (small must be contained in big)."""
    if not big:
        return ()
    small_h = howell_form(ring, small, width)
    for row in small_h:
        if not member(ring, howell_form(ring, big, width), row, width):
            raise ValidationError("quotient undefined: not a submodule")
    stacked = [list(row) for row in big] + [list(row) for row in small]
    K = left_kernel(ring, stacked)
    # K consists of (y, z) with y*big + z*small = 0; R^g / proj_y(K) = quotient
    g = len(big)
    rel = [row[:g] for row in K]
    # quotient of R^g by the relation module: invariants from SNF of relations
    from .zpm import _snf

    _, vals = _snf(ring, rel) if rel else (None, [])
    vals = list(vals) + [ring.m] * (g - len(vals))
    exps = tuple(sorted((v for v in vals if v > 0), reverse=True))
    return exps


@dataclass
class DualityRecord:
    sign: str
    image_size_log: int
    dual_image_size_log: int
    local_quotient_log: int
    orthogonal: bool

    @property
    def exact(self) -> bool:
        return (
            self.orthogonal
            and self.image_size_log + self.dual_image_size_log == self.local_quotient_log
        )


def check_global_duality(
    model: SyntheticDualityModel, F: SelmerStructureSpec, G: SelmerStructureSpec
) -> Dict[str, DualityRecord]:
    """The two localization images are exact orthogonal complements in
    (+)_v G_v/F_v, eigenspace by eigenspace.

    Sizes come from the kernel descriptions #im = #H_G / #H_F (and dually);
    orthogonality is checked on generators; exactness is the size identity.
    """
    ring = model.ring
    if not structure_leq(F, G, ring.m):
        raise ValidationError("need F <= G place-wise")
    Fd, Gd = dual_structure(model, F), dual_structure(model, G)
    H_F, H_G = selmer_module(model, F), selmer_module(model, G)
    H_Fd, H_Gd = selmer_module(model, Fd), selmer_module(model, Gd)
    support = [
        v
        for v in range(model.n_places)
        if condition_size_log(F.places[v], ring.m) != condition_size_log(G.places[v], ring.m)
    ]
    quotient_log = sum(
        condition_size_log(G.places[v], ring.m) - condition_size_log(F.places[v], ring.m)
        for v in support
    )
    out = {}
    for sign in SIGNS:
        ortho = True
        for x in H_G.generators[sign]:
            for y in H_Fd.generators[sign]:
                s = 0
                for v in support:
                    s += model.pair_at(x, y, v)
                if s % ring.q:
                    ortho = False
        rec = DualityRecord(
            sign,
            H_G.size_log(sign) - H_F.size_log(sign),
            H_Fd.size_log(sign) - H_Gd.size_log(sign),
            quotient_log,
            ortho,
        )
        out[sign] = rec
    return out


@dataclass
class LozengeReport:
    lengths: Dict[str, Dict[str, int]]  # sign -> {a, b, c, d, a*, b*, c*, d*}
    checks: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def lozenge(
    model: SyntheticDualityModel,
    F: SelmerStructureSpec,
    c_places: Sequence[int],
    ell_place: int,
) -> LozengeReport:
    """The four-structure inclusion diamond at c vs c*ell and its dual, with
    cyclic cokernel lengths and the identities (i)-(iv)."""
    ring = model.ring
    m = ring.m
    if ell_place in c_places:
        raise ValidationError("ell must not divide c")
    if F.places[ell_place].normalized(m) != KUMMER:
        raise ValidationError("the base structure must be kummer at the auxiliary place")
    Fc = modify_structure(F, c_places=list(c_places))
    Fcl = modify_structure(F, c_places=list(c_places) + [ell_place])
    F_up = modify_structure(Fc, a_places=[ell_place])  # full at ell
    F_dn = modify_structure(Fc, b_places=[ell_place])  # zero at ell

    structures = {"F(c)": Fc, "F(cl)": Fcl, "F^l(c)": F_up, "F_l(c)": F_dn}
    duals = {k: dual_structure(model, v) for k, v in structures.items()}
    mods = {k: selmer_module(model, v) for k, v in structures.items()}
    dual_mods = {k: selmer_module(model, v) for k, v in duals.items()}

    def coker_len(small: GradedSelmerModule, big: GradedSelmerModule, sign: str) -> int:
        inv = _quotient_invariants(
            ring, big.generators[sign], small.generators[sign], model.width
        )
        if len(inv) > 1:
            raise ValidationError(f"non-cyclic cokernel {inv}: model violates rank-one grading")
        return inv[0] if inv else 0

    lengths: Dict[str, Dict[str, int]] = {}
    checks: Dict[str, bool] = {}
    for sign in SIGNS:
        a = coker_len(mods["F(c)"], mods["F^l(c)"], sign)
        b = coker_len(mods["F(cl)"], mods["F^l(c)"], sign)
        c = coker_len(mods["F_l(c)"], mods["F(c)"], sign)
        d = coker_len(mods["F_l(c)"], mods["F(cl)"], sign)
        a_d = coker_len(dual_mods["F^l(c)"], dual_mods["F(c)"], sign)
        b_d = coker_len(dual_mods["F^l(c)"], dual_mods["F(cl)"], sign)
        c_d = coker_len(dual_mods["F(c)"], dual_mods["F_l(c)"], sign)
        d_d = coker_len(dual_mods["F(cl)"], dual_mods["F_l(c)"], sign)
        lengths[sign] = {
            "a": a, "b": b, "c": c, "d": d,
            "a*": a_d, "b*": b_d, "c*": c_d, "d*": d_d,
        }
        checks[f"(i) bounds {sign}"] = all(
            0 <= v <= m for v in lengths[sign].values()
        )
        checks[f"(ii) sums {sign}"] = (a + c == b + d) and (a_d + c_d == b_d + d_d)
        checks[f"(iii) dual pairs {sign}"] = (
            a + a_d == m and b + b_d == m and c + c_d == m and d + d_d == m
        )
        checks[f"(iv) inequalities {sign}"] = (
            a >= d and b >= c and c_d >= b_d and d_d >= a_d
        )
        inter = _span_intersection(
            ring, mods["F(c)"].generators[sign], mods["F(cl)"].generators[sign], model.width
        )
        dn = howell_form(ring, mods["F_l(c)"].generators[sign], model.width)
        checks[f"intersection {sign}"] = inter == dn
    return LozengeReport(lengths, checks)


# ---------------------------------------------------------------------------
# model builders


def _transvection(ring: ZpmRing, basis: List[List[int]], v: List[int], pair) -> List[List[int]]:
    """Apply x -> x + <x, v> v to every basis row (a symplectic transvection)."""
    out = []
    for x in basis:
        c = pair(x, v)
        out.append([(xi + c * vi) % ring.q for xi, vi in zip(x, v)])
    return out


def build_random_model(p: int, m: int, n_places: int, seed: int) -> SyntheticDualityModel:
    """Random graded Lagrangian: the standard kummer Lagrangian moved by a
    seeded sequence of symplectic transvections, independently per sign."""
    ring = ZpmRing(p, m)
    width = 2 * n_places
    rng = random.Random(seed)
    lag = {}

    def pair(x, y):
        total = 0
        for v in range(n_places):
            total += x[2 * v] * y[2 * v + 1] - x[2 * v + 1] * y[2 * v]
        return total % ring.q

    for sign in SIGNS:
        basis = [[0] * width for _ in range(n_places)]
        for i in range(n_places):
            basis[i][2 * i] = 1  # u-lines
        for _ in range(3 * n_places + 2):
            v = [rng.randrange(ring.q) for _ in range(width)]
            basis = _transvection(ring, basis, v, pair)
        lag[sign] = howell_form(ring, basis, width)
    return SyntheticDualityModel(ring, n_places, lag)


def build_core_vertex_model(
    p: int,
    m: int,
    m_prime: int,
    t: int,
    n_places: int = 2,
    seed: int = 0,
    eps: str = "+",
) -> SyntheticDualityModel:
    """Model with H_kummer^eps = (m), H_kummer^(-eps) = 0, and such that the
    stringent(t) shrink at place 0 leaves exactly Z/p^m_prime.

    Needs m - t <= m_prime <= m and 0 <= t < m; the generator is
    x = p^s u_0 + sum_j c_j u_j with s = t + m_prime - m and unit c_j.
    """
    if not (0 <= t < m):
        raise ValidationError("need 0 <= t < m")
    if not (m - t <= m_prime <= m):
        raise ValidationError("need m - t <= m_prime <= m")
    if n_places < 2:
        raise ValidationError("need at least 2 places")
    ring = ZpmRing(p, m)
    width = 2 * n_places
    rng = random.Random(seed)
    s = t + m_prime - m

    units = [1 + p * rng.randrange(ring.q // p) for _ in range(n_places)]
    x = [0] * width
    x[0] = (p**s * units[0]) % ring.q
    for j in range(1, n_places):
        x[2 * j] = units[j] % ring.q
    # isotropic complement inside the t-lines, orthogonal to x:
    # w = sum beta_j t_j with sum beta_j * x_u_j = 0
    eps_rows = [x]
    # basis of solutions beta: beta_0 free rows against unit coords
    # place n-1 coefficient is a unit: solve for beta_{n-1}
    inv_last = pow(units[n_places - 1], -1, ring.q)
    for j in range(n_places - 1):
        beta = [0] * n_places
        beta[j] = 1
        beta[n_places - 1] = (-x[2 * j] * inv_last) % ring.q
        w = [0] * width
        for jj in range(n_places):
            w[2 * jj + 1] = beta[jj]
        eps_rows.append(w)
    minus_rows = []
    for j in range(n_places):
        w = [0] * width
        w[2 * j + 1] = 1  # all-transverse Lagrangian
        minus_rows.append(w)
    lag = {
        eps: howell_form(ring, eps_rows, width),
        ("-" if eps == "+" else "+"): howell_form(ring, minus_rows, width),
    }
    return SyntheticDualityModel(ring, n_places, lag)


@dataclass
class ReplayReport:
    computed_dual_eps: Tuple[int, ...]
    computed_dual_other: Tuple[int, ...]
    expected_dual_eps: Tuple[int, ...]
    expected_dual_other: Tuple[int, ...]
    m_prime_observed: Tuple[int, ...]

    @property
    def ok(self) -> bool:
        return (
            self.computed_dual_eps == self.expected_dual_eps
            and self.computed_dual_other == self.expected_dual_other
        )


def replay_theorem_6_2(
    model: SyntheticDualityModel, m: int, m_prime: int, t: int, eps: str = "+"
) -> ReplayReport:
    """On a core-vertex model, shrink kummer to stringent(t) at place 0 and
    compare the dual-structure invariants against (m, t + m' - m) and (t)."""
    ring = model.ring
    if ring.m != m:
        raise ValidationError("model exponent disagrees with m")
    if not (0 <= t < m):
        raise ValidationError("need t < m")
    other = "-" if eps == "+" else "+"
    F = SelmerStructureSpec.uniform(KUMMER, model.n_places)
    base = selmer_module(model, F)
    if base.invariants[eps] != (m,) or base.invariants[other] != ():
        raise ValidationError(
            f"not a core-vertex model: kummer invariants {base.invariants}"
        )
    F0 = F.replaced(0, stringent(t))
    shrunk = selmer_module(model, F0)
    if shrunk.invariants[eps] != (m_prime,) and not (
        m_prime == 0 and shrunk.invariants[eps] == ()
    ):
        raise ValidationError(
            f"model does not realize m' = {m_prime}: got {shrunk.invariants[eps]}"
        )
    dual = selmer_module(model, dual_structure(model, F0))
    expected_eps = tuple(x for x in (m, t + m_prime - m) if x > 0)
    expected_other = tuple(x for x in (t,) if x > 0)
    return ReplayReport(
        dual.invariants[eps],
        dual.invariants[other],
        expected_eps,
        expected_other,
        shrunk.invariants[eps],
    )


def enumerate_lagrangians_fp(p: int, n_places: int) -> List[List[List[int]]]:
    """All maximal isotropic subspaces of the 2n-dim symplectic F_p space
    (m = 1).  Exhaustive; meant for p = 3, n_places = 2."""
    ring = ZpmRing(p, 1)
    width = 2 * n_places
    dim = n_places

    def pair(x, y):
        total = 0
        for v in range(n_places):
            total += x[2 * v] * y[2 * v + 1] - x[2 * v + 1] * y[2 * v]
        return total % p

    # enumerate all dim-dimensional subspaces via canonical echelon bases
    from itertools import combinations, product

    out = []
    seen = set()
    for pivots in combinations(range(width), dim):
        free_cols = [j for j in range(width) if j not in pivots]
        free_positions = []
        for i, pc in enumerate(pivots):
            for j in free_cols:
                if j > pc and all(j != p2 for p2 in pivots):
                    free_positions.append((i, j))
        for values in product(range(p), repeat=len(free_positions)):
            basis = [[0] * width for _ in range(dim)]
            for i, pc in enumerate(pivots):
                basis[i][pc] = 1
            ok_echelon = True
            for (i, j), val in zip(free_positions, values):
                basis[i][j] = val
            # canonical echelon: pivot columns of later rows must be zero above
            for i, pc in enumerate(pivots):
                for i2 in range(dim):
                    if i2 != i and basis[i2][pc] != 0:
                        ok_echelon = False
            if not ok_echelon:
                continue
            if any(pair(basis[i], basis[j]) for i in range(dim) for j in range(dim)):
                continue
            key = tuple(tuple(r) for r in howell_form(ring, basis, width))
            if key in seen:
                continue
            seen.add(key)
            out.append([list(r) for r in howell_form(ring, basis, width)])
    return out
