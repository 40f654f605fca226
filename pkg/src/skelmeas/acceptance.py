"""Ten numbered desk-scale experiments certifying the library end to end.

Each criterion is a function that raises AssertionError on the first
violated check and returns a short detail string otherwise.  The runner
times every criterion against its stated budget; going over budget fails
the criterion even when the mathematics passed.  Convergence statements
are certified by exact finite formulas and monotone distance decay, never
by floating point limits.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .basechange import (
    ExtensionParams,
    base_change_with_map,
    lattice_correspondence_check,
    shilov_boundary,
    transformed_multiplicity,
    volume_scaling_check,
)
from .convergence import (
    BoxPoly,
    WeightedSumSpec,
    lemma_sum_bruteforce,
    lemma_sum_closedform,
    simulate_measure,
    tau_integral,
)
from .exactcore import CountPoly, qexp_eval
from .langweil import VarietySpec, langweil_limit_check, langweil_sequence
from .measures import face_volume, lebesgue_measure
from .model import Component, SncModel, Stratum, builtin_model
from .skeleton import (
    arclength_from,
    edge_length,
    full_complex,
    is_tame,
    ks_skeleton,
    lattice_points,
    subface_indices,
    temperate_part,
    weight,
)

BUDGETS = {1: 1, 2: 5, 3: 60, 4: 30, 5: 10, 6: 5, 7: 1, 8: 5, 9: 60, 10: 1}

TITLES = {
    1: "edge lengths from multiplicities",
    2: "base change multiplicities, correspondence, weight scaling",
    3: "simplex volumes against brute lattice counts",
    4: "lattice sums: closed form, limit gap, empty-locus decay",
    5: "triangle fixture mass totals and per-edge convergence",
    6: "three-leg fixture Shilov sweep",
    7: "temperate parts: star legs kept, three-leg center dropped",
    8: "two-vertex masses against their limit pair",
    9: "circle counts and the component-count limit check",
    10: "stable density domination and pushforward scaling",
}


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    ok: bool
    elapsed: float
    budget: float
    detail: str


def _tate():
    return builtin_model("tate_triangle", p=2, q=2)


def _iv():
    return builtin_model("kodaira_IV", p=3, q=3)


def _two_vertex_model(p: int, q: int) -> SncModel:
    # one rational vertex at order 0, one at order 1; no edges
    return SncModel(
        name="two_points",
        dimension=1,
        p=p,
        q=q,
        m=1,
        log_smooth=False,
        components=(Component("y0", 1, 0), Component("y1", 1, 1)),
        strata=(
            Stratum(("y0",), CountPoly((1, 1))),
            Stratum(("y1",), CountPoly((0, 1))),
        ),
    )


def _fixtures():
    return [
        _tate(),
        builtin_model("kodaira_In", p=2, q=2, n=2),
        _iv(),
        builtin_model("kodaira_Istar", p=2, q=2, r=1),
        _two_vertex_model(2, 2),
    ]


def criterion_1() -> str:
    for a in range(1, 51):
        for b in range(1, 51):
            assert face_volume((a, b)) == Fraction(math.gcd(a, b), a * b), (a, b)
    iv = _iv()
    edges = [i for i, s in enumerate(iv.strata) if s.size == 2]
    assert len(edges) == 3, "expected 3 leg edges"
    for i in edges:
        assert edge_length(iv, i) == Fraction(1, 3), i
    return "2500 edge lengths exact; all 3 leg lengths equal 1/3"


def criterion_2() -> str:
    for n in range(1, 61):
        for e in range(1, 61):
            assert transformed_multiplicity(n, e) == n // math.gcd(e, n), (n, e)
    checked = 0
    for model in _fixtures():
        for e in range(1, 13):
            if not (is_tame(e, model.p) or model.log_smooth):
                continue  # wild ramification is rejected by construction
            assert lattice_correspondence_check(model, e), (model.name, e)
            target, bmap = base_change_with_map(model, ExtensionParams(e, 1))
            for pt in lattice_points(target, 1):
                src = bmap.transport_point(pt)
                assert weight(target, pt) == e * weight(model, src), (model.name, e)
            checked += 1
    return "3600 multiplicity pairs; %d tame correspondences with exact weight scaling" % checked


def _denumerant_count(N, e: int) -> int:
    dp = [1] + [0] * e
    for n in N:
        for i in range(n, e + 1):
            dp[i] += dp[i - n]
    return dp[e]


def criterion_3() -> str:
    rng = random.Random(2026)
    e = 720
    worst = Fraction(0)
    for _ in range(20):
        d = rng.randint(1, 3)
        # dilate counts differ from e^d * vol by a surface term of relative
        # size about d * sum(N) / (2e); cap multiplicities so 3% has margin
        cap = 2 if d == 3 else 3
        N = tuple(rng.randint(1, cap) for _ in range(d + 1))
        vol = face_volume(N)
        approx = Fraction(_denumerant_count(N, e), e**d)
        rel = abs(approx - vol) / vol
        worst = max(worst, rel)
        assert rel < Fraction(3, 100), (N, float(rel))
    return "20 random simplices at level %d, worst relative gap %.3f%%" % (
        e,
        float(worst) * 100,
    )


def criterion_4() -> str:
    base = WeightedSumSpec(
        box=((0, 3),), alpha=(1,), offsets=(0,), remove_tau_corner=True
    )
    for e, f in ((1, 1), (2, 3)):
        assert lemma_sum_closedform(base, e, f) == lemma_sum_bruteforce(base, e, f)
    rng = random.Random(17)
    for _ in range(20):
        n = rng.randint(1, 3)
        N = rng.choice((1, 2))
        alpha, offsets, box = [], [], []
        for _ in range(n):
            if rng.random() < 0.7:
                alpha.append(rng.choice((1, 2, Fraction(3, 2))))
                offsets.append(rng.choice((0, Fraction(1, 2), Fraction(1, 3))))
            else:
                alpha.append(0)
                offsets.append(0)
            box.append((offsets[-1], N))
        spec = WeightedSumSpec(
            box=tuple(box),
            alpha=tuple(alpha),
            offsets=tuple(offsets),
            remove_tau_corner=True,
        )
        e, f = rng.randint(1, 12), rng.randint(1, 12)
        assert lemma_sum_closedform(spec, e, f) == lemma_sum_bruteforce(spec, e, f)
    doc = WeightedSumSpec(
        box=((0, 1), (0, 1)),
        alpha=(0, 1),
        offsets=(0, 0),
        phi=BoxPoly.affine(1, (1, 0)),
    )
    assert tau_integral(doc) == Fraction(3, 2)
    gap = abs(lemma_sum_bruteforce(doc, 256, 12) - Fraction(3, 2))
    assert gap < Fraction(1, 100), float(gap)
    empty = WeightedSumSpec(
        box=((Fraction(1, 2), 1),), alpha=(1,), offsets=(Fraction(1, 2),)
    )
    prev = None
    for e in (1, 3, 9, 27):
        iv = qexp_eval(lemma_sum_bruteforce(empty, e, e), 2)
        if prev is not None:
            assert iv.hi < prev, e
        prev = iv.lo
    assert iv.hi < Fraction(1, 1000)
    return "20 random closed forms exact; documented gap %.4f; empty-locus sum under 1e-3" % float(gap)


def criterion_5() -> str:
    tate = _tate()
    edge_faces = {i for i, s in enumerate(tate.strata) if s.size == 2}
    for e in range(1, 21):
        for f in range(1, 21):
            nu = simulate_measure(tate, ExtensionParams(e, f), 2).normalized("ks")
            lo, hi = nu.totals()
            assert lo == hi
            want = 3 * (1 - Fraction(1, 2) ** f)
            assert qexp_eval(lo, 2) == want, (e, f)
            per_edge = {i: Fraction(0) for i in edge_faces}
            for a in nu.atoms:
                if a.point.face_index in edge_faces:
                    per_edge[a.point.face_index] += qexp_eval(a.lower, 2)
            bound = 3 * Fraction(1, 2) ** f + Fraction(2, e)
            for i, mass in per_edge.items():
                assert abs(1 - mass) <= bound, (e, f, i)
    raw_lo, _ = simulate_measure(tate, ExtensionParams(1, 1), 2).totals()
    assert qexp_eval(raw_lo, 2) == Fraction(3, 2)
    return "400 (e,f) cells: totals equal 3(1-2^-f); per-edge gaps within bound; level one total 3/2"


def criterion_6() -> str:
    iv = _iv()
    center = next(c.id for c in iv.components if c.multiplicity == 3)
    for e in range(1, 13):
        res = shilov_boundary(iv, e)
        want_dist = Fraction(1, 3) - Fraction(e // 3, e)
        assert res.ord_min_baseK == -Fraction(e // 3, e), e
        assert res.tame == (e % 3 != 0), e
        for pt in res.points:
            s = iv.strata[pt.face_index]
            if s.size == 1:
                dist = Fraction(0) if s.components == (center,) else Fraction(1, 3)
            else:
                slot = s.components.index(center)
                other = 1 - slot
                dist = arclength_from(iv, pt.face_index, pt.coords, other)
            assert dist == want_dist, (e, pt)
        if res.tame:
            assert len(res.points) == 3, e
            assert res.scaled_measure.total == 3, e
    return "12 levels: distances and minimal orders exact; tame scaled mass 3"


def criterion_7() -> str:
    for r in (0, 1, 2):
        star = builtin_model("kodaira_Istar", p=2, q=2, r=r)
        part = temperate_part(star, full_complex(star))
        leaf_edges = {
            i
            for i, s in enumerate(star.strata)
            if s.size == 2 and sorted(star.multiplicities(s)) == [1, 2]
        }
        assert len(leaf_edges) == 4, r
        expected = set(leaf_edges)
        for i in leaf_edges:
            expected.update(subface_indices(star, i))
        assert set(part.face_indices) == expected, r
        assert len(part) == (9 if r == 0 else 10), r
    iv = _iv()
    part = temperate_part(iv, ks_skeleton(iv))
    assert len(part) == 0 and part.dimension == -1
    return "star fixtures keep exactly the 4 closed leaf edges; three-leg tame part empty"


def criterion_8() -> str:
    for q in (2, 3, 5):
        model = _two_vertex_model(q, q)
        i0 = model.vertex_stratum_index("y0")
        tdeg = model.strata[i0].tdeg
        for f in range(1, 21):
            nu = simulate_measure(model, ExtensionParams(1, f), q).normalized("ks")
            bound = 2 * Fraction(1, q) ** f
            for a in nu.atoms:
                limit = tdeg if a.point.face_index == i0 else 0
                assert abs(qexp_eval(a.lower, q) - limit) <= bound, (q, f)
    return "60 rows per vertex: exact masses within 2 q^-f of the limit pair"


def criterion_9() -> str:
    circle = VarietySpec.from_text(("x", "y"), ("x^2+y^2-1",))
    seq = langweil_sequence(circle, 3, range(1, 7))
    for row in seq:
        sign = 1 if (row.field_size - 1) // 2 % 2 == 0 else -1
        assert row.count == row.field_size - sign, row
    assert langweil_limit_check(seq, 1, 2)
    assert not langweil_limit_check(seq, 2, 2)
    return "counts %s match the quadratic-character formula; limit check separates 1 from 2" % (
        [r.count for r in seq],
    )


def criterion_10() -> str:
    pairs = 0
    for model in _fixtures():
        for sub in (full_complex(model), ks_skeleton(model)):
            plain = lebesgue_measure(model, sub)
            stable = lebesgue_measure(model, sub, stable=True)
            assert len(plain.pieces) == len(stable.pieces)
            for (f1, d1), (f2, d2) in zip(plain.pieces, stable.pieces):
                assert f1.index == f2.index
                assert d2 >= d1, (model.name, f1.index)
                pairs += 1
    scaled = 0
    for model, e in (
        (_tate(), 2),
        (_tate(), 3),
        (_iv(), 2),
        (builtin_model("kodaira_Istar", p=2, q=2, r=1), 3),
        (_two_vertex_model(2, 2), 5),
    ):
        _, bmap = base_change_with_map(model, ExtensionParams(e, 1))
        assert volume_scaling_check(bmap), (model.name, e)
        scaled += 1
    return "%d density pairs dominated; %d pushforwards scale exactly" % (pairs, scaled)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_one(number: int) -> CriterionResult:
    fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        detail = fn()
        ok = True
    except AssertionError as ex:
        detail = "failed: %r" % ((ex.args[0] if ex.args else "assertion"),)
        ok = False
    except Exception as ex:
        detail = "error: %s: %s" % (type(ex).__name__, ex)
        ok = False
    elapsed = time.perf_counter() - t0
    budget = BUDGETS[number]
    if ok and elapsed > budget:
        ok = False
        detail += " (over budget: %.1fs > %ds)" % (elapsed, budget)
    return CriterionResult(number, TITLES[number], ok, elapsed, budget, detail)


def run_all(only=None):
    numbers = [only] if only else sorted(CRITERIA)
    return [run_one(n) for n in numbers]
