"""Lattice sums, the closed product formula, simulator masses, reports."""
import pathlib
import random
from dataclasses import replace
from fractions import Fraction

import pytest

from oracles import brute_weighted_sum
from skelmeas.basechange import ExtensionParams
from skelmeas.convergence import (
    BoxPoly,
    WeightedSumSpec,
    convergence_report,
    lemma_sum_bruteforce,
    lemma_sum_closedform,
    simulate_measure,
    tau_integral,
)
from skelmeas.exactcore import CountPoly, Interval, QExpSum, qexp_eval
from skelmeas.measures import hat_function
from skelmeas.model import Component, SncModel, Stratum, builtin_model, parse_model

TATE = builtin_model("tate_triangle", p=2, q=2)
IV = builtin_model("kodaira_IV", p=3, q=3)
ISTAR1 = builtin_model("kodaira_Istar", p=2, q=2, r=1)
TWO = parse_model(
    (pathlib.Path(__file__).parent.parent / "models" / "two_points.toml").read_text()
)


def unit_spec(**kw):
    # [0,1] with alpha = x, the smallest nontrivial decay direction
    return WeightedSumSpec(box=((0, 1),), alpha=(1,), offsets=(0,), **kw)


class TestBoxPoly:
    def test_merge_and_prune(self):
        p = BoxPoly(((1, (1, 0)), (1, (1, 0)), (3, (0, 0)), (0, (0, 1))))
        assert p.monomials == ((Fraction(3), (0, 0)), (Fraction(2), (1, 0)))

    def test_constructors_and_eval(self):
        c = BoxPoly.constant(Fraction(5, 2), 3)
        assert c((9, 9, 9)) == Fraction(5, 2)
        assert c.degree == 0
        a = BoxPoly.affine(1, (1, 0))
        assert a((Fraction(1, 4), 7)) == Fraction(5, 4)
        assert a.degree == 1


class TestSpecValidation:
    def test_r_must_exceed_one(self):
        with pytest.raises(ValueError):
            unit_spec(r=1)

    def test_exactly_one_region(self):
        with pytest.raises(ValueError):
            WeightedSumSpec(box=None, alpha=(1,), offsets=(0,))
        with pytest.raises(ValueError):
            WeightedSumSpec(
                box=((0, 1),), alpha=(1,), offsets=(0,), model=TATE, face_index=0
            )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            WeightedSumSpec(box=((0, 1),), alpha=(1, 2), offsets=(0,))

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            WeightedSumSpec(box=((1, 0),), alpha=(1,), offsets=(0,))

    def test_alpha_sign(self):
        with pytest.raises(ValueError):
            WeightedSumSpec(box=((0, 1),), alpha=(-1,), offsets=(0,))
        # pin above the lower endpoint makes alpha negative near lo
        with pytest.raises(ValueError):
            WeightedSumSpec(box=((0, 1),), alpha=(1,), offsets=(Fraction(1, 2),))

    def test_face_mode_sign(self):
        i = next(
            i for i, s in enumerate(IV.strata) if len(s.components) == 2
        )
        with pytest.raises(ValueError):
            WeightedSumSpec(
                box=None,
                alpha=(1, 0),
                offsets=(Fraction(1, 2), 0),
                model=IV,
                face_index=i,
            )

    def test_tau_dim(self):
        assert unit_spec().tau_dim == 0
        # pinned at 0 but the box starts at 1/2: the locus misses the region
        off = WeightedSumSpec(box=((Fraction(1, 2), 1),), alpha=(1,), offsets=(0,))
        assert off.tau_dim == -1
        flat = WeightedSumSpec(box=((0, 1), (0, 1)), alpha=(0, 1), offsets=(0, 0))
        assert flat.tau_dim == 1
        assert flat.norm_dim == 1


class TestBruteForce:
    def test_unit_interval_corner_kept(self):
        assert lemma_sum_bruteforce(unit_spec(), 2, 2) == Fraction(21, 16)

    def test_zero_alpha_counts_points(self):
        s = WeightedSumSpec(box=((0, 1),), alpha=(0,), offsets=(0,))
        for e in (1, 2, 3, 7):
            assert lemma_sum_bruteforce(s, e, 1) == Fraction(e + 1, e)

    def test_against_oracle(self):
        s = WeightedSumSpec(
            box=((0, 1), (0, 2)),
            alpha=(1, 2),
            offsets=(0, 0),
            phi=BoxPoly.affine(1, (0, 1)),
        )
        for e, f in ((1, 1), (2, 1), (3, 2)):
            want = brute_weighted_sum(
                (0, 0), (1, 2), s.alpha_at, lambda x: s.phi(x), 2, e, f
            )
            assert lemma_sum_bruteforce(s, e, f) == want

    def test_corner_removal(self):
        s = unit_spec(remove_tau_corner=True)
        want = brute_weighted_sum(
            (0,), (1,), s.alpha_at, lambda x: 1, 2, 3, 1, skip=lambda x: x[0] == 0
        )
        assert lemma_sum_bruteforce(s, 3, 1) == want

    def test_half_integral_exponents_stay_symbolic(self):
        s = WeightedSumSpec(
            box=((Fraction(1, 2), 1),), alpha=(1,), offsets=(Fraction(1, 2),)
        )
        v = lemma_sum_bruteforce(s, 1, 1)
        assert isinstance(v, QExpSum) and not v.is_integral()

    def test_face_mode_hat(self):
        i = next(i for i, s in enumerate(TATE.strata) if len(s.components) == 2)
        h = hat_function(TATE, TATE.strata[i].components[0])
        s = WeightedSumSpec(
            box=None, alpha=(0, 0), offsets=(0, 0), phi=h, model=TATE, face_index=i
        )
        # alpha vanishes on the whole edge, so this is just a Riemann sum of
        # the hat over the e+1 closed-face lattice points
        assert lemma_sum_bruteforce(s, 2, 1) == Fraction(3, 4)
        assert lemma_sum_bruteforce(s, 4, 1) == Fraction(5, 8)
        empty = replace(s, remove_tau_corner=True)
        assert lemma_sum_bruteforce(empty, 2, 1) == 0

    def test_face_mode_decay(self):
        i = next(i for i, s in enumerate(TATE.strata) if len(s.components) == 2)
        s = WeightedSumSpec(
            box=None, alpha=(1, 0), offsets=(0, 0), model=TATE, face_index=i
        )
        # one free coordinate along the edge: geometric sum in the other
        for e, f in ((2, 1), (3, 2)):
            want = sum(Fraction(1, 2) ** (f * k) for k in range(e + 1))
            assert lemma_sum_bruteforce(s, e, f) == want

    def test_bad_levels(self):
        with pytest.raises(ValueError):
            lemma_sum_bruteforce(unit_spec(), 0, 1)
        with pytest.raises(ValueError):
            lemma_sum_bruteforce(unit_spec(), 1, 0)


class TestClosedForm:
    def test_unit_example(self):
        s = WeightedSumSpec(
            box=((0, 3),), alpha=(1,), offsets=(0,), remove_tau_corner=True
        )
        assert lemma_sum_closedform(s, 1, 1) == Fraction(7, 8)
        assert lemma_sum_bruteforce(s, 1, 1) == Fraction(7, 8)

    def test_requires_box_shape(self):
        with pytest.raises(ValueError):
            lemma_sum_closedform(unit_spec(), 1, 1)  # corner kept
        i = next(i for i, s in enumerate(TATE.strata) if len(s.components) == 2)
        face_spec = WeightedSumSpec(
            box=None,
            alpha=(1, 0),
            offsets=(0, 0),
            model=TATE,
            face_index=i,
            remove_tau_corner=True,
        )
        with pytest.raises(ValueError):
            lemma_sum_closedform(face_spec, 1, 1)
        mixed = WeightedSumSpec(
            box=((0, 1), (0, 2)),
            alpha=(1, 0),
            offsets=(0, 0),
            remove_tau_corner=True,
        )
        with pytest.raises(ValueError):
            lemma_sum_closedform(mixed, 1, 1)
        nonconst = unit_spec(
            remove_tau_corner=True, phi=BoxPoly.affine(0, (1,))
        )
        with pytest.raises(ValueError):
            lemma_sum_closedform(nonconst, 1, 1)

    def test_matches_bruteforce_random_grid(self):
        rng = random.Random(41)
        for _ in range(30):
            n = rng.randint(1, 3)
            N = rng.choice((1, 2))
            alpha, offsets, box = [], [], []
            for _ in range(n):
                if rng.random() < 0.7:
                    a = rng.choice((1, 2, Fraction(3, 2)))
                    q = rng.choice((0, Fraction(1, 2), Fraction(1, 3)))
                else:
                    a, q = 0, 0
                alpha.append(a)
                offsets.append(q)
                box.append((q, N))
            s = WeightedSumSpec(
                box=tuple(box),
                alpha=tuple(alpha),
                offsets=tuple(offsets),
                remove_tau_corner=True,
                phi=BoxPoly.constant(rng.choice((1, Fraction(2, 3))), n),
            )
            e = rng.randint(1, 8)
            f = rng.randint(1, 12)
            assert lemma_sum_closedform(s, e, f) == lemma_sum_bruteforce(s, e, f), (
                s,
                e,
                f,
            )

    def test_fractional_pin_delta_branch(self):
        # e*q integral only when 2 | e; both branches must match brute force
        s = WeightedSumSpec(
            box=((Fraction(1, 2), 2), (0, 2)),
            alpha=(1, 0),
            offsets=(Fraction(1, 2), 0),
            remove_tau_corner=True,
        )
        for e in (1, 2, 3, 4):
            assert lemma_sum_closedform(s, e, 2) == lemma_sum_bruteforce(s, e, 2)

    def test_all_free_is_empty_after_removal(self):
        s = WeightedSumSpec(
            box=((0, 1), (0, 1)),
            alpha=(0, 0),
            offsets=(0, 0),
            remove_tau_corner=True,
        )
        assert lemma_sum_closedform(s, 3, 1) == 0
        assert lemma_sum_bruteforce(s, 3, 1) == 0

    def test_tail_bound(self):
        # once e*f*min(a)*gap >= 30 with r=2 the whole off-locus sum is tiny
        for e, f, a in ((1, 30, 1), (5, 30, 1), (2, 15, 2)):
            s = WeightedSumSpec(
                box=((0, 1),), alpha=(a,), offsets=(0,), remove_tau_corner=True
            )
            assert lemma_sum_closedform(s, e, f) < Fraction(1, 10**6)


class TestDocumentedBox:
    # the two dimensional fixture: [0,1]^2, alpha = x2, phi = 1 + x1, r = 2
    SPEC = WeightedSumSpec(
        box=((0, 1), (0, 1)),
        alpha=(0, 1),
        offsets=(0, 0),
        phi=BoxPoly.affine(1, (1, 0)),
    )

    @staticmethod
    def formula(e, f):
        half = Fraction(1, 2)
        return (
            Fraction(3 * (e + 1), 2 * e)
            * (1 - half ** (f * (e + 1)))
            / (1 - half**f)
        )

    def test_small_grid_matches_formula(self):
        for e in (1, 2, 3, 4):
            for f in (1, 2, 3):
                assert lemma_sum_bruteforce(self.SPEC, e, f) == self.formula(e, f)

    def test_limit_value(self):
        assert tau_integral(self.SPEC) == Fraction(3, 2)
        gap = abs(lemma_sum_bruteforce(self.SPEC, 256, 12) - Fraction(3, 2))
        assert gap < Fraction(1, 100)

    def test_divisibility_chains(self):
        # the distance to the limit only shrinks along e | e'
        def dist(e):
            return lemma_sum_bruteforce(self.SPEC, e, 12) - Fraction(3, 2)

        for chain in ((1, 2, 4, 8), (1, 3, 9), (2, 6, 12)):
            vals = [dist(e) for e in chain]
            assert all(v > 0 for v in vals)
            assert all(b <= a for a, b in zip(vals, vals[1:])), chain

    def test_no_integral_point_family(self):
        # [1/2,1] with alpha = x - 1/2 has no lattice point of its vanishing
        # locus at any level prime to 2, so the sums drop to zero
        s = WeightedSumSpec(
            box=((Fraction(1, 2), 1),), alpha=(1,), offsets=(Fraction(1, 2),)
        )
        prev = None
        for e in (1, 3, 9, 27):
            v = lemma_sum_bruteforce(s, e, e)
            assert isinstance(v, QExpSum) and not v.is_integral()
            iv = qexp_eval(v, 2)
            assert isinstance(iv, Interval)
            if prev is not None:
                assert iv.hi < prev
            prev = iv.lo
        assert iv.hi < Fraction(1, 1000)


class TestTauIntegral:
    def test_box_first_moment(self):
        s = WeightedSumSpec(
            box=((0, 1), (0, 1)),
            alpha=(0, 1),
            offsets=(0, 0),
            phi=BoxPoly.affine(0, (1, 0)),
        )
        assert tau_integral(s) == Fraction(1, 2)

    def test_empty_locus(self):
        s = WeightedSumSpec(box=((Fraction(1, 2), 1),), alpha=(1,), offsets=(0,))
        assert tau_integral(s) == 0

    def test_quadratic(self):
        s = WeightedSumSpec(
            box=((0, 1),), alpha=(0,), offsets=(0,), phi=BoxPoly(((1, (2,)),))
        )
        assert tau_integral(s) == Fraction(1, 3)

    def test_degree_cap(self):
        s = WeightedSumSpec(
            box=((0, 1),), alpha=(0,), offsets=(0,), phi=BoxPoly(((1, (3,)),))
        )
        with pytest.raises(ValueError):
            tau_integral(s)

    def test_face_mode_subface(self):
        # on a type IV leg the locus degenerates to the high multiplicity
        # vertex; the integral is its point mass
        i = next(i for i, s in enumerate(IV.strata) if len(s.components) == 2)
        N = tuple(IV.component(c).multiplicity for c in IV.strata[i].components)
        slot = N.index(1)
        alpha = [0, 0]
        alpha[slot] = 1
        s = WeightedSumSpec(
            box=None, alpha=tuple(alpha), offsets=(0, 0), model=IV, face_index=i
        )
        assert s.tau_dim == 0
        assert tau_integral(s) == 1

    def test_face_mode_full_face(self):
        i = next(i for i, s in enumerate(TATE.strata) if len(s.components) == 2)
        s = WeightedSumSpec(
            box=None, alpha=(0, 0), offsets=(0, 0), model=TATE, face_index=i
        )
        assert tau_integral(s) == 1  # edge length of a multiplicity one edge
        h = hat_function(TATE, TATE.strata[i].components[0])
        assert tau_integral(replace(s, phi=h)) == Fraction(1, 2)


class TestSimulator:
    def test_tate_level_one(self):
        sim = simulate_measure(TATE, ExtensionParams(1, 1), 2)
        assert len(sim.atoms) == 3
        assert all(a.exact for a in sim.atoms)
        lo, hi = sim.totals()
        assert lo == hi
        assert qexp_eval(lo, 2) == Fraction(3, 2)

    def test_tate_level_two(self):
        sim = simulate_measure(TATE, ExtensionParams(2, 3), 2)
        assert len(sim.atoms) == 6
        for a in sim.atoms:
            assert qexp_eval(a.lower, 2) == Fraction(7, 8)
        nu = sim.normalized("ks")
        assert nu.normalized_by == 1
        nlo, _ = nu.totals()
        assert qexp_eval(nlo, 2) == Fraction(21, 8)

    def test_tate_total_formula(self):
        for e in range(1, 7):
            for f in range(1, 7):
                nu = simulate_measure(TATE, ExtensionParams(e, f), 2).normalized("ks")
                nlo, nhi = nu.totals()
                assert nlo == nhi
                assert qexp_eval(nlo, 2) == 3 * (1 - Fraction(1, 2) ** f)

    def test_two_vertex_masses(self):
        two5 = replace(TWO, p=5, q=5)
        nu = simulate_measure(two5, ExtensionParams(1, 1), 5).normalized("ks")
        by_face = {a.point.face_index: qexp_eval(a.lower, 5) for a in nu.atoms}
        i0 = two5.vertex_stratum_index("y0")
        i1 = two5.vertex_stratum_index("y1")
        assert by_face == {i0: Fraction(6, 5), i1: Fraction(1, 5)}

    def test_two_vertex_limit_rate(self):
        # masses head to (tdeg, 0) at speed q^{-f}
        for q in (2, 3, 5):
            model = replace(TWO, p=q, q=q)
            i0 = model.vertex_stratum_index("y0")
            for f in range(1, 21):
                nu = simulate_measure(model, ExtensionParams(1, f), q).normalized("ks")
                bound = 2 * Fraction(1, q) ** f
                for a in nu.atoms:
                    limit = 1 if a.point.face_index == i0 else 0
                    assert abs(qexp_eval(a.lower, q) - limit) <= bound

    def test_wild_rejected(self):
        with pytest.raises(ValueError, match="wild"):
            simulate_measure(ISTAR1, ExtensionParams(2, 1), 2)

    def test_bad_residue_size(self):
        with pytest.raises(ValueError, match="power"):
            simulate_measure(TATE, ExtensionParams(1, 1), 6)
        with pytest.raises(ValueError, match="power"):
            simulate_measure(TATE, ExtensionParams(1, 1), 3)

    def test_horizontal_masses_are_bounds(self):
        strata = tuple(
            replace(s, horizontal=True) if s.components == ("y1",) else s
            for s in TWO.strata
        )
        model = replace(TWO, strata=strata)
        sim = simulate_measure(model, ExtensionParams(1, 2), 2)
        flagged = [a for a in sim.atoms if not a.exact]
        assert len(flagged) == 1
        a = flagged[0]
        assert a.lower.is_zero()
        assert qexp_eval(a.upper, 2) == Fraction(1, 4)
        v = sim.integrate_value(lambda pt: 1)
        assert isinstance(v, Interval)
        assert v.lo == Fraction(5, 4) and v.hi == Fraction(3, 2)

    def test_integrate_negative_values(self):
        sim = simulate_measure(TATE, ExtensionParams(1, 1), 2)
        assert sim.integrate_value(lambda pt: -1) == Fraction(-3, 2)

    def test_fractional_weight_stays_symbolic(self):
        model = SncModel(
            name="halfwt",
            dimension=1,
            p=2,
            q=2,
            m=2,
            log_smooth=False,
            components=(Component("y", 1, 1),),
            strata=(Stratum(("y",), CountPoly((1, 1))),),
        )
        sim = simulate_measure(model, ExtensionParams(1, 1), 2)
        (a,) = sim.atoms
        assert not a.lower.is_integral()
        assert isinstance(qexp_eval(a.lower, 2), Interval)

    def test_unknown_variant(self):
        sim = simulate_measure(TATE, ExtensionParams(1, 1), 2)
        with pytest.raises(ValueError):
            sim.normalized("plain")


class TestConvergenceReport:
    def test_shilov_sweep_two_vertices(self):
        two5 = replace(TWO, p=5, q=5)
        rep = convergence_report(two5, [1], [1, 2, 3, 4], 5)
        assert rep.target_kind == "shilov"
        assert rep.variant == "ks"
        assert not rep.temperate_empty
        assert rep.monotone_in_f
        for c in rep.cells:
            assert c.distance == 2 * Fraction(1, 5) ** c.f

    def test_tate_stable_sweep(self):
        rep = convergence_report(TATE, [1, 2, 3], [1, 2, 3, 4], 2)
        assert rep.target_kind == "stable-ks"
        assert rep.monotone_in_f and rep.monotone_in_e
        for c in rep.cells:
            assert c.distance == 3 * Fraction(1, 2) ** c.f
            assert c.raw_total == 3 * c.e * (1 - Fraction(1, 2) ** c.f)

    def test_iv_zero_target(self):
        rep = convergence_report(IV, [1, 2, 4], [1, 2, 3], 3)
        assert rep.target_kind == "zero"
        assert rep.temperate_empty
        assert rep.variant == "temperate"
        assert rep.monotone_in_f
        assert not rep.monotone_in_e
        grid = rep.distance_grid()
        assert all(d > 0 for d in grid.values())
        # e=1,f=1 normalized total is 3 * 3^{-1/3}; cube the interval ends
        c = next(c for c in rep.cells if (c.e, c.f) == (1, 1))
        assert isinstance(c.normalized_total, Interval)
        assert c.normalized_total.lo ** 3 <= 9 <= c.normalized_total.hi ** 3
        assert c.normalized_total.width < Fraction(1, 10**9)

    def test_cells_are_ordered(self):
        rep = convergence_report(TATE, [2, 1], [3, 1], 2)
        assert [(c.e, c.f) for c in rep.cells] == [(2, 3), (2, 1), (1, 3), (1, 1)]

    def test_per_phi_entries(self):
        rep = convergence_report(TATE, [1], [2], 2)
        (cell,) = rep.cells
        names = [name for name, _, _ in cell.per_phi]
        assert any("const" in n for n in names)
        for _, val, tgt in cell.per_phi:
            assert abs(val - tgt) <= cell.distance
