"""Weighted lattice sums, their closed forms and limits, and the exact
reduction-mass simulator with its convergence reports.

The lattice sums S(e,f) = e^{-d} sum over P cap (1/e)Z^n of phi(x) r^{-ef a(x)}
are evaluated exactly: as rationals when every exponent is an integer, and as
symbolic power sums otherwise.  The closed form reproduces the product formula
for boxes with a removed minimal corner and must agree with brute force
coefficient by coefficient.

The simulator assigns to every level-e skeleton lattice point the mass

    t^{-e wt(x) - n} (t-1)^{n - dim E_x} |E_x^o|(t)   at t = q^f

kept symbolic in q, so normalizations and totals stay exact at every finite
(e, f).  Horizontal strata only admit mass bounds, carried as lower/upper
pairs.  Convergence against a target measure is certified by explicit distance
numbers, never by floating point limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from ._util import pmap
from .basechange import ExtensionParams, shilov_boundary
from .exactcore import Interval, QExpSum, as_rat, qexp_eval, t_minus_one_pow
from .measures import DiscreteMeasure, lebesgue_measure, phi_family
from .model import SncModel
from .skeleton import (
    face,
    is_tame,
    ks_skeleton,
    lattice_points,
    min_weight,
    temperate_part,
    weight,
)


# ---------------------------------------------------------------------------
# polynomials on boxes


@dataclass(frozen=True)
class BoxPoly:
    """Polynomial in box coordinates, stored as (coeff, exponent-tuple) terms."""

    monomials: tuple

    def __post_init__(self):
        merged = {}
        for c, ks in self.monomials:
            ks = tuple(int(k) for k in ks)
            merged[ks] = merged.get(ks, Fraction(0)) + as_rat(c)
        canon = tuple(sorted((ks, c) for ks, c in merged.items() if c != 0))
        object.__setattr__(self, "monomials", tuple((c, ks) for ks, c in canon))

    @classmethod
    def constant(cls, value, n: int) -> "BoxPoly":
        return cls(((as_rat(value), (0,) * n),))

    @classmethod
    def affine(cls, c0, coeffs) -> "BoxPoly":
        n = len(coeffs)
        terms = [(as_rat(c0), (0,) * n)]
        for j, c in enumerate(coeffs):
            ks = [0] * n
            ks[j] = 1
            terms.append((as_rat(c), tuple(ks)))
        return cls(tuple(terms))

    @property
    def degree(self) -> int:
        return max((sum(ks) for _, ks in self.monomials), default=0)

    def __call__(self, xs):
        total = Fraction(0)
        for c, ks in self.monomials:
            term = c
            for x, k in zip(xs, ks):
                term *= Fraction(x) ** k
            total += term
        return total


# ---------------------------------------------------------------------------
# weighted sum specifications


@dataclass(frozen=True)
class WeightedSumSpec:
    """Region, decay direction and test function for a lattice sum.

    Box mode: `box` lists closed rational intervals; alpha(x) is the
    nonnegative affine map sum a_j (x_j - q_j), vanishing exactly on the
    sub-box where every coordinate with a_j > 0 is pinned at q_j.  Face
    mode instead points at a model face and uses the same affine shape in
    face coordinates.  With remove_tau_corner the vanishing locus is
    excluded from the sums.
    """

    box: tuple | None
    alpha: tuple
    offsets: tuple
    phi: object = None  # BoxPoly in box mode, TestFunction in face mode, None = 1
    r: Fraction = Fraction(2)
    remove_tau_corner: bool = False
    model: SncModel | None = None
    face_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(as_rat(a) for a in self.alpha))
        object.__setattr__(self, "offsets", tuple(as_rat(v) for v in self.offsets))
        object.__setattr__(self, "r", as_rat(self.r))
        if self.r <= 1:
            raise ValueError("r must exceed 1")
        if (self.box is None) == (self.model is None):
            raise ValueError("exactly one of box and model face must be given")
        if self.box is not None:
            box = tuple((as_rat(lo), as_rat(hi)) for lo, hi in self.box)
            object.__setattr__(self, "box", box)
            if not (len(box) == len(self.alpha) == len(self.offsets)):
                raise ValueError("box, alpha and offsets must have matching length")
            for (lo, hi), a, q in zip(box, self.alpha, self.offsets):
                if lo > hi:
                    raise ValueError("empty interval in box")
                if a < 0 or (a > 0 and q > lo):
                    raise ValueError("alpha must be nonnegative on the box")
        else:
            N = self._face().multiplicities
            if not (len(N) == len(self.alpha) == len(self.offsets)):
                raise ValueError("alpha and offsets must match the face arity")
            off = sum(a * q for a, q in zip(self.alpha, self.offsets))
            for j, n in enumerate(N):
                if Fraction(self.alpha[j], n) - off < 0:
                    raise ValueError("alpha must be nonnegative on the face")

    def _face(self):
        return face(self.model, self.face_index)

    def alpha_at(self, xs) -> Fraction:
        return sum(
            (a * (Fraction(x) - q) for a, x, q in zip(self.alpha, xs, self.offsets)),
            Fraction(0),
        )

    @property
    def support(self) -> tuple:
        return tuple(j for j, a in enumerate(self.alpha) if a != 0)

    @property
    def tau_dim(self) -> int:
        """Dimension of the vanishing locus; -1 when it misses the region."""
        if self.box is not None:
            for j in self.support:
                if self.offsets[j] != self.box[j][0]:
                    return -1
            return len(self.box) - len(self.support)
        N = self._face().multiplicities
        off = sum(a * q for a, q in zip(self.alpha, self.offsets))
        zero = [j for j, n in enumerate(N) if Fraction(self.alpha[j], n) - off == 0]
        return len(zero) - 1

    @property
    def norm_dim(self) -> int:
        """The d in the e^{-d} prefactor."""
        if self.box is not None:
            return len(self.box) - len(self.support)
        return max(self.tau_dim, 0)

    def phi_value(self, xs) -> Fraction:
        if self.phi is None:
            return Fraction(1)
        return as_rat(self.phi(xs))


def _finish(total: QExpSum, r: Fraction):
    if total.is_integral():
        return total.eval_exact(r)
    return total


def lemma_sum_bruteforce(spec: WeightedSumSpec, e: int, f: int):
    """Exact S(e,f) by enumerating the level-e lattice of the region.

    Returns a rational when every exponent of r is integral, otherwise the
    symbolic power sum.
    """
    if e < 1 or f < 1:
        raise ValueError("e and f must be positive")
    terms = []
    if spec.box is not None:
        ranges = [
            range(math.ceil(lo * e), math.floor(hi * e) + 1) for lo, hi in spec.box
        ]
        support = spec.support
        for ks in _product(ranges):
            xs = tuple(Fraction(k, e) for k in ks)
            if spec.remove_tau_corner and all(
                xs[j] == spec.offsets[j] for j in support
            ):
                continue
            terms.append((spec.phi_value(xs), -e * f * spec.alpha_at(xs)))
    else:
        N = spec._face().multiplicities
        for a in _simplex_points(N, e):
            xs = tuple(Fraction(k, e) for k in a)
            if spec.remove_tau_corner and spec.alpha_at(xs) == 0:
                continue
            val = spec.phi_value(xs) if spec.phi is None or isinstance(spec.phi, BoxPoly) else as_rat(
                spec.phi.at(spec.face_index, xs)
            )
            terms.append((val, -e * f * spec.alpha_at(xs)))
    total = QExpSum(tuple(terms)).scal(Fraction(1, e**spec.norm_dim))
    return _finish(total, spec.r)


def _product(ranges):
    if not ranges:
        yield ()
        return
    for k in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (k,) + rest


def _simplex_points(N, e):
    # closed-face solutions of sum N_j a_j = e over nonnegative integers
    if len(N) == 1:
        if e % N[0] == 0:
            yield (e // N[0],)
        return
    for a0 in range(e // N[0] + 1):
        for rest in _simplex_points(N[1:], e - N[0] * a0):
            yield (a0,) + rest


def lemma_sum_closedform(spec: WeightedSumSpec, e: int, f: int):
    """Product formula for the box with its minimal corner removed.

    Requires the box shape the formula is stated for: a common upper bound
    N, free coordinates starting at 0, constrained coordinates starting at
    their pin q_i, the corner removed, and a constant phi.
    """
    if e < 1 or f < 1:
        raise ValueError("e and f must be positive")
    if spec.box is None:
        raise ValueError("closed form applies to box specs only")
    if not spec.remove_tau_corner:
        raise ValueError("closed form sums over the corner-removed box")
    if spec.phi is not None and spec.phi.degree > 0:
        raise ValueError("closed form requires constant phi")
    uppers = {hi for _, hi in spec.box}
    if len(uppers) != 1:
        raise ValueError("closed form requires a common upper bound")
    N = uppers.pop()
    support = set(spec.support)
    for j, (lo, hi) in enumerate(spec.box):
        want = spec.offsets[j] if j in support else Fraction(0)
        if lo != want:
            raise ValueError("closed form requires [q_i, N] and [0, N] intervals")
    if e * N != int(e * N):
        raise ValueError("closed form requires integral e*N")
    eN = int(e * N)
    d = spec.norm_dim
    prod = QExpSum.const(1)
    delta = 1
    for i in sorted(support):
        a_i, q_i = spec.alpha[i], spec.offsets[i]
        eq = e * q_i
        if eq != int(eq):
            delta = 0
        m_i = math.ceil(eq)
        num = QExpSum.term(1, -f * a_i * (eN + 1 - eq)) - QExpSum.term(
            1, -f * a_i * (m_i - eq)
        )
        den = QExpSum.term(1, -f * a_i) - QExpSum.const(1)
        prod = prod * num.divexact(den)
    if delta:
        prod = prod - QExpSum.const(1)
    scale = Fraction((1 + eN) ** d, e**d)
    if spec.phi is not None and spec.phi.monomials:
        scale *= spec.phi.monomials[0][0]
    elif spec.phi is not None:
        scale = Fraction(0)
    return _finish(prod.scal(scale), spec.r)


def tau_integral(spec: WeightedSumSpec) -> Fraction:
    """Integral of phi over the vanishing locus of alpha, exactly."""
    if spec.box is not None:
        if spec.tau_dim < 0:
            return Fraction(0)
        if spec.phi is not None and spec.phi.degree > 2:
            raise ValueError("unsupported phi degree %d" % spec.phi.degree)
        support = set(spec.support)
        monos = (
            spec.phi.monomials
            if spec.phi is not None
            else ((Fraction(1), (0,) * len(spec.box)),)
        )
        total = Fraction(0)
        for c, ks in monos:
            term = c
            for j, k in enumerate(ks):
                lo, hi = spec.box[j]
                if j in support:
                    term *= spec.offsets[j] ** k
                else:
                    term *= (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
            total += term
        return total
    # face mode: the locus is a subface; affine integrands use the centroid
    from .measures import face_volume

    fc = spec._face()
    N = fc.multiplicities
    off = sum(a * q for a, q in zip(spec.alpha, spec.offsets))
    zero = [j for j, n in enumerate(N) if Fraction(spec.alpha[j], n) - off == 0]
    if not zero:
        return Fraction(0)
    subN = tuple(N[j] for j in zero)
    vol = face_volume(subN)
    coords = [Fraction(0)] * len(N)
    for j in zero:
        coords[j] = Fraction(1, len(zero) * N[j])
    if spec.phi is None:
        return vol
    if isinstance(spec.phi, BoxPoly):
        if spec.phi.degree > 1:
            raise ValueError("unsupported phi degree %d" % spec.phi.degree)
        return vol * spec.phi(coords)
    return vol * as_rat(spec.phi.at(spec.face_index, tuple(coords)))


# ---------------------------------------------------------------------------
# the mass simulator


@dataclass(frozen=True)
class SimAtom:
    point: object  # SkPoint
    lower: QExpSum
    upper: QExpSum

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


@dataclass(frozen=True)
class SimulatedMeasure:
    model: SncModel
    e: int
    f: int
    q: int
    atoms: tuple
    wt_min: Fraction  # weight minimum over the whole skeleton
    normalized_by: int | None = None  # dimension used in the e^{-dim} factor

    def totals(self):
        lo = QExpSum.zero()
        hi = QExpSum.zero()
        for a in self.atoms:
            lo = lo + a.lower
            hi = hi + a.upper
        return lo, hi

    def integrate(self, phi):
        lo = QExpSum.zero()
        hi = QExpSum.zero()
        for a in self.atoms:
            v = as_rat(phi(a.point))
            if v >= 0:
                lo = lo + a.lower.scal(v)
                hi = hi + a.upper.scal(v)
            else:
                lo = lo + a.upper.scal(v)
                hi = hi + a.lower.scal(v)
        return lo, hi

    def integrate_value(self, phi, precision: int = 96):
        """Evaluate the integral at q: a rational when exact, else an interval."""
        lo, hi = self.integrate(phi)
        vlo = qexp_eval(lo, self.q, precision)
        vhi = qexp_eval(hi, self.q, precision)
        if lo == hi and isinstance(vlo, Fraction):
            return vlo
        flo = vlo if isinstance(vlo, Fraction) else vlo.lo
        fhi = vhi if isinstance(vhi, Fraction) else vhi.hi
        return Interval(flo, fhi)

    def normalized(self, variant: str = "ks") -> "SimulatedMeasure":
        """Scale by q^{wt_min e f} / e^dim for the requested skeleton."""
        if variant == "ks":
            dim = ks_skeleton(self.model).dimension
        elif variant == "temperate":
            dim = temperate_part(self.model, ks_skeleton(self.model)).dimension
        else:
            raise ValueError("unknown normalization variant %r" % variant)
        shift = self.wt_min * self.e * self.f
        scale = Fraction(1) / Fraction(self.e) ** dim
        atoms = tuple(
            SimAtom(a.point, a.lower.shift(shift).scal(scale), a.upper.shift(shift).scal(scale))
            for a in self.atoms
        )
        return replace(self, atoms=atoms, normalized_by=dim)


def _is_power_of(q: int, p: int) -> bool:
    if q < p or p < 2:
        return False
    while q % p == 0:
        q //= p
    return q == 1


def simulate_measure(model: SncModel, ext, q: int) -> SimulatedMeasure:
    """Reduction masses of the level-e lattice points at residue size q^f.

    Raw masses; use .normalized() for the measure scaled toward its limit.
    """
    e, f = ext.e, ext.f
    if not (is_tame(e, model.p) or model.log_smooth):
        raise ValueError("ramification %d is wild for p=%d" % (e, model.p))
    if not _is_power_of(q, model.p):
        raise ValueError("q=%d is not a power of p=%d" % (q, model.p))
    n = model.dimension
    atoms = []
    for pt in lattice_points(model, e):
        s = model.strata[pt.face_index]
        wt = weight(model, pt)
        poly = s.count_poly * t_minus_one_pow(s.size - 1)
        mass = QExpSum.from_count_poly(poly, f, shift=f * (-e * wt - n))
        if s.horizontal:
            atoms.append(SimAtom(pt, QExpSum.zero(), mass))
        else:
            atoms.append(SimAtom(pt, mass, mass))
    return SimulatedMeasure(model, e, f, q, tuple(atoms), min_weight(model))


# ---------------------------------------------------------------------------
# convergence reports


@dataclass(frozen=True)
class ConvergenceCell:
    e: int
    f: int
    raw_total: object
    normalized_total: object
    per_phi: tuple  # (name, value, target)
    distance: Fraction


@dataclass(frozen=True)
class ConvergenceReport:
    model_name: str
    q: int
    target_kind: str  # shilov | stable-ks | stable-temperate | zero
    variant: str
    temperate_empty: bool
    cells: tuple
    monotone_in_f: bool
    monotone_in_e: bool

    def distance_grid(self):
        return {(c.e, c.f): c.distance for c in self.cells}


def _abs_gap(value, target: Fraction) -> Fraction:
    if isinstance(value, Fraction):
        return abs(value - target)
    return value.abs_bound_against(target)


def convergence_report(model: SncModel, e_seq, f_seq, q: int, phis=None) -> ConvergenceReport:
    """Distances of the simulated measures to their limit over an (e,f) grid.

    The target follows the sweep type: an all-ones ramification sweep
    converges to the Shilov measure at level 1; log smooth models converge
    to stable Lebesgue on the minimal-weight skeleton; otherwise the
    temperate variant is used, with a zero target when the temperate part
    is empty.
    """
    if phis is None:
        phis = phi_family(model)
    e_seq = list(e_seq)
    f_seq = list(f_seq)
    ks = ks_skeleton(model)
    temperate_empty = False
    if all(e == 1 for e in e_seq):
        target_kind = "shilov"
        variant = "ks"
        target = shilov_boundary(model, 1).measure
    elif model.log_smooth:
        target_kind = "stable-ks"
        variant = "ks"
        target = lebesgue_measure(model, ks, stable=True)
    else:
        skt = temperate_part(model, ks)
        variant = "temperate"
        if len(skt):
            target_kind = "stable-temperate"
            target = lebesgue_measure(model, skt, stable=True)
        else:
            target_kind = "zero"
            target = DiscreteMeasure(())
            temperate_empty = True

    def cell(ef):
        e, f = ef
        sim = simulate_measure(model, ExtensionParams(e, f), q)
        nu = sim.normalized(variant)
        per = []
        dist = Fraction(0)
        for phi in phis:
            val = nu.integrate_value(phi)
            tgt = as_rat(target.integrate(phi))
            per.append((phi.name, val, tgt))
            dist = max(dist, _abs_gap(val, tgt))
        raw_lo, raw_hi = sim.totals()
        nu_lo, nu_hi = nu.totals()
        raw_total = qexp_eval(raw_lo, q) if raw_lo == raw_hi else (
            qexp_eval(raw_lo, q), qexp_eval(raw_hi, q))
        nu_total = qexp_eval(nu_lo, q) if nu_lo == nu_hi else (
            qexp_eval(nu_lo, q), qexp_eval(nu_hi, q))
        return ConvergenceCell(e, f, raw_total, nu_total, tuple(per), dist)

    cells = pmap(cell, [(e, f) for e in e_seq for f in f_seq])
    grid = {(c.e, c.f): c.distance for c in cells}
    mono_f = all(
        grid[(e, f2)] <= grid[(e, f1)]
        for e in e_seq
        for f1, f2 in zip(f_seq, f_seq[1:])
    )
    mono_e = all(
        grid[(e2, f)] <= grid[(e1, f)]
        for f in f_seq
        for e1, e2 in zip(e_seq, e_seq[1:])
    )
    return ConvergenceReport(
        model.name, q, target_kind, variant, temperate_empty, tuple(cells), mono_f, mono_e
    )
