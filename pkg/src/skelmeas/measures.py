"""Measures on skeleta and test functions against which to integrate them.

The reference measure on a face with multiplicities (N_0 .. N_d) is Lebesgue
in the lattice metric; its total mass is

    vol = gcd(N) / (d! * N_0 ... N_d)

which for an edge is 1/lcm(N_1, N_2) and for a vertex is 1.  A polytope
measure assigns each top-dimensional face of a subcomplex a constant density
against this reference; the stable variant uses the stratum's tame degree as
density.  Test functions are affine on every face, so their exact integral
is volume times the value at the centroid, whose coordinates are
u_j = 1/((d+1) N_j).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .exactcore import Interval, QExpSum, as_rat
from .model import SncModel
from .skeleton import Face, SkPoint, face, lattice_points, subcomplex, SubComplex, full_complex


def face_volume(N) -> Fraction:
    """Lattice-metric volume of the simplex {u >= 0 : sum N_j u_j = 1}."""
    N = tuple(int(x) for x in N)
    if not N or any(x < 1 for x in N):
        raise ValueError("multiplicities must be positive")
    d = len(N) - 1
    prod = 1
    for x in N:
        prod *= x
    return Fraction(math.gcd(*N), math.factorial(d) * prod)


def centroid(N):
    d = len(N) - 1
    return tuple(Fraction(1, (d + 1) * n) for n in N)


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """Affine-per-face function: on face i the value is c0 + sum c_k u_k.

    entries[i] = (c0, coeffs) aligned with the model's stratum list; the
    constructor helpers check continuity across every face inclusion.
    """

    name: str
    entries: tuple

    __test__ = False  # keep pytest from collecting this as a test class

    def at(self, face_index: int, coords) -> Fraction:
        c0, cs = self.entries[face_index]
        return c0 + sum((c * Fraction(u) for c, u in zip(cs, coords)), Fraction(0))

    def __call__(self, pt: SkPoint) -> Fraction:
        return self.at(pt.face_index, pt.coords)


def _injections(sub_comps, big_comps):
    """Id-preserving injective slot maps from a sub-multiset into a multiset."""
    slots_by_id = {}
    for pos, cid in enumerate(big_comps):
        slots_by_id.setdefault(cid, []).append(pos)
    choices = []
    order = []
    sub_by_id = {}
    for pos, cid in enumerate(sub_comps):
        sub_by_id.setdefault(cid, []).append(pos)
    for cid, positions in sub_by_id.items():
        order.append((cid, positions))
        choices.append(itertools.permutations(slots_by_id[cid], len(positions)))
    for combo in itertools.product(*choices):
        inj = {}
        for (cid, positions), targets in zip(order, combo):
            for s_pos, b_pos in zip(positions, targets):
                inj[s_pos] = b_pos
        yield inj


def _continuity_violations(model: SncModel, entries):
    from .skeleton import _by_multiset, _sub_multisets  # shared multiset tables

    table = _by_multiset(model)
    bad = []
    for i, s in enumerate(model.strata):
        Nbig = model.multiplicities(s)
        c0_i, cs_i = entries[i]
        for sub in _sub_multisets(s.components):
            if sub == s.components:
                continue
            for j in table.get(sub, ()):
                Nsub = model.multiplicities(model.strata[j])
                c0_j, cs_j = entries[j]
                probes = []
                k = len(sub)
                for a in range(k):
                    v = [Fraction(0)] * k
                    v[a] = Fraction(1, Nsub[a])
                    probes.append(tuple(v))
                for a in range(k):
                    for b in range(a + 1, k):
                        v = [Fraction(0)] * k
                        v[a] = Fraction(1, 2 * Nsub[a])
                        v[b] = Fraction(1, 2 * Nsub[b])
                        probes.append(tuple(v))
                for inj in _injections(sub, s.components):
                    for pt in probes:
                        emb = [Fraction(0)] * len(Nbig)
                        for s_pos, b_pos in inj.items():
                            emb[b_pos] = pt[s_pos]
                        val_big = c0_i + sum(c * u for c, u in zip(cs_i, emb))
                        val_sub = c0_j + sum(c * u for c, u in zip(cs_j, pt))
                        if val_big != val_sub:
                            bad.append(
                                "faces %d and %d disagree at %s (%s vs %s)"
                                % (i, j, pt, val_big, val_sub)
                            )
                            break
                    else:
                        continue
                    break
    return bad


def _build(model: SncModel, name: str, raw_entries) -> TestFunction:
    entries = tuple(
        (as_rat(c0), tuple(as_rat(c) for c in cs)) for c0, cs in raw_entries
    )
    for i, s in enumerate(model.strata):
        if len(entries[i][1]) != s.size:
            raise ValueError(
                "phi %r: face %d wants %d coefficients, got %d"
                % (name, i, s.size, len(entries[i][1]))
            )
    bad = _continuity_violations(model, entries)
    if bad:
        raise ValueError("phi %r discontinuous: %s" % (name, "; ".join(bad)))
    return TestFunction(name, entries)


def constant_function(model: SncModel, value=1) -> TestFunction:
    v = as_rat(value)
    return _build(model, "const_%s" % v, [(v, (0,) * s.size) for s in model.strata])


def hat_function(model: SncModel, cid: str) -> TestFunction:
    """The piecewise affine bump equal to 1 at the vertex of one component.

    On a face listing the component with multiplicity N at some slots, the
    value is the sum of N u_slot; elsewhere zero.
    """
    if cid not in model.component_ids():
        raise ValueError("unknown component %r" % cid)
    entries = []
    for s in model.strata:
        N = model.multiplicities(s)
        coeffs = tuple(N[k] if s.components[k] == cid else 0 for k in range(s.size))
        entries.append((0, coeffs))
    return _build(model, "hat_%s" % cid, entries)


def phi_family(model: SncModel):
    """Constant 1 plus one hat per component; separates vertex masses."""
    return [constant_function(model)] + [hat_function(model, c.id) for c in model.components]


def parse_phi(text: str, model: SncModel):
    """Parse a TOML list of test functions.

    Each [[phi]] table has a name and a faces table whose keys are the
    comma-joined sorted component ids of a stratum and whose values are
    [c0, c_1 .. c_k] with integer or "a/b" entries.  A key applies to every
    stratum with that multiset; unlisted faces get zero.
    """
    try:
        import tomllib
    except ImportError:  # pragma: no cover
        import tomli as tomllib

    tree = tomllib.loads(text)
    unknown = set(tree) - {"phi"}
    if unknown:
        raise ValueError("unknown top-level keys: %s" % ", ".join(sorted(unknown)))
    out = []
    for k, tab in enumerate(tree.get("phi", []) or []):
        bad_keys = set(tab) - {"name", "faces"}
        if bad_keys:
            raise ValueError("phi #%d: unknown keys %s" % (k, ", ".join(sorted(bad_keys))))
        name = tab.get("name")
        if not isinstance(name, str) or not name:
            raise ValueError("phi #%d: missing name" % k)
        faces_tab = tab.get("faces", {})
        if not isinstance(faces_tab, dict):
            raise ValueError("phi %r: faces must be a table" % name)
        by_multiset = {}
        for key, values in faces_tab.items():
            comps = tuple(sorted(key.split(",")))
            if not isinstance(values, list) or not values:
                raise ValueError("phi %r, face %r: value must be a nonempty list" % (name, key))
            by_multiset[comps] = [as_rat(v) for v in values]
        known = {s.components for s in model.strata}
        for comps in by_multiset:
            if comps not in known:
                raise ValueError(
                    "phi %r: no stratum with components %s" % (name, ",".join(comps))
                )
        entries = []
        for s in model.strata:
            values = by_multiset.get(s.components)
            if values is None:
                entries.append((0, (0,) * s.size))
            else:
                if len(values) != 1 + s.size:
                    raise ValueError(
                        "phi %r, face %s: expected %d values, got %d"
                        % (name, ",".join(s.components), 1 + s.size, len(values))
                    )
                entries.append((values[0], tuple(values[1:])))
        out.append(_build(model, name, entries))
    if not out:
        raise ValueError("no [[phi]] tables found")
    return out


# ---------------------------------------------------------------------------
# polytope (piecewise Lebesgue) measures


@dataclass(frozen=True)
class PolytopeMeasure:
    """Constant density against lattice Lebesgue on each listed face."""

    pieces: tuple  # of (Face, Fraction density)

    @property
    def total(self) -> Fraction:
        return sum(
            (d * face_volume(f.multiplicities) for f, d in self.pieces), Fraction(0)
        )

    def integrate(self, phi: TestFunction) -> Fraction:
        acc = Fraction(0)
        for f, dens in self.pieces:
            vol = face_volume(f.multiplicities)
            acc += dens * vol * phi.at(f.index, centroid(f.multiplicities))
        return acc


def lebesgue_measure(model: SncModel, sub: SubComplex | None = None, stable: bool = False) -> PolytopeMeasure:
    """Lebesgue measure on the top-dimensional part of a subcomplex.

    With stable=True each face is weighted by its stratum's tame degree,
    which is what the measure picks up after passing to a splitting field.
    """
    if sub is None:
        sub = full_complex(model)
    pieces = []
    for i in sub.face_indices:
        if len(model.strata[i].components) - 1 != sub.dimension:
            continue
        f = face(model, i)
        dens = Fraction(f.tdeg if stable else 1)
        pieces.append((f, dens))
    return PolytopeMeasure(tuple(pieces))


# ---------------------------------------------------------------------------
# discrete measures


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms (point, mass); masses may be Fraction, QExpSum, or Interval."""

    atoms: tuple

    @property
    def total(self):
        return _msum(mass for _, mass in self.atoms)

    def integrate(self, phi: TestFunction):
        return _msum(_mscale(mass, phi(pt)) for pt, mass in self.atoms)

    def scale(self, c):
        return DiscreteMeasure(tuple((pt, _mscale(mass, c)) for pt, mass in self.atoms))


def _mscale(mass, c):
    c = as_rat(c)
    if isinstance(mass, QExpSum):
        return mass.scal(c)
    return mass * c


def _msum(items):
    acc = None
    for x in items:
        acc = x if acc is None else acc + x
    if acc is None:
        return Fraction(0)
    return acc


def discrete_approximation(model: SncModel, sub: SubComplex | None = None, e: int = 1, stable: bool = False) -> DiscreteMeasure:
    """Level-e lattice approximation of (stable) Lebesgue on a subcomplex.

    Points run over the closure of the top-dimensional faces, each carrying
    mass e^-d, times the tame degree of its minimal stratum when stable.
    """
    if sub is None:
        sub = full_complex(model)
    d = sub.dimension
    if d < 0:
        return DiscreteMeasure(())
    top = [i for i in sub.face_indices if len(model.strata[i].components) - 1 == d]
    closed = subcomplex(model, top, close=True)
    unit = Fraction(1, e**d)
    atoms = []
    for pt in lattice_points(model, e, closed):
        mass = unit * (model.strata[pt.face_index].tdeg if stable else 1)
        atoms.append((pt, mass))
    return DiscreteMeasure(tuple(atoms))
