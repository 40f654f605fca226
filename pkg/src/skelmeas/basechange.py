"""Normalized base change of models, point transport, and Shilov boundaries.

Extending the base field with ramification e and residue degree f acts on a
model as follows.

Multiplicities drop to N' = N/gcd(e, N).  An edge with multiplicities
(N1, N2) acquires new vertices: writing L for the lattice of integer pairs
v with N1 v1 + N2 v2 divisible by e, the vertices of the normalized model
are the lattice points on the boundary of the convex hull of the nonzero
points of L in the closed quadrant.  A boundary point P gives a vertex of
multiplicity (N1 P1 + N2 P2)/e and theta-order w1 P1 + w2 P2, sitting at
u = P/(e N_P) on the old edge; consecutive boundary points are an L-basis,
which is exactly what makes the new model strict normal crossings and the
pushforward of Lebesgue measure scale by e face-by-face.  The axis points
recover the N' and w' = e w/gcd(e, N) formulas for the old vertices, and
the boundary points with multiplicity one are precisely the old level-e
lattice points, giving the canonical bijection between new integral points
and old (1/e)-integral points.

Faces of dimension two and more are carried through only when they need no
subdivision (their monoid stays saturated smooth); otherwise this raises,
as nothing in scope exercises higher-dimensional subdivision.

The residue extension splits strata: when the split degree f0 divides f a
stratum falls apart into tdeg pieces with the count polynomial divided
evenly; otherwise it stays whole and its split degree drops to
f0/gcd(f0, f).  Splitting a vertex stratum splits the component itself,
which is only well defined when the component sits in no larger stratum.

Wild extensions (p | e) are rejected unless the model is log smooth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactcore import t_minus_one_pow
from .model import Component, SncModel, Stratum, validate
from .skeleton import (
    SkPoint,
    canonicalize,
    is_tame,
    ks_skeleton,
    lattice_points,
    temperate_part,
    weight,
)
from .measures import DiscreteMeasure, face_volume


class BaseChangeError(ValueError):
    pass


@dataclass(frozen=True)
class ExtensionParams:
    e: int
    f: int = 1

    def __post_init__(self):
        if self.e < 1 or self.f < 1:
            raise ValueError("extension parameters must be positive")

    @property
    def degree(self) -> int:
        return self.e * self.f


def transformed_multiplicity(n: int, e: int) -> int:
    return n // math.gcd(e, n)


# ---------------------------------------------------------------------------
# edge subdivision profiles


def edge_profile(n1: int, n2: int, e: int):
    """Boundary lattice points for an (n1, n2) edge under ramification e.

    Returns the chain of integer pairs from the first-slot axis to the
    second-slot axis; length 2 means the edge survives unsubdivided.
    """
    k1 = e // math.gcd(n1, e)
    k2 = e // math.gcd(n2, e)
    pts = []
    for v1 in range(k1 + 1):
        for v2 in range(k2 + 1):
            if (v1, v2) != (0, 0) and (n1 * v1 + n2 * v2) % e == 0:
                pts.append((v1, v2))
    pts.sort(key=lambda p: (-p[0], p[1]))
    chain = []
    for p in pts:
        while len(chain) >= 2:
            a, b = chain[-2], chain[-1]
            cross = (b[0] - a[0]) * (p[1] - b[1]) - (b[1] - a[1]) * (p[0] - b[0])
            if cross > 0:
                chain.pop()
            else:
                break
        chain.append(p)
    assert chain[0] == (k1, 0) and chain[-1] == (0, k2)
    return chain


def _face_stays_smooth(N, e) -> bool:
    # the transform keeps the face as a single face iff the axis points
    # generate the congruence lattice: prod(e/gcd(N_j,e)) = e/gcd(e, gcd N)
    prod = 1
    for n in N:
        prod *= e // math.gcd(n, e)
    return prod == e // math.gcd(e, math.gcd(*N))


# ---------------------------------------------------------------------------
# the transform


@dataclass(frozen=True)
class OriginEntry:
    """Where a target stratum came from: source face and, per target slot,
    the source-face coordinates of that slot's vertex."""

    tag: str  # kept | newvert | newedge
    source_face: int
    slot_coords: tuple


@dataclass(frozen=True)
class BaseChangeMap:
    source: SncModel
    target: SncModel
    e: int
    f: int
    origins: tuple

    def transport_point(self, pt: SkPoint) -> SkPoint:
        """Carry a target-skeleton point back to the source skeleton."""
        entry = self.origins[pt.face_index]
        s = self.target.strata[pt.face_index]
        N = self.target.multiplicities(s)
        src = self.source.strata[entry.source_face]
        coords = [Fraction(0)] * len(src.components)
        for slot, u in enumerate(pt.coords):
            lam = N[slot] * Fraction(u)
            for j, c in enumerate(entry.slot_coords[slot]):
                coords[j] += lam * c
        return SkPoint(*canonicalize(self.source, entry.source_face, coords))


def _fresh_id(base: str, used: set) -> str:
    cid = base
    k = 0
    while cid in used:
        k += 1
        cid = "%s.u%d" % (base, k)
    used.add(cid)
    return cid


def base_change_with_map(model: SncModel, ext: ExtensionParams):
    e, f = ext.e, ext.f
    if not (is_tame(e, model.p) or model.log_smooth):
        raise BaseChangeError(
            "ramification %d is wild for p=%d and the model is not log smooth" % (e, model.p)
        )
    if e == 1 and f == 1:
        origins = tuple(
            OriginEntry(
                "kept",
                i,
                tuple(
                    _unit_coords(model, i, slot)
                    for slot in range(len(model.strata[i].components))
                ),
            )
            for i in range(len(model.strata))
        )
        return model, BaseChangeMap(model, model, 1, 1, origins)

    used_ids = set(model.component_ids())
    new_components = {c.id: _transform_component(c, e) for c in model.components}
    gen_components = []  # (id, Component), emitted after the originals

    # pass 1: geometry (subdivision); groups of (stratum, origin, vertex component ids)
    dup_index = {}
    groups = []
    for j, s in enumerate(model.strata):
        N = model.multiplicities(s)
        W = model.theta_orders(s)
        seps = [model.component(cid).separable for cid in s.components]
        k = dup_index.get(s.components, 0)
        dup_index[s.components] = k + 1
        if len(N) == 1 or _face_stays_smooth(N, e):
            origin = OriginEntry(
                "kept", j, tuple(_unit_coords(model, j, slot) for slot in range(len(N)))
            )
            groups.append(([(s, origin)], []))
            continue
        if len(N) > 2:
            raise BaseChangeError(
                "stratum %s needs subdivision in dimension %d; only edges are supported"
                % ("+".join(s.components), len(N) - 1)
            )
        chain = edge_profile(N[0], N[1], e)
        verts = []  # (component id, coords on source face) along the chain
        members = []
        gen_here = []
        for pos, (v1, v2) in enumerate(chain):
            mult = (N[0] * v1 + N[1] * v2) // e
            u = (Fraction(v1, e * mult), Fraction(v2, e * mult))
            if pos == 0:
                verts.append((s.components[0], u))
            elif pos == len(chain) - 1:
                verts.append((s.components[1], u))
            else:
                cid = _fresh_id(
                    "%s+%s#%d@%d" % (s.components[0], s.components[1], k, v1), used_ids
                )
                comp = Component(cid, mult, W[0] * v1 + W[1] * v2, seps[0] and seps[1])
                gen_here.append(comp)
                verts.append((cid, u))
                members.append(
                    (
                        Stratum((cid,), s.count_poly * t_minus_one_pow(1), s.tdeg, s.split_degree, s.horizontal),
                        OriginEntry("newvert", j, (u,)),
                    )
                )
        for a, b in zip(verts, verts[1:]):
            pair = sorted((a, b))
            members.append(
                (
                    Stratum((pair[0][0], pair[1][0]), s.count_poly, s.tdeg, s.split_degree, s.horizontal),
                    OriginEntry("newedge", j, (pair[0][1], pair[1][1])),
                )
            )
        groups.append((members, gen_here))

    # pass 2: splitting by the residue extension
    final_strata = []
    final_origins = []
    split_renames = {}  # old component id -> list of copy ids (vertex splits)
    for members, gen_here in groups:
        s0 = members[0][0]
        if s0.split_degree == 1:
            for s, o in members:
                final_strata.append(s)
                final_origins.append(o)
            for comp in gen_here:
                gen_components.append(comp)
            continue
        if f % s0.split_degree == 0:
            copies = s0.tdeg
            renames = {}
            for comp in gen_here:
                renames[comp.id] = [
                    _fresh_id("%s#%d" % (comp.id, t), used_ids) for t in range(copies)
                ]
                for t in range(copies):
                    gen_components.append(
                        Component(renames[comp.id][t], comp.multiplicity, comp.theta_order, comp.separable)
                    )
            for s, o in members:
                if s.size == 1 and s.components[0] not in renames:
                    cid = s.components[0]
                    if any(t.size > 1 and cid in t.components for t in model.strata):
                        raise BaseChangeError(
                            "component %r splits but appears in a larger stratum" % cid
                        )
                    renames[cid] = [
                        _fresh_id("%s#%d" % (cid, t), used_ids) for t in range(copies)
                    ]
                    src = new_components.pop(cid)
                    split_renames[cid] = renames[cid]
                    for t in range(copies):
                        new_components[renames[cid][t]] = Component(
                            renames[cid][t], src.multiplicity, src.theta_order, src.separable
                        )
                try:
                    part = s.count_poly.divexact(copies)
                except ValueError:
                    raise BaseChangeError(
                        "stratum %s: count polynomial not divisible by tdeg %d"
                        % ("+".join(s.components), copies)
                    )
                for t in range(copies):
                    comps = tuple(
                        renames[cid][t] if cid in renames else cid for cid in s.components
                    )
                    final_strata.append(Stratum(comps, part, 1, 1, s.horizontal))
                    final_origins.append(o)
        else:
            g = math.gcd(s0.split_degree, f)
            for s, o in members:
                final_strata.append(
                    Stratum(s.components, s.count_poly, s.tdeg, s.split_degree // g, s.horizontal)
                )
                final_origins.append(o)
            for comp in gen_here:
                gen_components.append(comp)

    comps_out = []
    for c in model.components:
        if c.id in split_renames:
            comps_out.extend(new_components[cid] for cid in split_renames[c.id])
        else:
            comps_out.append(new_components[c.id])
    comps_out.extend(gen_components)

    target = SncModel(
        name=model.name + "+e%df%d" % (e, f),
        dimension=model.dimension,
        p=model.p,
        q=None if model.q is None else model.q**f,
        m=model.m,
        log_smooth=model.log_smooth,
        components=tuple(comps_out),
        strata=tuple(final_strata),
    )
    bad = validate(target)
    if bad:
        raise BaseChangeError("transform produced an invalid model: " + "; ".join(bad))
    return target, BaseChangeMap(model, target, e, f, tuple(final_origins))


def base_change(model: SncModel, ext: ExtensionParams) -> SncModel:
    return base_change_with_map(model, ext)[0]


def _transform_component(c: Component, e: int) -> Component:
    g = math.gcd(e, c.multiplicity)
    return Component(c.id, c.multiplicity // g, e * c.theta_order // g, c.separable)


def _unit_coords(model: SncModel, face_index: int, slot: int):
    s = model.strata[face_index]
    N = model.multiplicities(s)
    out = [Fraction(0)] * len(N)
    out[slot] = Fraction(1, N[slot])
    return tuple(out)


# ---------------------------------------------------------------------------
# correspondence and scaling checks


def lattice_correspondence_check(model: SncModel, e: int) -> bool:
    """Integral points after ramification e match the old level-e points."""
    target, bmap = base_change_with_map(model, ExtensionParams(e, 1))
    new_pts = lattice_points(target, 1)
    transported = [bmap.transport_point(p) for p in new_pts]
    if len(set(transported)) != len(new_pts):
        return False
    return set(transported) == set(lattice_points(model, e))


def volume_scaling_check(bmap: BaseChangeMap) -> bool:
    """Pushforward of face Lebesgue scales by e^d on every source face."""
    got = {}
    for i, s in enumerate(bmap.target.strata):
        o = bmap.origins[i]
        src = bmap.source.strata[o.source_face]
        if s.size != src.size:
            continue
        got[o.source_face] = got.get(o.source_face, Fraction(0)) + face_volume(
            bmap.target.multiplicities(s)
        )
    for j, s in enumerate(bmap.source.strata):
        d = s.size - 1
        want = bmap.e**d * face_volume(bmap.source.multiplicities(s))
        if got.get(j, Fraction(0)) != want:
            return False
    return True


# ---------------------------------------------------------------------------
# Shilov boundaries


@dataclass(frozen=True)
class ShilovResult:
    e: int
    tame: bool
    points: tuple
    ord_min_baseK: Fraction | None  # minimum weight, base-field units
    measure: DiscreteMeasure  # tdeg-weighted Dirac sum
    scaled_measure: DiscreteMeasure  # divided by e^dim of the minimal-weight skeleton

    @property
    def ord_min_extension(self):
        # same number in the extension's value normalization
        return None if self.ord_min_baseK is None else self.e * self.ord_min_baseK


def shilov_boundary(model: SncModel, e: int) -> ShilovResult:
    """Argmin of the weight over the level-e lattice of the full skeleton."""
    pts = lattice_points(model, e)
    tame = is_tame(e, model.p)
    if not pts:
        empty = DiscreteMeasure(())
        return ShilovResult(e, tame, (), None, empty, empty)
    vals = [(weight(model, p), p) for p in pts]
    lo = min(v for v, _ in vals)
    chosen = tuple(p for v, p in vals if v == lo)
    atoms = tuple((p, Fraction(model.strata[p.face_index].tdeg)) for p in chosen)
    dim_ks = ks_skeleton(model).dimension
    raw = DiscreteMeasure(atoms)
    return ShilovResult(e, tame, chosen, lo, raw, raw.scale(Fraction(1, e**dim_ks)))


@dataclass(frozen=True)
class ShilovSweepRow:
    e: int
    tame: bool
    n_points: int
    raw_total: Fraction
    scaled_total: Fraction
    temperate_dim: int
    temperate_total: Fraction
    converging: bool
    distance: Fraction | None  # sup over the family vs the stable target
    per_phi: tuple  # (name, scaled-by-temperate-dim value, target value)


def shilov_convergence(model: SncModel, e_list, phis=None):
    """Scaled Shilov measures along e, against stable Lebesgue targets.

    The temperate normalization divides by e^dim of the temperate part of
    the minimal-weight skeleton; when that part is empty the dim -1
    convention multiplies by e and the row is flagged non-converging.
    """
    from .measures import lebesgue_measure, phi_family

    if phis is None:
        phis = phi_family(model)
    ks = ks_skeleton(model)
    skt = temperate_part(model, ks)
    target = lebesgue_measure(model, skt, stable=True) if len(skt) else None
    rows = []
    for e in e_list:
        res = shilov_boundary(model, e)
        lam_t = res.measure.scale(Fraction(1) / Fraction(e) ** skt.dimension)
        per = []
        dist = None
        for phi in phis:
            val = lam_t.integrate(phi)
            tgt = target.integrate(phi) if target is not None else Fraction(0)
            per.append((phi.name, val, tgt))
            gap = abs(val - tgt)
            dist = gap if dist is None else max(dist, gap)
        rows.append(
            ShilovSweepRow(
                e=e,
                tame=res.tame,
                n_points=len(res.points),
                raw_total=res.measure.total,
                scaled_total=res.scaled_measure.total,
                temperate_dim=skt.dimension,
                temperate_total=lam_t.total,
                converging=len(skt) > 0,
                distance=dist,
                per_phi=tuple(per),
            )
        )
    return rows
