"""Skeleton geometry of a model.

Each stratum with component multiset J and multiplicities (N_j) gives a face

    { u in R^J, u_j >= 0, sum_j N_j u_j = 1 }

of dimension |J| - 1.  Coordinates are per occurrence: a stratum listing a
component twice (a loop) has two independent coordinates, and swapping them
gives a different point.  A point is stored on its minimal face, obtained by
dropping zero coordinates.

Level-e lattice points of a face are the u = a/e with a a nonnegative
integer vector solving sum N_j a_j = e.  At e = 1 these are exactly the
multiplicity-one vertices; if e divides e' the level-e points are a subset
of the level-e' points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .model import SncModel


@dataclass(frozen=True)
class Face:
    """Immutable view of one stratum with everything geometry needs."""

    index: int
    components: tuple
    multiplicities: tuple
    theta_orders: tuple
    m: int
    horizontal: bool
    tdeg: int

    @property
    def dim(self) -> int:
        return len(self.components) - 1


def face(model: SncModel, index: int) -> Face:
    s = model.strata[index]
    return Face(
        index=index,
        components=s.components,
        multiplicities=model.multiplicities(s),
        theta_orders=model.theta_orders(s),
        m=model.m,
        horizontal=s.horizontal,
        tdeg=s.tdeg,
    )


def faces(model: SncModel):
    return tuple(face(model, i) for i in range(len(model.strata)))


@dataclass(frozen=True)
class SkPoint:
    """A skeleton point in canonical (minimal-face) coordinates."""

    face_index: int
    coords: tuple  # Fractions, one per occurrence, sum N_j u_j = 1

    def sort_key(self):
        return (self.face_index, self.coords)


@dataclass(frozen=True)
class SubComplex:
    """A downward-closed set of face indices."""

    face_indices: tuple
    dimension: int  # max face dim, -1 when empty

    def __contains__(self, index: int) -> bool:
        return index in self.face_indices

    def __len__(self) -> int:
        return len(self.face_indices)


@lru_cache(maxsize=None)
def _by_multiset(model: SncModel):
    table = {}
    for i, s in enumerate(model.strata):
        table.setdefault(s.components, []).append(i)
    return table


def _sub_multisets(J):
    out = {J}
    stack = [J]
    while stack:
        cur = stack.pop()
        for i in range(len(cur)):
            sub = cur[:i] + cur[i + 1 :]
            if sub and sub not in out:
                out.add(sub)
                stack.append(sub)
    return out


def subface_indices(model: SncModel, index: int):
    """Indices of all strata whose multiset is contained in this one."""
    table = _by_multiset(model)
    out = set()
    for sub in _sub_multisets(model.strata[index].components):
        for j in table.get(sub, ()):
            out.add(j)
    return out


def subcomplex(model: SncModel, indices, close: bool = True) -> SubComplex:
    idx = set(indices)
    if close:
        for i in list(idx):
            idx |= subface_indices(model, i)
    dims = [len(model.strata[i].components) - 1 for i in idx]
    return SubComplex(tuple(sorted(idx)), max(dims, default=-1))


def full_complex(model: SncModel) -> SubComplex:
    return subcomplex(model, range(len(model.strata)), close=False)


# ---------------------------------------------------------------------------
# points


def canonicalize(model: SncModel, face_index: int, coords):
    """Drop zero coordinates and land on the minimal face."""
    s = model.strata[face_index]
    coords = tuple(Fraction(c) for c in coords)
    if len(coords) != len(s.components):
        raise ValueError("coordinate count does not match stratum size")
    if any(c < 0 for c in coords):
        raise ValueError("negative barycentric coordinate")
    total = sum(n * c for n, c in zip(model.multiplicities(s), coords))
    if total != 1:
        raise ValueError("coordinates must satisfy sum N_j u_j = 1, got %s" % total)
    keep = [i for i, c in enumerate(coords) if c != 0]
    if len(keep) == len(coords):
        return face_index, coords
    sub = tuple(s.components[i] for i in keep)
    matches = _by_multiset(model).get(sub, [])
    if not matches:
        raise ValueError("no stratum declared for subface %s" % "+".join(sub))
    if len(matches) > 1:
        # parallel strata with identical multiset; the schema cannot say
        # which one bounds this face
        raise ValueError("ambiguous subface %s" % "+".join(sub))
    return matches[0], tuple(coords[i] for i in keep)


def sk_point(model: SncModel, face_index: int, coords) -> SkPoint:
    fi, cs = canonicalize(model, face_index, coords)
    return SkPoint(fi, cs)


def vertex_point(model: SncModel, cid: str) -> SkPoint:
    i = model.vertex_stratum_index(cid)
    n = model.component(cid).multiplicity
    return SkPoint(i, (Fraction(1, n),))


def weight_at(model: SncModel, face_index: int, coords) -> Fraction:
    s = model.strata[face_index]
    ws = model.theta_orders(s)
    return sum((Fraction(w) * Fraction(u) for w, u in zip(ws, coords)), Fraction(0)) / model.m


def weight(model: SncModel, pt: SkPoint) -> Fraction:
    return weight_at(model, pt.face_index, pt.coords)


def point_stratum(model: SncModel, pt: SkPoint):
    return model.strata[pt.face_index]


# ---------------------------------------------------------------------------
# lattice points


def _solve(N, e):
    """Nonnegative integer solutions of sum N_j a_j = e, lex order."""
    if not N:
        return [()] if e == 0 else []
    out = []
    first, rest = N[0], N[1:]
    for a in range(e // first + 1):
        for tail in _solve(rest, e - first * a):
            out.append((a,) + tail)
    return out


def lattice_points(model: SncModel, e: int, sub: SubComplex | None = None):
    """Canonical level-e points of a subcomplex, sorted deterministically."""
    if e < 1:
        raise ValueError("level must be >= 1")
    if sub is None:
        sub = full_complex(model)
    seen = set()
    for i in sub.face_indices:
        N = model.multiplicities(model.strata[i])
        for a in _solve(N, e):
            pt = SkPoint(*canonicalize(model, i, [Fraction(x, e) for x in a]))
            seen.add(pt)
    return sorted(seen, key=SkPoint.sort_key)


# ---------------------------------------------------------------------------
# distinguished subcomplexes


def min_weight(model: SncModel, sub: SubComplex | None = None) -> Fraction:
    """Minimum of the weight over a subcomplex (attained at a vertex)."""
    if sub is None:
        sub = full_complex(model)
    best = None
    for i in sub.face_indices:
        s = model.strata[i]
        for cid in s.components:
            c = model.component(cid)
            val = Fraction(c.theta_order, model.m * c.multiplicity)
            if best is None or val < best:
                best = val
    if best is None:
        raise ValueError("empty subcomplex has no minimum")
    return best


def ks_skeleton(model: SncModel) -> SubComplex:
    """Faces on which the weight is identically minimal, closed downward.

    A face qualifies when every one of its vertices attains the global
    minimum and its stratum is not horizontal; the closure then brings in
    all subfaces.
    """
    lo = min_weight(model)
    core = []
    for i, s in enumerate(model.strata):
        if s.horizontal:
            continue
        vals = [
            Fraction(model.component(cid).theta_order, model.m * model.component(cid).multiplicity)
            for cid in s.components
        ]
        if all(v == lo for v in vals):
            core.append(i)
    return subcomplex(model, core, close=True)


def root_index(model: SncModel, face_index: int) -> int:
    N = model.multiplicities(model.strata[face_index])
    return math.gcd(*N) if len(N) > 1 else N[0]


def face_is_temperate(model: SncModel, face_index: int) -> bool:
    """Root index prime to the residue characteristic, components separable."""
    s = model.strata[face_index]
    if model.p != 1 and root_index(model, face_index) % model.p == 0:
        return False
    return all(model.component(cid).separable for cid in s.components)


def temperate_part(model: SncModel, sub: SubComplex | None = None) -> SubComplex:
    """Union of closures of the temperate faces of a subcomplex."""
    if sub is None:
        sub = full_complex(model)
    core = [i for i in sub.face_indices if face_is_temperate(model, i)]
    return subcomplex(model, core, close=True)


def is_tame(e: int, p: int) -> bool:
    return p == 1 or e % p != 0


# ---------------------------------------------------------------------------
# edges


def edge_length(model: SncModel, face_index: int) -> Fraction:
    s = model.strata[face_index]
    if len(s.components) != 2:
        raise ValueError("edge length needs a two-component stratum")
    n1, n2 = model.multiplicities(s)
    return Fraction(1, math.lcm(n1, n2))


def arclength_from(model: SncModel, face_index: int, coords, occurrence: int) -> Fraction:
    """Arclength position on an edge, zero at the vertex opposite `occurrence`.

    With ends i and j and length L, the point at coordinates u has distance
    N_i u_i L from the j-end, so distance to the i-end is (1 - N_i u_i) L.
    """
    s = model.strata[face_index]
    if len(s.components) != 2:
        raise ValueError("arclength needs a two-component stratum")
    N = model.multiplicities(s)
    return N[occurrence] * Fraction(coords[occurrence]) * edge_length(model, face_index)
