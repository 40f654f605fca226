"""Edge invariants of a two-dimensional monomial cone.

A two-ray cone with primitive generators v1, v2 and a uniformizer weight
vector wbar determines an edge of a skeleton: the endpoint multiplicities
are N_i = <wbar, v_i>, the root index is the gcd of the entries of wbar,
and the lattice length of the edge is

    length = rho * |det(v1, v2)| / (N1 * N2).

For v1 = e1, v2 = e2, wbar = (N1, N2) this reduces to gcd(N1,N2)/(N1 N2),
the simplex volume of an (N1, N2) edge.  All quantities are invariant under
a unimodular change of basis acting on the rays, with wbar transforming
contragrediently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class ConeEdge:
    root_index: int
    n1: int
    n2: int
    det: int
    length: Fraction


def _check_primitive(v, name):
    x, y = v
    if x == 0 and y == 0:
        raise ValueError("%s must be nonzero" % name)
    if math.gcd(abs(x), abs(y)) != 1:
        raise ValueError("%s must be primitive" % name)


def cone_edge_data(v1, v2, wbar) -> ConeEdge:
    v1 = (int(v1[0]), int(v1[1]))
    v2 = (int(v2[0]), int(v2[1]))
    wbar = (int(wbar[0]), int(wbar[1]))
    _check_primitive(v1, "v1")
    _check_primitive(v2, "v2")
    det = v1[0] * v2[1] - v1[1] * v2[0]
    if det == 0:
        raise ValueError("rays must be linearly independent")
    n1 = wbar[0] * v1[0] + wbar[1] * v1[1]
    n2 = wbar[0] * v2[0] + wbar[1] * v2[1]
    if n1 < 1 or n2 < 1:
        raise ValueError("wbar must pair positively with both rays")
    rho = math.gcd(abs(wbar[0]), abs(wbar[1]))
    return ConeEdge(rho, n1, n2, abs(det), Fraction(rho * abs(det), n1 * n2))
