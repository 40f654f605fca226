"""Cone edge invariants."""
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from skelmeas.cone2d import ConeEdge, cone_edge_data
from skelmeas.measures import face_volume


class TestBasics:
    def test_standard_wedge(self):
        # the A_1 degeneration: rays (0,1) and (2,1), weight (0,1)
        d = cone_edge_data((0, 1), (2, 1), (0, 1))
        assert d == ConeEdge(1, 1, 1, 2, Fraction(2))

    def test_simplex_case(self):
        for n1 in range(1, 9):
            for n2 in range(1, 9):
                d = cone_edge_data((1, 0), (0, 1), (n1, n2))
                assert d.n1 == n1 and d.n2 == n2
                assert d.root_index == math.gcd(n1, n2)
                assert d.length == face_volume((n1, n2))

    def test_validation(self):
        with pytest.raises(ValueError, match="primitive"):
            cone_edge_data((2, 0), (0, 1), (1, 1))
        with pytest.raises(ValueError, match="independent"):
            cone_edge_data((1, 0), (-1, 0), (1, 1))
        with pytest.raises(ValueError, match="nonzero"):
            cone_edge_data((0, 0), (0, 1), (1, 1))
        with pytest.raises(ValueError, match="positively"):
            cone_edge_data((1, 0), (0, 1), (0, 1))


def _random_sl2(rng, steps=6):
    # product of elementary shears stays in SL2(Z)
    m = [[1, 0], [0, 1]]
    for _ in range(steps):
        k = rng.randint(-3, 3)
        if rng.random() < 0.5:
            s = [[1, k], [0, 1]]
        else:
            s = [[1, 0], [k, 1]]
        m = [
            [m[0][0] * s[0][0] + m[0][1] * s[1][0], m[0][0] * s[0][1] + m[0][1] * s[1][1]],
            [m[1][0] * s[0][0] + m[1][1] * s[1][0], m[1][0] * s[0][1] + m[1][1] * s[1][1]],
        ]
    return m


class TestInvariance:
    @given(st.integers(0, 10**6))
    def test_unimodular(self, seed):
        rng = random.Random(seed)
        v1, v2, w = (1, 0), (0, 1), (rng.randint(1, 6), rng.randint(1, 6))
        base = cone_edge_data(v1, v2, w)
        m = _random_sl2(rng)
        mv = lambda v: (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])
        # contragredient: w' = w adj(M)^T keeps <w', M v> = <w, v>
        wprime = (
            w[0] * m[1][1] - w[1] * m[1][0],
            -w[0] * m[0][1] + w[1] * m[0][0],
        )
        moved = cone_edge_data(mv(v1), mv(v2), wprime)
        assert moved == ConeEdge(base.root_index, base.n1, base.n2, base.det, base.length)
