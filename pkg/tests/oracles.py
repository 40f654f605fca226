"""Independent oracles used by the test suite.

These are deliberately naive implementations (brute force, repeated
addition, textbook formulas) kept separate from the library so that every
closed form in skelmeas is certified against code that shares nothing with
it.  Expected values quoted in the tests were produced by these oracles.
"""
from fractions import Fraction


def horner_by_addition(coeffs, t):
    """Evaluate sum c_i t^i using only repeated addition.

    Multiplication x*t is expanded as x added t times, so this shares no
    arithmetic shortcut with CountPoly.__call__.
    """
    acc = 0
    for c in reversed(coeffs):
        stretched = 0
        for _ in range(t):
            stretched += acc
        acc = stretched + c
    return acc


def denumerant_count(N, e):
    """Number of nonnegative integer solutions of sum N_j a_j = e.

    Dynamic program over the target value; this is the ground-truth lattice
    count behind the simplex volume formula.
    """
    table = [0] * (e + 1)
    table[0] = 1
    for n in N:
        for v in range(n, e + 1):
            table[v] += table[v - n]
    return table[e]


def riemann_sum_edge(N1, N2, phi, steps=10000):
    """Approximate integral of phi over the edge {N1 u1 + N2 u2 = 1}.

    Parameterize by arclength in the lattice metric: total length
    gcd(N1,N2)/(N1 N2); phi takes (u1, u2).  Midpoint rule with floats; used
    only to sanity-check exact centroid-rule values at loose tolerance.
    """
    import math

    length = math.gcd(N1, N2) / (N1 * N2)
    total = 0.0
    for k in range(steps):
        s = (k + 0.5) / steps
        u1 = s / N1
        u2 = (1.0 - N1 * u1) / N2
        total += phi(u1, u2)
    return total * length / steps


def circle_count_formula(q):
    """|{x^2 + y^2 = 1}| over F_q, q odd: q - (-1)^((q-1)/2)."""
    return q - (-1) ** ((q - 1) // 2)


def geometric_qexp(coeff, ratio_exp, n_terms, q):
    """Plain-float geometric sum coeff * sum_{k=0}^{n-1} q^(ratio_exp*k)."""
    return float(coeff) * sum(float(q) ** (float(ratio_exp) * k) for k in range(n_terms))


def brute_weighted_sum(box_lo, box_hi, alpha, phi, r, e, f, skip=None):
    """Literal lattice sum  sum phi(x) r^{-e f alpha(x)}  over the box grid.

    Exact Fractions throughout; exponents must come out integral.  `skip`
    is an optional predicate removing grid points.  No e^{-d} prefactor;
    callers apply their own normalization.
    """
    import itertools

    ranges = []
    for lo, hi in zip(box_lo, box_hi):
        lo, hi = Fraction(lo), Fraction(hi)
        kmin = -((-lo * e).__ceil__() if hasattr(lo, "__ceil__") else 0)
        # ceil(e*lo) .. floor(e*hi)
        kmin = (lo * e).__ceil__()
        kmax = (hi * e).__floor__()
        ranges.append(range(kmin, kmax + 1))
    total = Fraction(0)
    for ks in itertools.product(*ranges):
        x = tuple(Fraction(k, e) for k in ks)
        if skip is not None and skip(x):
            continue
        expo = -e * f * alpha(x)
        if expo.denominator != 1:
            raise ValueError("oracle handles integral exponents only")
        total += phi(x) * Fraction(r) ** expo.numerator
    return total
