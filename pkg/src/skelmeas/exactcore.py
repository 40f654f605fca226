"""Exact arithmetic kernel: rationals, count polynomials, q-expansion sums.

Everything in this module is immutable and pure.  Rationals are
fractions.Fraction, re-exported as Rat.  CountPoly is an integer polynomial
in the field-size variable t.  QExpSum is a finite sum of rational multiples
of rational powers of a base q > 1, kept in canonical form (strictly
increasing exponents, no zero coefficients).  No float enters any identity
check; inexact evaluation happens only inside qexp_eval and returns an
interval with a certified error bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rat = Fraction

RatLike = Union[int, str, float, Fraction]


def as_rat(x: RatLike) -> Fraction:
    """Coerce an int, float, Fraction, or "a/b" string to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError("cannot interpret %r as a rational" % (x,))


def format_decimal(x: Fraction, digits: int = 12) -> str:
    """Decimal expansion of a rational, rounded half-even to `digits` places."""
    sign = "-" if x < 0 else ""
    num, den = abs(x.numerator), x.denominator
    scaled = num * 10 ** (digits + 1) // den
    # round half to even on the last digit
    head, last = divmod(scaled, 10)
    if last > 5 or (last == 5 and (head % 2 == 1 or num * 10 ** (digits + 1) % den)):
        head += 1
    whole, frac = divmod(head, 10 ** digits)
    return "%s%d.%0*d" % (sign, whole, digits, frac)


def format_rat(x: Fraction, digits: int = 12) -> str:
    """Exact a/b form followed by a 12-digit decimal, for CLI output."""
    x = as_rat(x)
    exact = str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)
    return "%s (%s)" % (exact, format_decimal(x, digits))


# ---------------------------------------------------------------------------
# CountPoly


@dataclass(frozen=True)
class CountPoly:
    """Integer polynomial in t, coefficients lowest degree first."""

    coeffs: tuple

    def __post_init__(self):
        cleaned = [int(c) for c in self.coeffs]
        while cleaned and cleaned[-1] == 0:
            cleaned.pop()
        object.__setattr__(self, "coeffs", tuple(cleaned))

    @property
    def degree(self) -> int:
        # -1 for the zero polynomial
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __add__(self, other: "CountPoly") -> "CountPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return CountPoly(tuple(x + y for x, y in zip(a, b)))

    def __mul__(self, other: "CountPoly") -> "CountPoly":
        if self.is_zero() or other.is_zero():
            return CountPoly(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return CountPoly(tuple(out))

    def scale(self, k: int) -> "CountPoly":
        return CountPoly(tuple(k * c for c in self.coeffs))

    def divexact(self, k: int) -> "CountPoly":
        """Divide every coefficient by k; error if any division is inexact."""
        if k == 0:
            raise ZeroDivisionError("division of CountPoly by zero")
        out = []
        for c in self.coeffs:
            if c % k:
                raise ValueError("coefficient %d not divisible by %d" % (c, k))
            out.append(c // k)
        return CountPoly(tuple(out))

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append("%st" % ("" if c == 1 else "-" if c == -1 else c))
            else:
                parts.append("%st^%d" % ("" if c == 1 else "-" if c == -1 else c, i))
        return " + ".join(reversed(parts)).replace("+ -", "- ")


def t_minus_one_pow(d: int) -> CountPoly:
    """(t-1)^d as a CountPoly."""
    if d < 0:
        raise ValueError("negative power")
    coeffs = [math.comb(d, i) * (-1) ** (d - i) for i in range(d + 1)]
    return CountPoly(tuple(coeffs))


def eval_count_poly(P: CountPoly, t: int) -> int:
    if t < 1:
        raise ValueError("count polynomials are evaluated at t >= 1")
    return P(t)


# ---------------------------------------------------------------------------
# QExpSum


@dataclass(frozen=True)
class QExpSum:
    """Canonical finite sum of c_i * q^{r_i} with rational c_i, r_i."""

    terms: tuple  # ((coeff: Fraction, exponent: Fraction), ...), exponents strictly increasing

    def __post_init__(self):
        merged = {}
        for c, e in self.terms:
            c, e = as_rat(c), as_rat(e)
            merged[e] = merged.get(e, Fraction(0)) + c
        canon = tuple((c, e) for e, c in sorted(merged.items()) if c != 0)
        object.__setattr__(self, "terms", canon)

    @classmethod
    def zero(cls) -> "QExpSum":
        return cls(())

    @classmethod
    def const(cls, c: RatLike) -> "QExpSum":
        return cls(((as_rat(c), Fraction(0)),))

    @classmethod
    def term(cls, c: RatLike, e: RatLike) -> "QExpSum":
        return cls(((as_rat(c), as_rat(e)),))

    @classmethod
    def from_count_poly(cls, P: CountPoly, f: int, shift: RatLike = 0) -> "QExpSum":
        """Sum of c_k * q^{f*k + shift} over coefficients of P."""
        s = as_rat(shift)
        return cls(tuple((Fraction(c), Fraction(f * k) + s) for k, c in enumerate(P.coeffs)))

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for _, e in self.terms)

    def __add__(self, other: "QExpSum") -> "QExpSum":
        return QExpSum(self.terms + other.terms)

    def __neg__(self) -> "QExpSum":
        return QExpSum(tuple((-c, e) for c, e in self.terms))

    def __sub__(self, other: "QExpSum") -> "QExpSum":
        return self + (-other)

    def __mul__(self, other: "QExpSum") -> "QExpSum":
        out = []
        for c1, e1 in self.terms:
            for c2, e2 in other.terms:
                out.append((c1 * c2, e1 + e2))
        return QExpSum(tuple(out))

    def scal(self, c: RatLike) -> "QExpSum":
        c = as_rat(c)
        return QExpSum(tuple((c * a, e) for a, e in self.terms))

    def shift(self, delta: RatLike) -> "QExpSum":
        """Multiply by q^delta."""
        d = as_rat(delta)
        return QExpSum(tuple((c, e + d) for c, e in self.terms))

    def divexact(self, den: "QExpSum") -> "QExpSum":
        """Exact division; raises ValueError when the quotient is not a QExpSum."""
        if den.is_zero():
            raise ZeroDivisionError("division by zero QExpSum")
        if self.is_zero():
            return QExpSum.zero()
        dens = [e.denominator for _, e in self.terms] + [e.denominator for _, e in den.terms]
        L = math.lcm(*dens)
        a = {int(e * L): c for c, e in self.terms}
        b = {int(e * L): c for c, e in den.terms}
        amin, amax = min(a), max(a)
        bmin, bmax = min(b), max(b)
        # shift both numerator and denominator to ordinary polynomials in y
        A = [a.get(i, Fraction(0)) for i in range(amin, amax + 1)]
        B = [b.get(i, Fraction(0)) for i in range(bmin, bmax + 1)]
        if len(A) < len(B):
            raise ValueError("inexact QExpSum division")
        quot = [Fraction(0)] * (len(A) - len(B) + 1)
        rem = list(A)
        lead = B[-1]
        for i in range(len(quot) - 1, -1, -1):
            q = rem[i + len(B) - 1] / lead
            quot[i] = q
            if q:
                for j, bc in enumerate(B):
                    rem[i + j] -= q * bc
        if any(rem):
            raise ValueError("inexact QExpSum division")
        off = amin - bmin
        return QExpSum(tuple((c, Fraction(off + i, L)) for i, c in enumerate(quot) if c))

    def eval_exact(self, q: Fraction) -> Fraction:
        """Exact value; requires every q^{r_i} to be rational (ValueError otherwise)."""
        total = Fraction(0)
        for c, e in self.terms:
            total += c * _rat_power(q, e)
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for c, e in self.terms:
            cs = str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)
            if e == 0:
                parts.append(cs)
            else:
                es = str(e.numerator) if e.denominator == 1 else "%d/%d" % (e.numerator, e.denominator)
                base = "q^%s" % es if e.denominator == 1 and e >= 0 else "q^(%s)" % es
                parts.append(base if c == 1 else "%s*%s" % (cs, base))
        return " + ".join(parts)


def _int_nth_root(n: int, b: int):
    """Exact integer b-th root of n >= 0, or None."""
    if n < 0:
        return None
    if n in (0, 1) or b == 1:
        return n
    hi = 1 << (n.bit_length() // b + 2)
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** b < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** b == n else None


def _rat_power(q: Fraction, e: Fraction) -> Fraction:
    """q^e as an exact rational; ValueError when irrational."""
    if e.denominator == 1:
        return q ** e.numerator
    rn = _int_nth_root(q.numerator, e.denominator)
    rd = _int_nth_root(q.denominator, e.denominator)
    if rn is None or rd is None:
        raise ValueError("%s^(%s) is not rational" % (q, e))
    return Fraction(rn, rd) ** e.numerator


@dataclass(frozen=True)
class Interval:
    """Closed rational interval certifying an inexact evaluation."""

    lo: Fraction
    hi: Fraction

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __float__(self) -> float:
        return float(self.midpoint)

    def abs_bound_against(self, target: Fraction) -> Fraction:
        """Sup of |x - target| over the interval."""
        return max(abs(self.lo - target), abs(self.hi - target))

    def __add__(self, other):
        o = as_interval(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-as_interval(other))

    def __rsub__(self, other):
        return as_interval(other) + (-self)

    def __mul__(self, c):
        c = as_rat(c)
        if c >= 0:
            return Interval(self.lo * c, self.hi * c)
        return Interval(self.hi * c, self.lo * c)

    __rmul__ = __mul__


def as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    v = as_rat(x)
    return Interval(v, v)


def _mpf_to_fraction(raw) -> Fraction:
    # raw is an mpf value tuple (sign, mantissa, exponent, bitcount)
    sign, man, exp, _ = raw
    if man == 0 and exp != 0:
        raise ValueError("non-finite interval endpoint")
    v = Fraction(man)
    v = v * Fraction(2) ** exp if exp >= 0 else v / (1 << -exp)
    return -v if sign else v


def qexp_eval(s: QExpSum, q: RatLike, precision: int = 96):
    """Evaluate at base q > 1.

    Returns an exact Fraction whenever every q^{r_i} is rational (integer
    exponents, or exponents whose denominators divide away under integer
    root detection).  Otherwise returns an Interval of width <= 2^-precision.
    """
    q = as_rat(q)
    if q <= 1:
        raise ValueError("qexp_eval requires q > 1")
    try:
        return s.eval_exact(q)
    except ValueError:
        pass
    from mpmath import iv

    old = iv.prec
    try:
        for attempt in range(5):
            iv.prec = precision + 32 * (attempt + 1)
            qv = iv.mpf(q.numerator) / iv.mpf(q.denominator)
            logq = iv.log(qv)
            acc = iv.mpf(0)
            for c, e in s.terms:
                ev = iv.mpf(e.numerator) / iv.mpf(e.denominator)
                cv = iv.mpf(c.numerator) / iv.mpf(c.denominator)
                acc += cv * iv.exp(logq * ev)
            raw_lo, raw_hi = acc._mpi_
            lo = _mpf_to_fraction(raw_lo)
            hi = _mpf_to_fraction(raw_hi)
            if hi - lo <= Fraction(1, 2 ** precision):
                return Interval(lo, hi)
        raise ArithmeticError("interval evaluation did not reach 2^-%d" % precision)
    finally:
        iv.prec = old
