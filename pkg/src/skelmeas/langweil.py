"""Finite fields and brute-force point counts at desk scale.

Fields are F_p[t]/(modulus) with elements encoded as integers in base p
(digit i is the coefficient of t^i).  Multiplication goes through discrete
log tables built once per field, so counting loops only do table lookups
and digitwise additions.  Counts are exact; the normalized sequences
count/p^{n m} feed the component-counting limit check

    |count_m - c * p^{n m}| <= C * (p^m)^{n - 1/2}

evaluated in exact integer arithmetic by squaring both sides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._util import pmap
from .exactcore import as_rat

MAX_FIELD = 2**20
MAX_VARS = 4


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# univariate arithmetic over the prime field, used only for modulus search

def _pm_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pm_mulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _pm_mod(out, f, p)


def _pm_mod(a, f, p):
    a = list(a)
    d = len(f) - 1
    # f is monic, so plain subtraction of shifted multiples reduces
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i] % p
        if c:
            for j in range(d + 1):
                a[i - d + j] = (a[i - d + j] - c * f[j]) % p
        a[i] = 0
    return _pm_trim(a[:d] if len(a) > d else a)


def _pm_gcd(a, b, p):
    a, b = _pm_trim(list(a)), _pm_trim(list(b))
    while b:
        inv = pow(b[-1], p - 2, p) if p > 2 else b[-1]
        bm = [(c * inv) % p for c in b]
        r = a
        while len(r) >= len(bm):
            c = r[-1] % p
            if c:
                off = len(r) - len(bm)
                for j in range(len(bm)):
                    r[off + j] = (r[off + j] - c * bm[j]) % p
            r.pop()
            _pm_trim(r)
            if not r:
                break
        a, b = bm, r
    return _pm_trim(a)


def _pm_sub(a, b, p):
    out = [0] * max(len(a), len(b))
    for i in range(len(out)):
        av = a[i] if i < len(a) else 0
        bv = b[i] if i < len(b) else 0
        out[i] = (av - bv) % p
    return _pm_trim(out)


def _frobenius_power(f, p, k):
    """t^(p^k) mod f by square and multiply on the exponent."""
    e = p**k
    base = [0, 1]
    acc = [1]
    while e:
        if e & 1:
            acc = _pm_mulmod(acc, base, f, p)
        base = _pm_mulmod(base, base, f, p)
        e >>= 1
    return acc


def _is_irreducible(f, p) -> bool:
    # t^{p^m} must fix t, and no proper subfield may catch any root
    m = len(f) - 1
    if m < 1:
        return False
    tred = _pm_mod([0, 1], f, p)
    if _pm_sub(_frobenius_power(f, p, m), tred, p):
        return False
    for ell in {d for d in range(2, m + 1) if m % d == 0 and _is_prime(d)}:
        diff = _pm_sub(_frobenius_power(f, p, m // ell), tred, p)
        if len(_pm_gcd(f, diff, p)) > 1:
            return False
    return True


@dataclass(frozen=True)
class FiniteField:
    """F_{p^m} with a monic irreducible modulus, found by search if omitted.

    The search takes the lexicographically smallest irreducible, so equal
    (p, m) pairs always name the same field.
    """

    p: int
    m: int
    modulus: tuple = None

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError("p=%d is not prime" % self.p)
        if self.m < 1:
            raise ValueError("extension degree must be positive")
        if self.modulus is None:
            object.__setattr__(self, "modulus", self._find_modulus())
        else:
            f = tuple(int(c) % self.p for c in self.modulus)
            if len(f) != self.m + 1 or f[-1] != 1:
                raise ValueError("modulus must be monic of degree m")
            if not _is_irreducible(list(f), self.p):
                raise ValueError("modulus is reducible")
            object.__setattr__(self, "modulus", f)

    def _find_modulus(self):
        p, m = self.p, self.m
        for code in range(p**m):
            f = list(_digits(code, p, m)) + [1]
            if _is_irreducible(f, p):
                return tuple(f)
        raise AssertionError("no irreducible polynomial found")

    @property
    def size(self) -> int:
        return self.p**self.m

    def elements(self):
        return range(self.size)

    def embed(self, c: int) -> int:
        return c % self.p

    def add(self, a: int, b: int) -> int:
        p = self.p
        if p == 2:
            return a ^ b
        out, shift = 0, 1
        while a or b:
            out += ((a + b) % p) * shift
            a, b = a // p, b // p
            shift *= p
        return out

    def neg(self, a: int) -> int:
        p = self.p
        out, shift = 0, 1
        while a:
            out += (-a % p) * shift
            a //= p
            shift *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        exp, log = self._tables()
        return exp[(log[a] + log[b]) % (self.size - 1)]

    def pow(self, a: int, k: int) -> int:
        if k == 0:
            return 1
        if a == 0:
            return 0
        exp, log = self._tables()
        return exp[(log[a] * k) % (self.size - 1)]

    @property
    def generator(self) -> int:
        return self._tables()[0][1] if self.size > 2 else 1

    def _tables(self):
        cached = getattr(self, "_exp_log", None)
        if cached is not None:
            return cached
        order = self.size - 1
        for g in range(2, self.size):
            exp = [1]
            cur = g
            while cur != 1:
                exp.append(cur)
                cur = self._polymul(cur, g)
            if len(exp) == order:
                log = [0] * self.size
                for i, v in enumerate(exp):
                    log[v] = i
                object.__setattr__(self, "_exp_log", (exp, log))
                return exp, log
        # size 2: the unit group is trivial
        tables = ([1], [0, 0])
        object.__setattr__(self, "_exp_log", tables)
        return tables

    def _polymul(self, a: int, b: int) -> int:
        p, m = self.p, self.m
        da = list(_digits(a, p, m))
        db = list(_digits(b, p, m))
        out = [0] * (2 * m - 1)
        for i, ai in enumerate(da):
            if ai:
                for j, bj in enumerate(db):
                    out[i + j] = (out[i + j] + ai * bj) % p
        red = _pm_mod(out, list(self.modulus), p)
        return _encode(red, p)


def _digits(n: int, p: int, m: int):
    for _ in range(m):
        yield n % p
        n //= p


def _encode(coeffs, p: int) -> int:
    out, shift = 0, 1
    for c in coeffs:
        out += (c % p) * shift
        shift *= p
    return out


# ---------------------------------------------------------------------------
# polynomials as exponent-tuple -> integer coefficient maps

def _poly_canon(d):
    return {ks: c for ks, c in d.items() if c != 0}


def _poly_add(a, b):
    out = dict(a)
    for ks, c in b.items():
        out[ks] = out.get(ks, 0) + c
    return _poly_canon(out)


def _poly_neg(a):
    return {ks: -c for ks, c in a.items()}


def _poly_mul(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            out[key] = out.get(key, 0) + ca * cb
    return _poly_canon(out)


def _poly_pow(a, k, nvars):
    out = {(0,) * nvars: 1}
    for _ in range(k):
        out = _poly_mul(out, a)
    return out


class _PolyParser:
    """Recursive descent for integer polynomial expressions.

    Grammar: sums of products of powers; '^' only with a literal exponent;
    no implicit multiplication (write 2*x, not 2x).
    """

    def __init__(self, text, variables):
        self.text = text
        self.pos = 0
        self.variables = tuple(variables)
        self.nvars = len(self.variables)

    def error(self, msg):
        raise ValueError("%s at position %d in %r" % (msg, self.pos, self.text))

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        out = self.expr()
        if self.peek():
            self.error("trailing input")
        return out

    def expr(self):
        if self.peek() == "-":
            self.pos += 1
            out = _poly_neg(self.term())
        else:
            out = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            out = _poly_add(out, rhs if op == "+" else _poly_neg(rhs))
        return out

    def term(self):
        out = self.factor()
        while self.peek() == "*":
            self.pos += 1
            out = _poly_mul(out, self.factor())
        return out

    def factor(self):
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            k = self.integer()
            return _poly_pow(base, k, self.nvars)
        return base

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            out = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return out
        if ch == "-":
            self.pos += 1
            return _poly_neg(self.factor())
        if ch.isdigit():
            return {(0,) * self.nvars: self.integer()}
        if ch.isalpha() or ch == "_":
            name = self.identifier()
            if name not in self.variables:
                self.error("unknown variable %r" % name)
            ks = [0] * self.nvars
            ks[self.variables.index(name)] = 1
            return {tuple(ks): 1}
        self.error("unexpected character %r" % ch)

    def integer(self):
        ch = self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.error("expected integer")
        return int(self.text[start : self.pos])

    def identifier(self):
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        return self.text[start : self.pos]


def parse_poly(text: str, variables) -> dict:
    """Parse an integer polynomial in the named variables."""
    return _PolyParser(text, variables).parse()


def _total_degrees(poly):
    return {sum(ks) for ks in poly}


@dataclass(frozen=True)
class VarietySpec:
    """Zero set of integer polynomials, affine or projective.

    `exclude` counts on the open complement of one more hypersurface.  The
    dimension defaults to the expected one for a complete intersection and
    feeds the normalization count / p^{dim * m}.
    """

    variables: tuple
    polynomials: tuple
    mode: str = "affine"
    exclude: dict = None
    expected_cZ: int = None
    dim: int = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "polynomials", tuple(_poly_canon(p) for p in self.polynomials)
        )
        if len(set(self.variables)) != len(self.variables) or not self.variables:
            raise ValueError("variables must be distinct and nonempty")
        if self.mode not in ("affine", "projective"):
            raise ValueError("mode must be affine or projective")
        for poly in self.polynomials + (
            (self.exclude,) if self.exclude is not None else ()
        ):
            for ks in poly:
                if len(ks) != len(self.variables):
                    raise ValueError("polynomial arity does not match variables")
            if self.mode == "projective" and len(_total_degrees(poly)) > 1:
                raise ValueError("projective polynomials must be homogeneous")
        if self.dim is None:
            d = len(self.variables) - len(self.polynomials)
            if self.mode == "projective":
                d -= 1
            object.__setattr__(self, "dim", max(d, 0))

    @classmethod
    def from_text(
        cls, variables, polynomials, mode="affine", exclude=None, **kw
    ) -> "VarietySpec":
        variables = tuple(variables)
        return cls(
            variables,
            tuple(parse_poly(s, variables) for s in polynomials),
            mode,
            parse_poly(exclude, variables) if exclude is not None else None,
            **kw,
        )


def _embed_poly(poly, F: FiniteField):
    out = {}
    for ks, c in poly.items():
        v = F.embed(c)
        if v:
            out[ks] = v
    return out


def _specialize(poly, F: FiniteField, val: int):
    maxdeg = max((ks[0] for ks in poly), default=0)
    powers = [1]
    for _ in range(maxdeg):
        powers.append(F.mul(powers[-1], val))
    out = {}
    for ks, c in poly.items():
        key = ks[1:]
        v = F.mul(c, powers[ks[0]])
        out[key] = F.add(out.get(key, 0), v)
    return {k: v for k, v in out.items() if v != 0}


def _dense1(poly):
    deg = max((ks[0] for ks in poly), default=0)
    out = [0] * (deg + 1)
    for ks, c in poly.items():
        out[ks[0]] = c
    return out


def _eval1(coeffs, F: FiniteField, val: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = F.add(F.mul(acc, val), c)
    return acc


def _count(nvars: int, polys, excl, F: FiniteField) -> int:
    live = []
    for poly in polys:
        if not poly:
            continue
        if set(poly) == {(0,) * nvars}:
            return 0  # nonzero constant: the branch is empty
        live.append(poly)
    if excl is not None:
        if not excl:
            return 0  # excluding the zero set of 0 excludes everything
        if set(excl) == {(0,) * nvars}:
            excl = None
    if nvars == 0:
        return 1
    if nvars == 1:
        dense = [_dense1(p) for p in live]
        dex = _dense1(excl) if excl is not None else None
        total = 0
        for val in F.elements():
            if all(_eval1(c, F, val) == 0 for c in dense) and (
                dex is None or _eval1(dex, F, val) != 0
            ):
                total += 1
        return total
    return sum(
        _count(
            nvars - 1,
            [_specialize(p, F, val) for p in live],
            _specialize(excl, F, val) if excl is not None else None,
            F,
        )
        for val in F.elements()
    )


def count_points(v: VarietySpec, F: FiniteField) -> int:
    """Exact number of solutions over F, with the exclusion applied.

    Projective counts go through the affine cone: remove the origin if it
    qualifies, then divide by the number of scalars.
    """
    if F.size > MAX_FIELD:
        raise ValueError("field of size %d is too large" % F.size)
    if len(v.variables) > MAX_VARS:
        raise ValueError("at most %d variables" % MAX_VARS)
    nvars = len(v.variables)
    polys = [_embed_poly(p, F) for p in v.polynomials]
    excl = _embed_poly(v.exclude, F) if v.exclude is not None else None
    if nvars > 1:
        # partition on the first coordinate; cells are independent
        def cell(val):
            return _count(
                nvars - 1,
                [_specialize(p, F, val) for p in polys],
                _specialize(excl, F, val) if excl is not None else None,
                F,
            )

        # degenerate constants fall out inside the cells
        total = sum(pmap(cell, list(F.elements())))
    else:
        total = _count(nvars, polys, excl, F)
    if v.mode == "affine":
        return total
    origin = (0,) * nvars
    origin_in = all(F.embed(p.get(origin, 0)) == 0 for p in v.polynomials) and (
        v.exclude is None or F.embed(v.exclude.get(origin, 0)) != 0
    )
    cone = total - (1 if origin_in else 0)
    if cone % (F.size - 1):
        raise AssertionError("cone count not divisible by the scalar group")
    return cone // (F.size - 1)


@dataclass(frozen=True)
class LangWeilRow:
    m: int
    field_size: int
    count: int
    normalized: Fraction
    dim: int


def langweil_sequence(v: VarietySpec, p: int, m_range) -> list:
    """Counts over F_{p^m} for m in the range, with count / p^{dim m}."""
    rows = []
    for m in m_range:
        F = FiniteField(p, m)
        count = count_points(v, F)
        rows.append(
            LangWeilRow(m, F.size, count, Fraction(count, p ** (v.dim * m)), v.dim)
        )
    return rows


def langweil_limit_check(seq, c_Z: int, C) -> bool:
    """Whether |count - c_Z q^n| <= C q^{n - 1/2} holds at every q = p^m.

    Exact: both sides are squared and cross-multiplied by q.
    """
    C2 = as_rat(C) ** 2
    for row in seq:
        q = row.field_size
        lhs = Fraction(row.count - c_Z * q**row.dim) ** 2 * q
        if lhs > C2 * Fraction(q) ** (2 * row.dim):
            return False
    return True
