"""Data model for snc-models as weighted dual complexes.

A model is a list of components (irreducible pieces of the special fiber,
each with a multiplicity N and a theta-order w) together with a list of
strata.  A stratum records which components meet along it, the counting
polynomial of its open part over the residue field, its tame degree, its
split degree, and whether it lies in the horizontal zero locus.

Stratum component lists are tuples that may repeat an id: a cycle of length
one (a component crossing itself in a single node) is encoded as the pair
(c, c), and |J| always counts occurrences.  Two distinct strata may carry
the same component list (a cycle of length two has two nodes over the same
pair), so strata are identified by position, not by their component set.

File format: TOML by default, JSON accepted (same tree).  Unknown keys are
rejected everywhere.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .exactcore import CountPoly

try:
    import tomllib  # py311+
except ImportError:  # pragma: no cover
    import tomli as tomllib

_ID_RE = re.compile(r"^[A-Za-z0-9_.+#@/-]+$")


class ModelError(ValueError):
    """Raised on schema violations; carries the full violation list."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Component:
    id: str
    multiplicity: int
    theta_order: int
    separable: bool = True


@dataclass(frozen=True)
class Stratum:
    components: tuple  # component ids, sorted, repeats allowed
    count_poly: CountPoly
    tdeg: int = 1
    split_degree: int = 1
    horizontal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(sorted(self.components)))

    @property
    def size(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class SncModel:
    name: str
    dimension: int
    p: int
    q: int | None
    m: int
    log_smooth: bool
    components: tuple
    strata: tuple

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def component_ids(self):
        return tuple(c.id for c in self.components)

    def multiplicities(self, stratum: Stratum):
        return tuple(self.component(cid).multiplicity for cid in stratum.components)

    def theta_orders(self, stratum: Stratum):
        return tuple(self.component(cid).theta_order for cid in stratum.components)

    def vertex_stratum_index(self, cid: str) -> int:
        for i, s in enumerate(self.strata):
            if s.components == (cid,):
                return i
        raise KeyError("no vertex stratum for %r" % cid)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


def _is_power_of(q: int, p: int) -> bool:
    if q < p:
        return False
    while q % p == 0:
        q //= p
    return q == 1


def _proper_submultisets(J):
    """Distinct nonempty proper sub-multisets of a sorted id tuple."""
    out = set()
    stack = {J}
    while stack:
        cur = stack.pop()
        for i in range(len(cur)):
            sub = cur[:i] + cur[i + 1 :]
            if sub and sub not in out:
                out.add(sub)
                stack.add(sub)
    out.discard(J)
    return out


def validate(m: SncModel):
    """Return the list of violated invariants (empty iff the model is valid)."""
    v = []
    if not m.name:
        v.append("model: name must be nonempty")
    if m.dimension < 0:
        v.append("model: dimension must be >= 0")
    if m.m < 1:
        v.append("model: m must be >= 1")
    if m.p != 1 and not _is_prime(m.p):
        v.append("model: p must be 1 (residue characteristic zero) or a prime")
    if m.q is not None:
        if m.p == 1:
            v.append("model: q given but p=1 has no finite residue field")
        elif not _is_power_of(m.q, m.p):
            v.append("model: q=%d is not a power of p=%d" % (m.q, m.p))

    seen = set()
    for c in m.components:
        if not _ID_RE.match(c.id or ""):
            v.append("component %r: id must match %s" % (c.id, _ID_RE.pattern))
        if c.id in seen:
            v.append("component %r: duplicate id" % c.id)
        seen.add(c.id)
        if c.multiplicity < 1:
            v.append("component %r: multiplicity must be >= 1" % c.id)

    declared = {}
    for i, s in enumerate(m.strata):
        declared.setdefault(s.components, []).append(i)

    singleton_owner = {}
    for i, s in enumerate(m.strata):
        label = "stratum %d %s" % (i, "+".join(s.components))
        if not s.components:
            v.append("stratum %d: component list must be nonempty" % i)
            continue
        unknown = [cid for cid in s.components if cid not in seen]
        if unknown:
            v.append("%s: unknown component id(s) %s" % (label, ", ".join(sorted(set(unknown)))))
            continue
        if s.tdeg < 1:
            v.append("%s: tdeg must be >= 1" % label)
        if s.split_degree < 1:
            v.append("%s: split_degree must be >= 1" % label)
        if (s.tdeg == 1) != (s.split_degree == 1):
            v.append("%s: split_degree must be 1 exactly when tdeg is 1" % label)
        want_deg = m.dimension - (s.size - 1)
        if want_deg < 0:
            v.append("%s: face dimension %d exceeds model dimension" % (label, s.size - 1))
        elif s.count_poly.degree != want_deg:
            v.append(
                "%s: count_poly degree %d, expected n-(|J|-1) = %d"
                % (label, s.count_poly.degree, want_deg)
            )
        elif s.count_poly.leading_coefficient != s.tdeg:
            v.append(
                "%s: leading coefficient %d differs from tdeg %d"
                % (label, s.count_poly.leading_coefficient, s.tdeg)
            )
        if s.size == 1:
            cid = s.components[0]
            if cid in singleton_owner:
                v.append("%s: second vertex stratum for component %r" % (label, cid))
            singleton_owner[cid] = i
        for sub in _proper_submultisets(s.components):
            if sub not in declared:
                v.append(
                    "%s: subface %s not declared (downward closure)" % (label, "+".join(sub))
                )

    for cid in sorted(seen):
        if (cid,) not in declared:
            v.append("component %r: missing vertex stratum" % cid)
    return v


# ---------------------------------------------------------------------------
# parsing and serialization

_MODEL_KEYS = {"name", "dimension", "p", "q", "m", "log_smooth"}
_COMPONENT_KEYS = {"id", "multiplicity", "theta_order", "separable"}
_STRATUM_KEYS = {"components", "count_poly", "tdeg", "split_degree", "horizontal"}


def _check_keys(table, allowed, where, problems):
    for k in table:
        if k not in allowed:
            problems.append("%s: unknown key %r" % (where, k))


def _require(table, key, types, where, problems, default=KeyError):
    if key not in table:
        if default is KeyError:
            problems.append("%s: missing key %r" % (where, key))
            return None
        return default
    val = table[key]
    tt = types if isinstance(types, tuple) else (types,)
    ok = isinstance(val, tt)
    if ok and isinstance(val, bool) and bool not in tt:
        ok = False  # bool passes isinstance(_, int)
    if not ok:
        problems.append("%s: key %r has wrong type" % (where, key))
        return None
    return val


def parse_model(text: str) -> SncModel:
    """Parse TOML (or JSON) into a validated SncModel.

    Raises ModelError listing every violation, or a syntax error with line
    information from the underlying parser.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            tree = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError("JSON syntax error: %s" % exc) from exc
    else:
        try:
            tree = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ModelError("TOML syntax error: %s" % exc) from exc
    if not isinstance(tree, dict):
        raise ModelError("document root must be a table")

    problems = []
    _check_keys(tree, {"model", "component", "stratum"}, "document", problems)
    head = tree.get("model")
    if not isinstance(head, dict):
        raise ModelError(problems + ["document: missing [model] table"])
    _check_keys(head, _MODEL_KEYS, "[model]", problems)

    name = _require(head, "name", str, "[model]", problems)
    dimension = _require(head, "dimension", int, "[model]", problems)
    p = _require(head, "p", int, "[model]", problems)
    q = _require(head, "q", int, "[model]", problems, default=None)
    mm = _require(head, "m", int, "[model]", problems, default=1)
    log_smooth = _require(head, "log_smooth", bool, "[model]", problems, default=False)

    components = []
    for i, tab in enumerate(tree.get("component", []) or []):
        where = "[[component]] #%d" % i
        if not isinstance(tab, dict):
            problems.append("%s: must be a table" % where)
            continue
        _check_keys(tab, _COMPONENT_KEYS, where, problems)
        cid = _require(tab, "id", str, where, problems)
        mult = _require(tab, "multiplicity", int, where, problems)
        w = _require(tab, "theta_order", int, where, problems)
        sep = _require(tab, "separable", bool, where, problems, default=True)
        if None not in (cid, mult, w):
            components.append(Component(cid, mult, w, bool(sep)))

    strata = []
    for i, tab in enumerate(tree.get("stratum", []) or []):
        where = "[[stratum]] #%d" % i
        if not isinstance(tab, dict):
            problems.append("%s: must be a table" % where)
            continue
        _check_keys(tab, _STRATUM_KEYS, where, problems)
        comps = _require(tab, "components", list, where, problems)
        coeffs = _require(tab, "count_poly", list, where, problems)
        tdeg = _require(tab, "tdeg", int, where, problems, default=1)
        split = _require(tab, "split_degree", int, where, problems, default=1)
        horiz = _require(tab, "horizontal", bool, where, problems, default=False)
        if comps is not None and not all(isinstance(c, str) for c in comps):
            problems.append("%s: components must be strings" % where)
            comps = None
        if coeffs is not None and not all(isinstance(c, int) and not isinstance(c, bool) for c in coeffs):
            problems.append("%s: count_poly must be a list of integers" % where)
            coeffs = None
        if None not in (comps, coeffs):
            strata.append(Stratum(tuple(comps), CountPoly(tuple(coeffs)), tdeg, split, bool(horiz)))

    if problems:
        raise ModelError(problems)

    model = SncModel(
        name=name,
        dimension=dimension,
        p=p,
        q=q,
        m=mm,
        log_smooth=bool(log_smooth),
        components=tuple(components),
        strata=tuple(strata),
    )
    violations = validate(model)
    if violations:
        raise ModelError(violations)
    return model


def _toml_str(s: str) -> str:
    return '"%s"' % s.replace("\\", "\\\\").replace('"', '\\"')


def serialize_model(m: SncModel) -> str:
    """Canonical TOML form; parse_model(serialize_model(m)) == m."""
    out = ["[model]"]
    out.append("name = %s" % _toml_str(m.name))
    out.append("dimension = %d" % m.dimension)
    out.append("p = %d" % m.p)
    if m.q is not None:
        out.append("q = %d" % m.q)
    out.append("m = %d" % m.m)
    out.append("log_smooth = %s" % ("true" if m.log_smooth else "false"))
    for c in m.components:
        out.append("")
        out.append("[[component]]")
        out.append("id = %s" % _toml_str(c.id))
        out.append("multiplicity = %d" % c.multiplicity)
        out.append("theta_order = %d" % c.theta_order)
        if not c.separable:
            out.append("separable = false")
    for s in m.strata:
        out.append("")
        out.append("[[stratum]]")
        out.append("components = [%s]" % ", ".join(_toml_str(c) for c in s.components))
        out.append("count_poly = [%s]" % ", ".join(str(c) for c in s.count_poly.coeffs))
        if s.tdeg != 1:
            out.append("tdeg = %d" % s.tdeg)
        if s.split_degree != 1:
            out.append("split_degree = %d" % s.split_degree)
        if s.horizontal:
            out.append("horizontal = true")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# fixtures


def _finish(name, dimension, p, q, mm, log_smooth, components, strata) -> SncModel:
    model = SncModel(name, dimension, p, q, mm, log_smooth, tuple(components), tuple(strata))
    violations = validate(model)
    if violations:
        raise ModelError(["fixture %s: %s" % (name, x) for x in violations])
    return model


def builtin_model(name: str, *, p: int, q: int | None = None, n: int | None = None, r: int | None = None) -> SncModel:
    """Built-in fixtures.

    tate_triangle          cycle of three multiplicity-1 components, w = 0.
    kodaira_In (param n>=1) cycle of n multiplicity-1 components, w = 0; n = 1
                            is the self-crossing loop, n = 2 the double node.
    kodaira_Istar (r>=0)   four leaves N=1 w=0, chain of r+1 components N=2 w=-1.
    kodaira_IV             center N=3 w=-1 and three legs N=1 w=0.
    """
    def p1_minus(j):
        # open part of a P1 meeting j marked points: t + 1 - j
        return CountPoly((1 - j, 1))

    one = CountPoly((1,))

    if name == "tate_triangle":
        ids = ["c0", "c1", "c2"]
        comps = [Component(i, 1, 0) for i in ids]
        strata = [Stratum((i,), p1_minus(2)) for i in ids]
        strata += [Stratum((ids[i], ids[(i + 1) % 3]), one) for i in range(3)]
        return _finish("tate_triangle", 1, p, q, 1, True, comps, strata)

    if name == "kodaira_In":
        if n is None or n < 1:
            raise ModelError("kodaira_In requires a cycle length n >= 1")
        ids = ["c%d" % i for i in range(n)]
        comps = [Component(i, 1, 0) for i in ids]
        # every component of the cycle loses two points, even the n=1 loop
        # (both branches of its node) and the n=2 double bond
        strata = [Stratum((i,), p1_minus(2)) for i in ids]
        if n == 1:
            strata.append(Stratum(("c0", "c0"), one))
        elif n == 2:
            strata += [Stratum(("c0", "c1"), one), Stratum(("c0", "c1"), one)]
        else:
            strata += [Stratum((ids[i], ids[(i + 1) % n]), one) for i in range(n)]
        return _finish("kodaira_In_%d" % n, 1, p, q, 1, True, comps, strata)

    if name == "kodaira_Istar":
        if r is None or r < 0:
            raise ModelError("kodaira_Istar requires a chain parameter r >= 0")
        leaves = ["l%d" % i for i in range(4)]
        chain = ["d%d" % i for i in range(r + 1)]
        comps = [Component(i, 1, 0) for i in leaves]
        comps += [Component(i, 2, -1) for i in chain]
        strata = [Stratum((i,), p1_minus(1)) for i in leaves]
        if r == 0:
            strata.append(Stratum(("d0",), p1_minus(4)))  # meets all four leaves
        else:
            strata.append(Stratum(("d0",), p1_minus(3)))
            strata += [Stratum((c,), p1_minus(2)) for c in chain[1:-1]]
            strata.append(Stratum((chain[-1],), p1_minus(3)))
        if r == 0:
            attach = [(leaf, "d0") for leaf in leaves]
        else:
            attach = [(leaf, "d0") for leaf in leaves[:2]]
            attach += [(leaf, chain[-1]) for leaf in leaves[2:]]
        strata += [Stratum(pair, one) for pair in attach]
        strata += [Stratum((chain[i], chain[i + 1]), one) for i in range(r)]
        return _finish("kodaira_Istar_%d" % r, 1, p, q, 1, False, comps, strata)

    if name == "kodaira_IV":
        comps = [Component("z", 3, -1)] + [Component("l%d" % i, 1, 0) for i in range(3)]
        strata = [Stratum(("z",), p1_minus(3))]
        strata += [Stratum(("l%d" % i,), p1_minus(1)) for i in range(3)]
        strata += [Stratum(("l%d" % i, "z"), one) for i in range(3)]
        return _finish("kodaira_IV", 1, p, q, 1, False, comps, strata)

    raise ModelError("unknown builtin model %r" % name)
