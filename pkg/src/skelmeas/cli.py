"""Command line front end: model I/O, experiment sweeps, CSV emission.

Numbers print as exact rationals followed by a 12-digit decimal.  CSV
files are written with the csv module using "\n" line endings, so the
same invocation always produces the same bytes.  Cells that cannot be
exact (interval enclosures of irrational powers) carry a "~" decimal.
Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from fractions import Fraction

from . import acceptance
from .basechange import (
    BaseChangeError,
    ExtensionParams,
    base_change_with_map,
    shilov_boundary,
    volume_scaling_check,
)
from .cone2d import cone_edge_data
from .convergence import (
    BoxPoly,
    WeightedSumSpec,
    convergence_report,
    lemma_sum_bruteforce,
    lemma_sum_closedform,
    simulate_measure,
    tau_integral,
)
from .exactcore import Interval, QExpSum, as_rat, format_decimal, format_rat, qexp_eval
from .langweil import VarietySpec, langweil_limit_check, langweil_sequence
from .measures import face_volume, lebesgue_measure, parse_phi
from .model import ModelError, parse_model, serialize_model
from .skeleton import (
    SkPoint,
    arclength_from,
    edge_length,
    full_complex,
    ks_skeleton,
    lattice_points,
    min_weight,
    temperate_part,
    weight,
)


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting


def _rat_str(x) -> str:
    x = as_rat(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def _mid(v) -> Fraction:
    if isinstance(v, Interval):
        return v.midpoint
    if isinstance(v, tuple):
        return (_mid(v[0]) + _mid(v[1])) / 2
    return as_rat(v)


def _cell(v) -> str:
    """Exact CSV cell when possible, '~decimal' for interval enclosures."""
    if isinstance(v, tuple):
        return "%s..%s" % (_cell(v[0]), _cell(v[1]))
    if isinstance(v, Interval):
        return "~" + format_decimal(v.midpoint, 12)
    return _rat_str(v)


def _cell_dec(v) -> str:
    return format_decimal(_mid(v), 12)


def _fmt(v) -> str:
    """Human-readable value: exact plus decimal, intervals as a pair."""
    if isinstance(v, tuple):
        return "%s .. %s" % (_fmt(v[0]), _fmt(v[1]))
    if isinstance(v, Interval):
        return "approx [%s, %s]" % (
            format_decimal(v.lo, 12),
            format_decimal(v.hi, 12),
        )
    return format_rat(as_rat(v))


def _face_label(model, index: int) -> str:
    return "&".join(model.strata[index].components)


def _point_id(pt) -> str:
    return "%d:%s" % (pt.face_index, "|".join(_rat_str(c) for c in pt.coords))


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


# ---------------------------------------------------------------------------
# argument types


def _range_type(text: str):
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError("expected A..B, got %r" % text)
    a, b = int(m.group(1)), int(m.group(2))
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError("empty or invalid range %r" % text)
    return list(range(a, b + 1))


def _seq_type(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        m = re.fullmatch(r"(\d+)\.\.(\d+)", tok)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            if a < 1 or b < a:
                raise argparse.ArgumentTypeError("invalid range %r" % tok)
            out.extend(range(a, b + 1))
        elif re.fullmatch(r"\d+", tok):
            out.append(int(tok))
        else:
            raise argparse.ArgumentTypeError("expected ints, ranges or commas, got %r" % tok)
    if not out or any(v < 1 for v in out):
        raise argparse.ArgumentTypeError("sequence must be positive")
    return out


def _grid_type(text: str):
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError("expected ExF like 12x12, got %r" % text)
    e, f = int(m.group(1)), int(m.group(2))
    if e < 1 or f < 1:
        raise argparse.ArgumentTypeError("grid sides must be positive")
    return e, f


def _rat_type(text: str):
    try:
        return as_rat(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError("expected a rational like 3/2, got %r" % text) from exc


# ---------------------------------------------------------------------------
# shared loading


def _read(path: str) -> str:
    try:
        with open(path, "r") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError("cannot read %s: %s" % (path, exc)) from exc


def _load_model(path: str):
    return parse_model(_read(path))


def _load_table(path: str) -> dict:
    text = _read(path)
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError("%s: JSON syntax error: %s" % (path, exc)) from exc
    try:
        import tomllib
    except ImportError:  # pragma: no cover
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise CliError("%s: TOML syntax error: %s" % (path, exc)) from exc


def _select_complex(model, which: str):
    if which == "full":
        return full_complex(model)
    if which == "ks":
        return ks_skeleton(model)
    if which == "temperate":
        return temperate_part(model, ks_skeleton(model))
    raise CliError("unknown complex %r" % which)


# ---------------------------------------------------------------------------
# distance to the minimal-weight locus (for Shilov sweeps)


def _ks_distance(model, pt):
    """Arclength from a point to the weight-minimizing skeleton.

    Only looks one face away: exact for points on or adjacent to the
    minimizing locus, which covers every curve fixture; returns None when
    no adjacent path exists.
    """
    ks = ks_skeleton(model)
    if pt.face_index in ks.face_indices:
        return Fraction(0)
    wt_min = min_weight(model)

    def vertex_minimizes(cid):
        try:
            i = model.vertex_stratum_index(cid)
        except KeyError:
            return False
        N = model.multiplicities(model.strata[i])[0]
        return weight(model, SkPoint(i, (Fraction(1, N),))) == wt_min

    s = model.strata[pt.face_index]
    best = None
    if s.size == 1:
        cid = s.components[0]
        for j, t in enumerate(model.strata):
            if t.size != 2 or cid not in t.components:
                continue
            a, b = t.components
            other = b if a == cid else a
            if other != cid and vertex_minimizes(other):
                d = edge_length(model, j)
                best = d if best is None else min(best, d)
    elif s.size == 2:
        for slot in (0, 1):
            if not vertex_minimizes(s.components[slot]):
                continue
            d = arclength_from(model, pt.face_index, pt.coords, 1 - slot)
            best = d if best is None else min(best, d)
    return best


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    try:
        model = parse_model(_read(args.model))
    except ModelError as exc:
        print("invalid: %s" % args.model)
        for line in re.split(r";\s+|\n", str(exc)):
            if line:
                print("  " + line)
        return 1
    print("ok: %s" % model.name)
    print("  dimension %d, p=%d, %d components, %d strata" % (
        model.dimension, model.p, len(model.components), len(model.strata)))
    return 0


def cmd_skeleton(args) -> int:
    model = _load_model(args.model)
    base = ks_skeleton(model) if args.ks else full_complex(model)
    sub = temperate_part(model, base) if args.temperate else base
    label = ("ks" if args.ks else "full") + ("+temperate" if args.temperate else "")
    print("model %s  (dimension %d, p=%d)" % (model.name, model.dimension, model.p))
    print("complex: %s   dimension %d   faces %d" % (label, sub.dimension, len(sub)))
    print("min weight: %s" % format_rat(min_weight(model)))
    for i in sub.face_indices:
        s = model.strata[i]
        N = model.multiplicities(s)
        line = "  [%d] %s  N=%s  dim %d" % (i, _face_label(model, i), N, s.size - 1)
        if s.size >= 2:
            line += "  vol %s" % _rat_str(face_volume(N))
        if s.horizontal:
            line += "  horizontal"
        print(line)
    return 0


def cmd_measure(args) -> int:
    model = _load_model(args.model)
    sub = _select_complex(model, args.complex)
    mu = lebesgue_measure(model, sub, stable=args.stable)
    kind = "stable" if args.stable else "plain"
    print("model %s  complex %s  %s Lebesgue" % (model.name, args.complex, kind))
    if not mu.pieces:
        print("empty measure (no top-dimensional faces)")
        print("total: %s" % format_rat(Fraction(0)))
        return 0
    for f, dens in mu.pieces:
        vol = face_volume(f.multiplicities)
        print("  [%d] %s  density %s  volume %s  mass %s" % (
            f.index, _face_label(model, f.index), _rat_str(dens),
            _rat_str(vol), _rat_str(dens * vol)))
    print("total: %s" % format_rat(mu.total))
    return 0


def cmd_lattice(args) -> int:
    model = _load_model(args.model)
    pts = lattice_points(model, args.e)
    print("model %s  level e=%d  points %d" % (model.name, args.e, len(pts)))
    for pt in pts:
        print("  %s  on %s  weight %s" % (
            _point_id(pt), _face_label(model, pt.face_index),
            _rat_str(weight(model, pt))))
    return 0


def cmd_basechange(args) -> int:
    model = _load_model(args.model)
    target, bmap = base_change_with_map(model, ExtensionParams(args.e, args.f))
    with open(args.output, "w") as fh:
        fh.write(serialize_model(target))
    print("base change e=%d f=%d: %s -> %s" % (args.e, args.f, model.name, target.name))
    print("  components %d -> %d, strata %d -> %d" % (
        len(model.components), len(target.components),
        len(model.strata), len(target.strata)))
    print("  volume scaling e^d exact: %s" % volume_scaling_check(bmap))
    print("  written %s" % args.output)
    return 0


def _shilov_point_rows(model, res, scale):
    rows = []
    for pt in res.points:
        s = model.strata[pt.face_index]
        raw = Fraction(s.tdeg)
        rows.append([
            res.e, 1, _point_id(pt), _face_label(model, pt.face_index),
            "|".join(_rat_str(c) for c in pt.coords),
            _rat_str(weight(model, pt)), s.tdeg,
            _rat_str(raw), _rat_str(raw * scale),
        ])
    return rows


def cmd_shilov(args) -> int:
    if args.gnuplot and not (args.csv and args.sweep):
        raise CliError("--gnuplot requires --sweep and --csv")
    model = _load_model(args.model)
    dim_ks = ks_skeleton(model).dimension
    if args.sweep is None:
        res = shilov_boundary(model, args.e)
        scale = Fraction(1, args.e**dim_ks)
        print("model %s  e=%d  tame=%s" % (model.name, args.e, res.tame))
        if res.ord_min_baseK is None:
            print("no lattice points at this level")
            return 0
        print("min order (base units): %s" % format_rat(res.ord_min_baseK))
        print("min order (extension units): %s" % format_rat(res.ord_min_extension))
        for pt in res.points:
            d = _ks_distance(model, pt)
            extra = "" if d is None else "  distance %s" % _rat_str(d)
            print("  %s  on %s  tdeg %d%s" % (
                _point_id(pt), _face_label(model, pt.face_index),
                model.strata[pt.face_index].tdeg, extra))
        print("raw total: %s" % format_rat(res.measure.total))
        print("scaled total: %s" % format_rat(res.scaled_measure.total))
        if args.csv:
            _write_csv(
                args.csv,
                ["e", "f", "point id", "face", "coords", "weight", "tdeg",
                 "raw mass", "scaled mass"],
                _shilov_point_rows(model, res, scale),
            )
            print("written %s" % args.csv)
        return 0
    rows = []
    print("model %s  sweep e=%d..%d" % (model.name, args.sweep[0], args.sweep[-1]))
    for e in args.sweep:
        res = shilov_boundary(model, e)
        dists = sorted({_ks_distance(model, pt) for pt in res.points}, key=lambda d: (d is None, d))
        dist_cell = ";".join("" if d is None else _rat_str(d) for d in dists)
        dist_dec = "" if not dists or dists[0] is None else format_decimal(dists[0], 12)
        om = res.ord_min_baseK
        total = res.scaled_measure.total
        rows.append([
            e, res.tame, len(res.points),
            "" if om is None else _rat_str(om),
            "" if om is None else format_decimal(om, 12),
            dist_cell, dist_dec,
            _rat_str(total), format_decimal(as_rat(total), 12),
        ])
        print("  e=%2d tame=%-5s points=%d ord_min=%s distance=%s scaled total=%s" % (
            e, res.tame, len(res.points),
            "-" if om is None else _rat_str(om), dist_cell or "-", _rat_str(total)))
    if args.csv:
        _write_csv(
            args.csv,
            ["e", "tame", "points", "ord_min", "ord_min_dec",
             "distance", "distance_dec", "scaled total", "scaled total_dec"],
            rows,
        )
        print("written %s" % args.csv)
        if args.gnuplot:
            script = "\n".join([
                'set datafile separator ","',
                'set xlabel "e"',
                'set ylabel "distance to minimizing locus"',
                "plot '%s' every ::1 using 1:7 with linespoints title 'distance', \\" % args.csv,
                "     '%s' every ::1 using 1:9 with linespoints title 'scaled total'" % args.csv,
                "pause -1",
            ]) + "\n"
            with open(args.gnuplot, "w") as fh:
                fh.write(script)
            print("written %s" % args.gnuplot)
    return 0


def cmd_simulate(args) -> int:
    model = _load_model(args.model)
    sim = simulate_measure(model, ExtensionParams(args.e, args.f), args.q)
    nu = sim.normalized("ks")
    raw_lo, raw_hi = sim.totals()
    nu_lo, nu_hi = nu.totals()

    def show(lo, hi):
        if lo == hi:
            return _fmt(qexp_eval(lo, args.q))
        return _fmt((qexp_eval(lo, args.q), qexp_eval(hi, args.q)))

    print("model %s  e=%d f=%d q=%d  atoms %d" % (
        model.name, args.e, args.f, args.q, len(sim.atoms)))
    print("weight minimum: %s" % format_rat(sim.wt_min))
    print("raw total: %s" % show(raw_lo, raw_hi))
    print("normalized total: %s" % show(nu_lo, nu_hi))
    if args.csv:
        rows = []
        for a_raw, a_nu in zip(sim.atoms, nu.atoms):
            pt = a_raw.point
            s = model.strata[pt.face_index]

            def mass(atom):
                lo = qexp_eval(atom.lower, args.q)
                if atom.lower == atom.upper:
                    return _cell(lo)
                return "%s..%s" % (_cell(lo), _cell(qexp_eval(atom.upper, args.q)))

            rows.append([
                args.e, args.f, _point_id(pt), _face_label(model, pt.face_index),
                "|".join(_rat_str(c) for c in pt.coords),
                _rat_str(weight(model, pt)), s.tdeg, mass(a_raw), mass(a_nu),
            ])
        _write_csv(
            args.csv,
            ["e", "f", "point id", "face", "coords", "weight", "tdeg",
             "raw mass", "normalized mass"],
            rows,
        )
        print("written %s" % args.csv)
    return 0


def cmd_converge(args) -> int:
    model = _load_model(args.model)
    phis = None
    if args.phi:
        phis = parse_phi(_read(args.phi), model)
    rep = convergence_report(model, args.e_seq, args.f_seq, args.q, phis)
    print("model %s  q=%d  target %s  normalization %s" % (
        rep.model_name, rep.q, rep.target_kind, rep.variant))
    if rep.temperate_empty:
        print("temperate part empty: tabulating decay, no limit asserted")
    print("monotone in f: %s   monotone in e: %s" % (rep.monotone_in_f, rep.monotone_in_e))
    grid = rep.distance_grid()
    header = "  e\\f " + "".join("%14d" % f for f in args.f_seq)
    print(header)
    for e in args.e_seq:
        print("  %3d " % e + "".join("%14s" % format_decimal(grid[(e, f)], 6) for f in args.f_seq))
    rows = []
    for c in rep.cells:
        rows.append([
            c.e, c.f, "total", "",
            _cell(c.raw_total), _cell_dec(c.raw_total),
            _cell(c.normalized_total), _cell_dec(c.normalized_total),
            "", "",
            _rat_str(c.distance), format_decimal(c.distance, 12),
        ])
        for name, val, tgt in c.per_phi:
            gap = abs(_mid(val) - tgt)
            rows.append([
                c.e, c.f, "phi", name,
                "", "",
                _cell(val), _cell_dec(val),
                _rat_str(tgt), format_decimal(tgt, 12),
                _cell(gap), _cell_dec(gap),
            ])
    _write_csv(
        args.csv,
        ["e", "f", "row", "name", "raw", "raw_dec", "normalized",
         "normalized_dec", "target", "target_dec", "distance", "distance_dec"],
        rows,
    )
    print("written %s" % args.csv)
    if args.gnuplot:
        terms = []
        for e in args.e_seq:
            terms.append(
                "'%s' every ::1 using 2:((strcol(3) eq \"total\") && ($1 == %d) ? $12 : NaN) "
                "with linespoints title 'e=%d'" % (args.csv, e, e)
            )
        script = "\n".join([
            'set datafile separator ","',
            'set xlabel "f"',
            'set ylabel "distance to target"',
            "set logscale y",
            "plot " + ", \\\n     ".join(terms),
            "pause -1",
        ]) + "\n"
        with open(args.gnuplot, "w") as fh:
            fh.write(script)
        print("written %s" % args.gnuplot)
    return 0


def _spec_from_table(tree: dict) -> WeightedSumSpec:
    unknown = set(tree) - {"box", "alpha", "offsets", "r", "remove_corner", "phi"}
    if unknown:
        raise CliError("unknown spec keys: %s" % ", ".join(sorted(unknown)))
    for key in ("box", "alpha", "offsets"):
        if key not in tree:
            raise CliError("spec needs %r" % key)
    box = tuple((as_rat(Fraction(str(lo))), as_rat(Fraction(str(hi)))) for lo, hi in tree["box"])
    alpha = tuple(as_rat(Fraction(str(v))) for v in tree["alpha"])
    offsets = tuple(as_rat(Fraction(str(v))) for v in tree["offsets"])
    phi = None
    if "phi" in tree:
        tab = tree["phi"]
        bad = set(tab) - {"c0", "coeffs"}
        if bad:
            raise CliError("unknown phi keys: %s" % ", ".join(sorted(bad)))
        c0 = as_rat(Fraction(str(tab.get("c0", 0))))
        coeffs = [as_rat(Fraction(str(v))) for v in tab.get("coeffs", [0] * len(box))]
        if len(coeffs) != len(box):
            raise CliError("phi coeffs must match the box arity")
        phi = BoxPoly.affine(c0, coeffs)
    try:
        return WeightedSumSpec(
            box=box,
            alpha=alpha,
            offsets=offsets,
            phi=phi,
            r=as_rat(Fraction(str(tree.get("r", 2)))),
            remove_tau_corner=bool(tree.get("remove_corner", False)),
        )
    except ValueError as exc:
        raise CliError("invalid spec: %s" % exc) from exc


def cmd_lemma(args) -> int:
    spec = _spec_from_table(_load_table(args.spec))
    tau = tau_integral(spec)
    emax, fmax = args.grid
    print("box dimension %d, r=%s, grid %dx%d" % (len(spec.box), _rat_str(spec.r), emax, fmax))
    print("target integral: %s" % format_rat(tau))
    rows = []
    last_gap = None
    for e in range(1, emax + 1):
        for f in range(1, fmax + 1):
            try:
                s = lemma_sum_closedform(spec, e, f)
            except ValueError:
                s = lemma_sum_bruteforce(spec, e, f)
            val = qexp_eval(s, spec.r) if isinstance(s, QExpSum) else s
            gap = abs(_mid(val) - tau)
            last_gap = gap
            rows.append([
                e, f, _cell(val), _cell_dec(val),
                _rat_str(tau), format_decimal(tau, 12), format_decimal(gap, 12),
            ])
    _write_csv(
        args.csv,
        ["e", "f", "sum", "sum_dec", "tau", "tau_dec", "gap_dec"],
        rows,
    )
    print("gap at (%d,%d): %s" % (emax, fmax, format_decimal(last_gap, 12)))
    print("written %s" % args.csv)
    return 0


def cmd_cone2d(args) -> int:
    try:
        edge = cone_edge_data((args.v1x, args.v1y), (args.v2x, args.v2y), (args.wx, args.wy))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    print("root index: %d" % edge.root_index)
    print("multiplicities: N1=%d N2=%d" % (edge.n1, edge.n2))
    print("det: %d" % edge.det)
    print("length: %s" % format_rat(edge.length))
    return 0


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def cmd_count(args) -> int:
    texts = list(args.poly) + ([args.exclude] if args.exclude else [])
    if args.vars:
        variables = tuple(v.strip() for v in args.vars.split(","))
    else:
        variables = tuple(sorted({m.group(0) for t in texts for m in _IDENT.finditer(t)}))
    if not variables:
        raise CliError("no variables found; pass --vars")
    try:
        v = VarietySpec.from_text(
            variables,
            tuple(args.poly),
            mode="projective" if args.projective else "affine",
            exclude=args.exclude,
            dim=args.dim,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    seq = langweil_sequence(v, args.p, args.m_range)
    print("variables %s, %d polynomial(s), mode %s, dimension %d" % (
        ",".join(variables), len(args.poly), v.mode, v.dim))
    for row in seq:
        print("  m=%d q^m=%d count=%d normalized=%s" % (
            row.m, row.field_size, row.count, format_rat(row.normalized)))
    if args.csv:
        _write_csv(
            args.csv,
            ["m", "q^m", "count", "normalized"],
            [[r.m, r.field_size, r.count, _rat_str(r.normalized)] for r in seq],
        )
        print("written %s" % args.csv)
    if args.cz is not None:
        C = args.limit_C if args.limit_C is not None else Fraction(2)
        ok = langweil_limit_check(seq, args.cz, C)
        print("limit check (c_Z=%d, C=%s): %s" % (args.cz, _rat_str(C), "PASS" if ok else "FAIL"))
    return 0


def cmd_accept(args) -> int:
    results = acceptance.run_all(args.only)
    for r in results:
        print("%s  criterion %2d  (%.2fs of %ds)  %s" % (
            "PASS" if r.ok else "FAIL", r.number, r.elapsed, r.budget, r.title))
        print("      %s" % r.detail)
    good = sum(1 for r in results if r.ok)
    print("%d/%d criteria passed" % (good, len(results)))
    return 0 if good == len(results) else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skelmeas",
        description="exact skeleta, weights and residual measures for weighted dual complexes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file against the invariants")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("skeleton", help="list the faces of a skeleton")
    p.add_argument("model")
    p.add_argument("--ks", action="store_true", help="minimal-weight skeleton")
    p.add_argument("--temperate", action="store_true", help="temperate part of the chosen complex")
    p.set_defaults(func=cmd_skeleton)

    p = sub.add_parser("measure", help="Lebesgue measure of a subcomplex")
    p.add_argument("model")
    p.add_argument("--stable", action="store_true", help="weight faces by tame degree")
    p.add_argument("--complex", choices=("ks", "full", "temperate"), default="full")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("lattice", help="level-e lattice points")
    p.add_argument("model")
    p.add_argument("-e", type=int, required=True)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("basechange", help="subdivided model after ramified base change")
    p.add_argument("model")
    p.add_argument("-e", type=int, required=True)
    p.add_argument("-f", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_basechange)

    p = sub.add_parser("shilov", help="minimal-order lattice points and their measures")
    p.add_argument("model")
    p.add_argument("-e", type=int, default=1)
    p.add_argument("--sweep", type=_range_type, help="E1..E2 summary sweep")
    p.add_argument("--csv")
    p.add_argument("--gnuplot", help="write a gnuplot script next to --csv (sweep only)")
    p.set_defaults(func=cmd_shilov)

    p = sub.add_parser("simulate", help="reduction masses of the level-e lattice")
    p.add_argument("model")
    p.add_argument("-e", type=int, required=True)
    p.add_argument("-f", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converge", help="distance-to-target report over an (e,f) grid")
    p.add_argument("model")
    p.add_argument("--e-seq", type=_seq_type, required=True)
    p.add_argument("--f-seq", type=_seq_type, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--phi", help="TOML file of test functions")
    p.add_argument("--csv", required=True)
    p.add_argument("--gnuplot", help="write a gnuplot script for the distance curves")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("lemma", help="weighted lattice sums of a box spec on a grid")
    p.add_argument("--spec", required=True)
    p.add_argument("--grid", type=_grid_type, required=True)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_lemma)

    p = sub.add_parser("cone2d", help="edge data of a 2d monomial cone")
    for name in ("v1x", "v1y", "v2x", "v2y", "wx", "wy"):
        p.add_argument(name, type=int)
    p.set_defaults(func=cmd_cone2d)

    p = sub.add_parser("count", help="finite-field point counts over a tower")
    p.add_argument("--poly", action="append", required=True, help="repeatable")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("--m-range", type=_range_type, required=True)
    p.add_argument("--projective", action="store_true")
    p.add_argument("--exclude")
    p.add_argument("--vars", help="comma list; default: identifiers in the input, sorted")
    p.add_argument("--dim", type=int)
    p.add_argument("--cz", type=int, help="run the component-count limit check")
    p.add_argument("--limit-C", type=_rat_type, help="constant for the limit check (default 2)")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("accept", help="run the built-in acceptance experiments")
    p.add_argument("--only", type=int, choices=sorted(acceptance.CRITERIA))
    p.set_defaults(func=cmd_accept)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return 1
    except BaseChangeError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
