"""JSON input formats and TSV/JSON table output.

Malformed input raises :class:`InputError` carrying the file name and the
line of the offending value when it can be located.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .factored import FactoredElement, parse_factored
from .iwasawa import GroupRingElem
from .padic import ExtScalar, PadicError, PadicScalar, format_scalar, inert_modulus, parse_scalar
from .series import SeriesContext, TruncatedSeries
from .structure import FilteredPhiNModule


class InputError(ValueError):
    def __init__(self, message: str, source: str = "<input>", line: int | None = None):
        self.source, self.line = source, line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass
class Document:
    data: object
    text: str
    source: str

    def line_of(self, needle) -> int | None:
        pat = re.escape(json.dumps(needle)) if not isinstance(needle, str) else re.escape(f'"{needle}"')
        m = re.search(pat, self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def fail(self, message: str, key=None):
        raise InputError(message, self.source, self.line_of(key) if key is not None else None)


def load_json(path: str | Path) -> Document:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read file ({exc.strerror})", str(path)) from None
    return loads(text, str(path))


def loads(text: str, source: str = "<input>") -> Document:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg} (column {exc.colno})", source, exc.lineno) from None
    return Document(data, text, source)


def _scalar(value, p: int, prec: int, doc: Document, key) -> PadicScalar:
    try:
        if isinstance(value, bool):
            raise PadicError("booleans are not scalars")
        if isinstance(value, int):
            return PadicScalar.from_int(p, value, prec)
        if isinstance(value, str):
            if "O(" in value:
                return parse_scalar(value, p, prec)
            return PadicScalar.from_fraction(p, Fraction(value), prec)
        raise PadicError(f"cannot read a scalar from {value!r}")
    except (PadicError, ValueError, ZeroDivisionError) as exc:
        doc.fail(f"bad scalar {value!r}: {exc}", key)


def _require(doc: Document, obj, key: str):
    if not isinstance(obj, dict) or key not in obj:
        doc.fail(f"missing field {key!r}", None)
    return obj[key]


def series_from_obj(obj, doc: Document, ctx: SeriesContext, key=None) -> TruncatedSeries:
    """``{"p", "x_trunc", "prec", "coeffs", ["tail"]}`` or a bare list (exact polynomial).

    Without ``x_trunc`` the coefficients define an exact polynomial.  With it,
    the unknown tail is assumed to satisfy v(a_k) >= c - l*log_p(k) where
    ``tail`` = [c, l] defaults to [0, 0].
    """
    if isinstance(obj, list):
        obj = {"coeffs": obj}
    if not isinstance(obj, dict) or "coeffs" not in obj:
        doc.fail("a series needs a 'coeffs' list", key)
    p = obj.get("p", ctx.p)
    prec = obj.get("prec", ctx.prec)
    if p != ctx.p:
        doc.fail(f"series prime {p} differs from --p {ctx.p}", "p")
    if not isinstance(prec, int) or prec < 1:
        doc.fail("prec must be a positive integer", "prec")
    coeffs = obj["coeffs"]
    if not isinstance(coeffs, list):
        doc.fail("coeffs must be a list", "coeffs")
    values = [_scalar(c, p, prec, doc, c) for c in coeffs]
    prec = min([prec] + [v.prec for v in values])
    shift = max((v.shift for v in values), default=0)
    mod = p ** (prec + shift)
    reps = tuple(v.rep * p ** (shift - v.shift) % mod for v in values)
    var = obj.get("var", "x")
    if "x_trunc" in obj:
        m = obj["x_trunc"]
        if not isinstance(m, int) or m < len(coeffs):
            doc.fail("x_trunc must be an integer at least the number of coefficients", "x_trunc")
        reps = reps + (0,) * (m - len(reps))
        tail = tuple(float(x) for x in obj.get("tail", [0, 0]))
        return TruncatedSeries(p, reps, prec, shift, tail, var)
    return TruncatedSeries(p, reps, prec, shift, None, var)


def series_to_obj(f: TruncatedSeries) -> dict:
    out = {"p": f.p, "prec": f.prec, "var": f.var,
           "coeffs": [format_scalar(f.coefficient(k)) for k in range(len(f.coeffs))]}
    if not f.exact:
        out["x_trunc"] = f.x_trunc
        out["tail"] = [round(f.tail[0], 6), round(f.tail[1], 6)]
    return out


def group_ring_from_doc(doc: Document, ctx: SeriesContext, level: int | None = None) -> GroupRingElem:
    obj = doc.data
    n = obj.get("level", level) if isinstance(obj, dict) else None
    if n is None:
        doc.fail("missing field 'level'")
    if level is not None and n != level:
        doc.fail(f"file level {n} differs from --level {level}", "level")
    coeffs = _require(doc, obj, "coeffs")
    if not isinstance(coeffs, dict):
        doc.fail("coeffs must map residues to scalars", "coeffs")
    items = {}
    for a, c in coeffs.items():
        try:
            a_int = int(a)
        except ValueError:
            doc.fail(f"residue {a!r} is not an integer", a)
        if a_int % ctx.p == 0:
            doc.fail(f"residue {a_int} is not a unit modulo {ctx.p}", a)
        items[a_int] = _scalar(c, ctx.p, ctx.prec, doc, a)
    return GroupRingElem.from_dict(ctx.p, n, ctx.prec, items)


def matrix_from_doc(doc: Document, ctx: SeriesContext):
    """Returns (mode, rows).  Factored entries: mapping, product string, 1, or 0/null for zero."""
    obj = doc.data
    mode = _require(doc, obj, "mode")
    rows = _require(doc, obj, "entries")
    if mode not in ("factored", "numeric"):
        doc.fail(f"unknown matrix mode {mode!r}", "mode")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        doc.fail("entries must be a nonempty list of rows", "entries")
    if any(len(r) != len(rows[0]) for r in rows):
        doc.fail("rows have different lengths", "entries")
    out = []
    for r in rows:
        row = []
        for e in r:
            if mode == "factored":
                if e in (0, None):
                    row.append(None)
                    continue
                try:
                    row.append(parse_factored(e))
                except ValueError as exc:
                    doc.fail(str(exc), next(iter(e)) if isinstance(e, dict) and e else e)
            else:
                row.append(series_from_obj(e, doc, ctx))
        out.append(row)
    return mode, out


def _k_element(value, p: int, f: int, prec: int, doc: Document, key):
    if f == 1:
        try:
            if isinstance(value, bool) or not isinstance(value, (int, str)):
                raise ValueError
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            doc.fail(f"bad matrix entry {value!r}", key)
    mod = inert_modulus(p, f)
    parts = value if isinstance(value, list) else [value]
    if len(parts) > f:
        doc.fail(f"entry {value!r} has more than {f} coordinates", key)
    out = ExtScalar.from_int(p, mod, 0, prec)
    gen = ExtScalar.generator(p, mod, prec)
    power = ExtScalar.from_int(p, mod, 1, prec)
    for c in parts:
        try:
            x = Fraction(c)
            if x.denominator % p == 0:
                raise ValueError
        except (ValueError, TypeError):
            doc.fail(f"entry {value!r} must have p-integral coordinates", key)
        out = out + power * x
        power = power * gen
    return out


def module_from_doc(doc: Document, prec: int = 30) -> FilteredPhiNModule:
    obj = doc.data
    if not isinstance(obj, dict):
        doc.fail("module file must be a JSON object")
    p = obj.get("p", 3)
    u = obj.get("u", 4)
    f = obj.get("K_degree", 1)
    weights = _require(doc, obj, "weights")
    if not isinstance(weights, list) or not weights or not all(isinstance(w, int) for w in weights):
        doc.fail("weights must be a nonempty list of integers", "weights")
    d = len(weights)
    if f not in (1, 2):
        doc.fail("K_degree must be 1 or 2", "K_degree")
    mats = {}
    for name in ("phi", "N"):
        m = _require(doc, obj, name)
        if not isinstance(m, list) or len(m) != d or any(not isinstance(r, list) or len(r) != d for r in m):
            doc.fail(f"{name} must be a {d}x{d} matrix", name)
        mats[name] = tuple(tuple(_k_element(x, p, f, prec, doc, name) for x in r) for r in m)
    flags = obj.get("flags", {})
    if not isinstance(flags, dict):
        doc.fail("flags must be an object", "flags")
    try:
        return FilteredPhiNModule(p, u, f, mats["phi"], mats["N"], tuple(weights),
                                  bool(flags.get("no_pj_eigenvalue", False)),
                                  bool(flags.get("V_fixed_trivial", False)),
                                  obj.get("r_star"), obj.get("r"), prec)
    except PadicError as exc:
        doc.fail(str(exc))


# -- output ------------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(records, indent=1, sort_keys=False, default=str) + "\n"
    if not records:
        return ""
    cols: list[str] = []
    for r in records:
        for k in r:
            if k not in cols:
                cols.append(k)
    lines = ["\t".join(cols)]
    for r in records:
        lines.append("\t".join(_cell(r.get(c)) for c in cols))
    return "\n".join(lines) + "\n"


def factored_columns(elements: list[FactoredElement]) -> list[str]:
    from .factored import symbol_key

    return sorted({s for e in elements for s in e}, key=symbol_key)
