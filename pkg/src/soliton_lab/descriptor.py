"""Reader for ``.manifold`` descriptor files.

A descriptor is an INI-style document; expressions are written verbatim
in the expression language and need no quoting.  Example::

    [manifold]
    name = bent-warped
    kind = warped            ; metric | immersion | warped
    box = s: 0.5 .. 3

    [warped]
    f = sin(s)
    fiber = sphere-metric?k=2&r=1

    [soliton]
    lambda = 1

Sections by kind:

``[metric]``      ``row1 = g11, g12, ...`` through ``rowN`` (symmetric).
``[immersion]``   ``components = phi1, phi2, ...`` (ambient coordinates).
``[warped]``      ``f`` in ``s`` and a ``fiber`` given as a round-sphere
                  target ``sphere-metric?k=K&r=R``; the box, if given,
                  lists only ``s`` (default ``s: 0.5 .. 3``) and the fiber
                  chart comes from the fiber.
``[potential]``   ``components = v1, v2, ...`` and ``concurrent = yes|no``
                  (metric kind; immersions use the tangential position
                  field and warped products ``s d/ds``).
``[soliton]``     optional ``lambda`` (fitted when absent, immersions
                  only) and ``origin = o1, o2, ...`` (immersions).

Any problem is reported as one :class:`DescriptorError` carrying the file
and line.
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

from . import geometry as geo
from .catalog import (DEFAULT_MARGIN, CatalogEntry, CatalogError, _immersion_entry,
                      make_round_sphere, make_warped_product, parse_target)
from .charts import Chart, ChartError
from .exprlang import ExprError, parse
from .submanifold import Immersion, ImmersionError

KINDS = ("metric", "immersion", "warped")
SECTIONS = {"manifold", "metric", "immersion", "warped", "potential", "soliton"}
_BOX_ITEM = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*:\s*(\S+)\s*\.\.\s*(\S+)\s*$")


class DescriptorError(ValueError):
    def __init__(self, message, path=None, line=None):
        self.path, self.line = path, line
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


class _Doc:
    def __init__(self, text, path):
        self.path = path
        self.lines = text.splitlines()
        cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=(";",), interpolation=None,
                                       strict=True, empty_lines_in_values=False)
        cp.optionxform = str
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as err:
            raise DescriptorError(_configparser_message(err), path,
                                  getattr(err, "lineno", None)) from None
        self.cp = cp
        for sec in cp.sections():
            if sec not in SECTIONS:
                raise DescriptorError(f"unknown section [{sec}]", path, self.line_of(sec))

    def line_of(self, section, key=None):
        cur = None
        for no, raw in enumerate(self.lines, 1):
            s = raw.strip()
            if s.startswith("[") and s.endswith("]"):
                cur = s[1:-1].strip()
                if key is None and cur == section:
                    return no
            elif cur == section and key is not None:
                if s.split("=", 1)[0].strip() == key and "=" in s:
                    return no
        return None

    def error(self, message, section, key=None):
        return DescriptorError(message, self.path, self.line_of(section, key))

    def get(self, section, key, default=None, required=False):
        if self.cp.has_option(section, key):
            return self.cp.get(section, key).strip()
        if required:
            raise DescriptorError(f"missing key '{key}' in [{section}]", self.path,
                                  self.line_of(section) if self.cp.has_section(section) else None)
        return default

    def keys(self, section):
        return list(self.cp.options(section)) if self.cp.has_section(section) else []


def _configparser_message(err):
    msg = getattr(err, "message", str(err)).splitlines()[0]
    return msg.replace("\n", " ")


def _split(text):
    return [part.strip() for part in text.replace("\n", ",").split(",") if part.strip()]


def _expr(doc, section, key, source, coords):
    try:
        return parse(source, coords)
    except ExprError as err:
        raise doc.error(f"[{section}] {key}: {err.kind} error: {err}", section, key) from None


def _float(doc, section, key, text):
    try:
        return float(text)
    except ValueError:
        raise doc.error(f"[{section}] {key}: expected a number, got {text!r}", section, key) from None


def _box(doc, text, coords):
    spec = {}
    for item in filter(None, (p.strip() for p in text.split(";"))):
        m = _BOX_ITEM.match(item)
        if not m:
            raise doc.error(f"box entry {item!r} must read 'name: lo .. hi'", "manifold", "box")
        name = m.group(1)
        if name in spec:
            raise doc.error(f"box lists {name} twice", "manifold", "box")
        spec[name] = (_float(doc, "manifold", "box", m.group(2)),
                      _float(doc, "manifold", "box", m.group(3)))
    missing = [c for c in coords if c not in spec]
    extra = [c for c in spec if c not in coords]
    if missing or extra:
        raise doc.error(f"box must cover exactly the coordinates {coords}"
                        + (f"; missing {missing}" if missing else "")
                        + (f"; unknown {extra}" if extra else ""), "manifold", "box")
    try:
        return Chart.box([(c, *spec[c]) for c in coords])
    except ChartError as err:
        raise doc.error(str(err), "manifold", "box") from None


def _yes(doc, section, key, text):
    t = text.lower()
    if t in ("yes", "true", "1", "on"):
        return True
    if t in ("no", "false", "0", "off"):
        return False
    raise doc.error(f"[{section}] {key}: expected yes or no, got {text!r}", section, key)


def load(path) -> CatalogEntry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise DescriptorError(f"cannot read descriptor: {err}", path) from None
    return loads(text, path)


def loads(text, path="<descriptor>") -> CatalogEntry:
    doc = _Doc(text, path)
    if not doc.cp.has_section("manifold"):
        raise DescriptorError("missing [manifold] section", path, None)
    name = doc.get("manifold", "name", Path(str(path)).stem)
    kind = doc.get("manifold", "kind", required=True)
    if kind not in KINDS:
        raise doc.error(f"kind must be one of {', '.join(KINDS)}, got {kind!r}", "manifold", "kind")
    margin = _float(doc, "manifold", "margin", doc.get("manifold", "margin", str(DEFAULT_MARGIN)))
    if not 0 <= margin < 0.5:
        raise doc.error(f"margin must lie in [0, 0.5), got {margin}", "manifold", "margin")
    lam_text = doc.get("soliton", "lambda")
    lam = None if lam_text is None else _float(doc, "soliton", "lambda", lam_text)
    try:
        if kind == "warped":
            entry = _warped(doc, name)
        else:
            coords = _split(doc.get("manifold", "coords", required=True))
            if not coords:
                raise doc.error("coords must name at least one coordinate", "manifold", "coords")
            for c in coords:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", c):
                    raise doc.error(f"invalid coordinate name {c!r}", "manifold", "coords")
            if len(set(coords)) != len(coords):
                raise doc.error("duplicate coordinate names", "manifold", "coords")
            chart = _box(doc, doc.get("manifold", "box", required=True), coords)
            entry = (_metric(doc, name, coords, chart) if kind == "metric"
                     else _immersion(doc, name, coords, chart))
    except (CatalogError, ImmersionError, ValueError) as err:
        if isinstance(err, DescriptorError):
            raise
        raise DescriptorError(str(err), path, None) from None
    if lam is None and kind == "metric":
        raise doc.error("metric descriptors need [soliton] lambda", "soliton")
    if lam is None and kind == "warped" and entry.lam is None:
        lam = 1.0
    return _replace(entry, lam=lam if lam is not None else entry.lam, margin=margin)


def _replace(entry, **kw):
    from dataclasses import replace
    return replace(entry, **kw)


def _metric(doc, name, coords, chart):
    n = len(coords)
    rows = []
    for i in range(n):
        key = f"row{i + 1}"
        src = doc.get("metric", key, required=True)
        parts = _split(src)
        if len(parts) != n:
            raise doc.error(f"{key} needs {n} entries, got {len(parts)}", "metric", key)
        rows.append([_expr(doc, "metric", key, s, coords) for s in parts])
    extra = [k for k in doc.keys("metric") if k not in {f"row{i + 1}" for i in range(n)}]
    if extra:
        raise doc.error(f"unknown key '{extra[0]}' in [metric]", "metric", extra[0])
    try:
        metric = geo.ExprMetric(rows, coords, chart)
    except ValueError as err:
        raise doc.error(str(err), "metric") from None
    potential, concurrent = None, False
    if doc.cp.has_section("potential"):
        comps = _split(doc.get("potential", "components", required=True))
        if len(comps) != n:
            raise doc.error(f"potential needs {n} components, got {len(comps)}",
                            "potential", "components")
        exprs = [_expr(doc, "potential", "components", s, coords) for s in comps]
        potential = geo.ExprVectorField(exprs, coords)
        concurrent = _yes(doc, "potential", "concurrent",
                          doc.get("potential", "concurrent", "no"))
    else:
        raise doc.error("metric descriptors need a [potential] section", "manifold")
    return CatalogEntry(
        name=name, family="descriptor", kind="metric", params={}, chart=chart, metric=metric,
        potential=potential, description=f"metric descriptor {name}", concurrent=concurrent,
    )


def _immersion(doc, name, coords, chart):
    comps = _split(doc.get("immersion", "components", required=True))
    exprs = [_expr(doc, "immersion", "components", s, coords) for s in comps]
    if len(exprs) < len(coords):
        raise doc.error(f"immersion needs at least {len(coords)} components",
                        "immersion", "components")
    origin = doc.get("soliton", "origin")
    if origin is not None:
        origin = [_float(doc, "soliton", "origin", t) for t in _split(origin)]
        if len(origin) != len(exprs):
            raise doc.error(f"origin needs {len(exprs)} entries", "soliton", "origin")
    try:
        imm = Immersion(exprs, coords, chart, origin)
    except (ImmersionError, ValueError) as err:
        raise doc.error(str(err), "immersion", "components") from None
    return _immersion_entry(name, "descriptor", {}, imm, f"immersion descriptor {name}",
                            concurrent=False)


def _warped(doc, name):
    f = doc.get("warped", "f", required=True)
    fexpr = _expr(doc, "warped", "f", f, ["s"])
    fiber = doc.get("warped", "fiber", "sphere-metric?k=2&r=1")
    fam, params = parse_target(fiber)
    if fam != "sphere-metric" or set(params) - {"k", "r"}:
        raise doc.error(f"fiber must read 'sphere-metric?k=K&r=R', got {fiber!r}", "warped", "fiber")
    try:
        fib = make_round_sphere(int(params.get("k", 2)), float(params.get("r", 1)))
    except ValueError as err:
        raise doc.error(str(err), "warped", "fiber") from None
    lo, hi = 0.5, 3.0
    box = doc.get("manifold", "box")
    if box is not None:
        chart = _box(doc, box, ["s"])
        lo, hi = chart.lo[0], chart.hi[0]
    entry = make_warped_product(fexpr, fib, (lo, hi))
    return _replace(entry, name=name, family="descriptor")
