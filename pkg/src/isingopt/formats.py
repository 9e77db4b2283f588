"""Instance file formats: ``ising-json``, ``bilp-json`` and ``lp-text``.

lp-text is a small LP-like language. Statements end with ``;`` and ``#`` or
``//`` start a comment::

    max: 3 a + 2 b + 4 c;          # objective (min/max), constants allowed
    cap: 2 a + 3 b + 4 c <= 6;     # optional label
    a + b >= 1;
    bin a, b;                      # every variable must be declared
    int c in [0, 3];

Variables are numbered in declaration order.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import IsingOptError, ParseError
from .ising import IsingModel
from .reduction import BilpInstance, Constraint

__all__ = ["FORMAT_VERSION", "FORMATS", "parse_instance", "dumps_instance", "detect_format"]

FORMAT_VERSION = 1
FORMATS = ("bilp-json", "ising-json", "lp-text")


def detect_format(path: str, text: str) -> str:
    if path.endswith((".lp", ".lpt", ".txt")):
        return "lp-text"
    try:
        doc = json.loads(text)
    except ValueError:
        return "lp-text"
    if isinstance(doc, dict) and "num_spins" in doc:
        return "ising-json"
    return "bilp-json"


def parse_instance(text: str, format: str):
    if format == "ising-json":
        return _parse_ising_json(text)
    if format == "bilp-json":
        return _parse_bilp_json(text)
    if format == "lp-text":
        return _LpParser(text).parse()
    raise ParseError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")


def dumps_instance(obj, format: str) -> str:
    if format == "ising-json":
        return _dump_ising_json(obj)
    if format == "bilp-json":
        return _dump_bilp_json(obj)
    if format == "lp-text":
        return _dump_lp(obj)
    raise ValueError(f"unknown format {format!r}")


# --- JSON -----------------------------------------------------------------


def _reject_constant(name):
    raise ParseError(f"non-finite number {name}")


def _load_json(text: str):
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object", 1, 1)
    version = doc.get("format_version")
    if version is None:
        raise ParseError("missing format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version!r} (this build reads {FORMAT_VERSION})")
    return doc


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ParseError(f"{where}: non-finite number")
    return v


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{where}: expected an integer, got {v!r}")
    return v


def _list(v, where: str) -> list:
    if not isinstance(v, list):
        raise ParseError(f"{where}: expected a list")
    return v


def _parse_ising_json(text: str) -> IsingModel:
    doc = _load_json(text)
    n = _int(doc.get("num_spins"), "num_spins")
    if n < 0:
        raise ParseError("num_spins: must be non-negative")
    seen = set()
    triples = []
    for k, item in enumerate(_list(doc.get("couplings", []), "couplings")):
        where = f"couplings[{k}]"
        if not isinstance(item, list) or len(item) != 3:
            raise ParseError(f"{where}: expected [i, j, J]")
        i, j = _int(item[0], where), _int(item[1], where)
        val = _num(item[2], where)
        if i == j:
            raise ParseError(f"{where}: self-coupling on spin {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"{where}: index out of range [0, {n})")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ParseError(f"{where}: duplicate coupling pair {{{key[0]}, {key[1]}}}")
        seen.add(key)
        triples.append((i, j, val))
    fields = doc.get("fields")
    if fields is None:
        fields = [0.0] * n
    fields = [_num(v, f"fields[{k}]") for k, v in enumerate(_list(fields, "fields"))]
    if len(fields) != n:
        raise ParseError(f"fields: expected {n} entries, got {len(fields)}")
    offset = _num(doc.get("offset", 0.0), "offset")
    return IsingModel(n, triples, fields, offset)


def _dump_ising_json(model: IsingModel) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "num_spins": model.num_spins,
        "couplings": [[i, j, v] for (i, j), v in sorted(model.couplings.items())],
        "fields": [float(v) for v in model.fields],
        "offset": model.offset,
    }
    return json.dumps(doc, indent=1) + "\n"


def _parse_bilp_json(text: str) -> BilpInstance:
    doc = _load_json(text)
    n = _int(doc.get("num_vars"), "num_vars")
    obj = [_num(v, f"objective[{k}]") for k, v in enumerate(_list(doc.get("objective"), "objective"))]
    if len(obj) != n:
        raise ParseError(f"objective: expected {n} entries, got {len(obj)}")
    cons = []
    for k, c in enumerate(_list(doc.get("constraints", []), "constraints")):
        where = f"constraints[{k}]"
        if not isinstance(c, dict):
            raise ParseError(f"{where}: expected an object")
        pairs = []
        seen = set()
        for m, item in enumerate(_list(c.get("coeffs", []), f"{where}.coeffs")):
            w2 = f"{where}.coeffs[{m}]"
            if not isinstance(item, list) or len(item) != 2:
                raise ParseError(f"{w2}: expected [i, s]")
            i = _int(item[0], w2)
            if not 0 <= i < n:
                raise ParseError(f"{w2}: unknown variable index {i}")
            if i in seen:
                raise ParseError(f"{w2}: variable {i} repeated")
            seen.add(i)
            pairs.append((i, _num(item[1], w2)))
        sense = c.get("sense")
        if sense not in ("=", "<=", ">="):
            raise ParseError(f"{where}.sense: expected '=', '<=' or '>=', got {sense!r}")
        cons.append(Constraint(tuple(pairs), sense, _num(c.get("rhs"), f"{where}.rhs"), c.get("name")))
    bounds = doc.get("bounds")
    if bounds is not None:
        bl = []
        for k, b in enumerate(_list(bounds, "bounds")):
            if not isinstance(b, list) or len(b) != 2:
                raise ParseError(f"bounds[{k}]: expected [lo, hi]")
            bl.append((_int(b[0], f"bounds[{k}]"), _int(b[1], f"bounds[{k}]")))
        bounds = tuple(bl)
    kinds = doc.get("kinds")
    if kinds is not None:
        kinds = tuple(_list(kinds, "kinds"))
        if bounds is None and any(k != "binary" for k in kinds):
            raise ParseError("bounds: required when any kind is not binary")
    elif bounds is not None:
        kinds = tuple("binary" if b == (0, 1) else "integer" for b in bounds)
    names = doc.get("names")
    direction = doc.get("sense", "minimize")
    if direction not in ("minimize", "maximize"):
        raise ParseError(f"sense: expected 'minimize' or 'maximize', got {direction!r}")
    offset = _num(doc.get("objective_offset", 0.0), "objective_offset")
    if direction == "maximize":
        obj = [-v for v in obj]
        offset = -offset
    try:
        return BilpInstance(
            n, tuple(obj), tuple(cons), bounds=bounds, kinds=kinds, objective_offset=offset,
            names=None if names is None else tuple(names), maximize=direction == "maximize",
        )
    except IsingOptError as exc:
        raise ParseError(str(exc)) from None


def _user_objective(inst: BilpInstance) -> tuple[list[float], float]:
    """Objective as the user wrote it (undoes the maximize negation)."""
    if inst.maximize:
        return [0.0 - v for v in inst.objective], 0.0 - inst.objective_offset
    return list(inst.objective), inst.objective_offset


def _dump_bilp_json(inst: BilpInstance) -> str:
    obj, offset = _user_objective(inst)
    doc = {
        "format_version": FORMAT_VERSION,
        "sense": "maximize" if inst.maximize else "minimize",
        "num_vars": inst.num_vars,
        "objective": obj,
        "objective_offset": offset,
        "constraints": [
            {"coeffs": [[i, s] for i, s in c.coeffs], "sense": c.sense, "rhs": c.rhs,
             **({"name": c.name} if c.name is not None else {})}
            for c in inst.constraints
        ],
        "bounds": [list(b) for b in inst.bounds],
        "kinds": list(inst.kinds),
    }
    if inst.names is not None:
        doc["names"] = list(inst.names)
    return json.dumps(doc, indent=1) + "\n"


# --- lp-text ----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*|//[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|=<|=>|[-+*:;,=\[\]])
  """,
    re.VERBOSE,
)
_KEYWORDS = {"min", "max", "minimize", "maximize", "int", "bin", "in"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "id" and tok.lower() in _KEYWORDS:
                kind = "kw"
                tok = tok.lower()
            out.append(_Tok(kind, tok, line, pos - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rfind("\n") + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - line_start + 1))
    return out


class _LpParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def number(self) -> float:
        tok = self.next()
        sign = 1.0
        if tok.kind == "op" and tok.text in ("+", "-"):
            sign = -1.0 if tok.text == "-" else 1.0
            tok = self.next()
        if tok.kind != "num":
            self.error(f"expected a number, found {tok.text or 'end of input'!r}", tok)
        v = sign * float(tok.text)
        if not math.isfinite(v):
            self.error("non-finite number", tok)
        return v

    def integer(self) -> int:
        tok = self.peek()
        v = self.number()
        if not v.is_integer():
            self.error("expected an integer bound", tok)
        return int(v)

    def expr(self):
        """Linear expression -> (list of (name, coeff, token), constant)."""
        terms, const = [], 0.0
        first = True
        while True:
            tok = self.peek()
            sign = 1.0
            if tok.kind == "op" and tok.text in ("+", "-"):
                sign = -1.0 if tok.text == "-" else 1.0
                self.next()
                tok = self.peek()
            elif not first:
                break
            first = False
            coef = None
            if tok.kind == "num":
                coef = float(self.next().text)
                if not math.isfinite(coef):
                    self.error("non-finite number", tok)
                if self.peek().text == "*":
                    self.next()
                tok = self.peek()
            if tok.kind == "id":
                self.next()
                terms.append((tok.text, sign * (1.0 if coef is None else coef), tok))
            elif coef is not None:
                const += sign * coef
            else:
                self.error(f"expected a term, found {tok.text or 'end of input'!r}", tok)
        return terms, const

    def parse(self) -> BilpInstance:
        objective = None
        raw_cons = []
        decls: dict[str, tuple[int, int, str]] = {}
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "kw" and tok.text in ("min", "max", "minimize", "maximize"):
                self.next()
                self.expect(":")
                if objective is not None:
                    self.error("objective declared twice", tok)
                objective = (tok.text.startswith("max"), *self.expr())
            elif tok.kind == "kw" and tok.text == "bin":
                self.next()
                while True:
                    name_tok = self.next()
                    if name_tok.kind != "id":
                        self.error("expected a variable name", name_tok)
                    self._declare(decls, name_tok, 0, 1, "binary")
                    if self.peek().text != ",":
                        break
                    self.next()
            elif tok.kind == "kw" and tok.text == "int":
                self.next()
                name_tok = self.next()
                if name_tok.kind != "id":
                    self.error("expected a variable name", name_tok)
                self.expect("in")
                self.expect("[")
                lo = self.integer()
                self.expect(",")
                hi = self.integer()
                self.expect("]")
                if lo > hi:
                    self.error(f"empty range [{lo}, {hi}]", name_tok)
                self._declare(decls, name_tok, lo, hi, "integer")
            else:
                label = None
                if tok.kind == "id" and self.peek(1).text == ":":
                    label = tok.text
                    self.next()
                    self.next()
                left, lconst = self.expr()
                op = self.next()
                sense = {"<=": "<=", "=<": "<=", ">=": ">=", "=>": ">=", "=": "="}.get(op.text)
                if sense is None:
                    self.error(f"expected '<=', '>=' or '=', found {op.text or 'end of input'!r}", op)
                right, rconst = self.expr()
                terms = left + [(n, -c, t) for n, c, t in right]
                raw_cons.append((label, terms, sense, rconst - lconst))
            self.expect(";")
        names = list(decls)
        index = {n: k for k, n in enumerate(names)}

        def resolve(terms):
            out: dict[int, float] = {}
            for name, c, tok in terms:
                if name not in index:
                    self.error(f"unknown variable {name!r} (declare it with 'bin' or 'int')", tok)
                k = index[name]
                out[k] = out.get(k, 0.0) + c
            return out

        obj = [0.0] * len(names)
        offset = 0.0
        maximize = False
        if objective is not None:
            maximize, terms, offset = objective
            for k, c in resolve(terms).items():
                obj[k] = c
        cons = []
        for label, terms, sense, rhs in raw_cons:
            cons.append(Constraint(tuple(resolve(terms).items()), sense, rhs, label))
        return BilpInstance.build(
            obj, cons,
            bounds=[decls[n][:2] for n in names],
            kinds=[decls[n][2] for n in names],
            maximize=maximize, names=names, objective_offset=offset,
        )

    def _declare(self, decls, tok, lo, hi, kind):
        if tok.text in decls:
            self.error(f"variable {tok.text!r} declared twice", tok)
        decls[tok.text] = (lo, hi, kind)


def _fmt(v: float) -> str:
    return repr(float(v))


def _dump_expr(pairs) -> str:
    parts = []
    for k, (name, c) in enumerate(pairs):
        if c < 0 or (c == 0 and math.copysign(1.0, c) < 0):
            parts.append(("- " if k else "-") + f"{_fmt(-c)} {name}")
        else:
            parts.append(("+ " if k else "") + f"{_fmt(c)} {name}")
    return " ".join(parts) if parts else "0"


def _dump_lp(inst: BilpInstance) -> str:
    names = inst.names or tuple(f"x{k}" for k in range(inst.num_vars))
    obj, offset = _user_objective(inst)
    lines = []
    expr = _dump_expr([(names[k], c) for k, c in enumerate(obj)])
    if offset != 0.0:
        expr += (" - " if offset < 0 else " + ") + _fmt(abs(offset))
    lines.append(f"{'max' if inst.maximize else 'min'}: {expr};")
    for c in inst.constraints:
        label = f"{c.name}: " if c.name else ""
        lines.append(f"{label}{_dump_expr([(names[i], s) for i, s in c.coeffs])} {c.sense} {_fmt(c.rhs)};")
    for k in range(inst.num_vars):
        if inst.kinds[k] == "binary":
            lines.append(f"bin {names[k]};")
        else:
            lo, hi = inst.bounds[k]
            lines.append(f"int {names[k]} in [{lo}, {hi}];")
    return "\n".join(lines) + "\n"
