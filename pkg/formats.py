"""
Formats
Canonical UTF-8 text for workspaces of named spaces, chain complexes, sheaves, kernels
and stop configurations. Matrices are written as exact fractions, row by row.
"""

import logging
import re
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple, Union

from errors import ParseError, PreconditionError, ValidationError
from linalg import ChainMap, Complex, FieldConfig, Matrix
from posets import FacePoset, SimplicialComplex, face_poset, product_poset
from sheaves import Sheaf
from utils import Utils
from wrap1d import BASE_KINDS, CODIRECTIONS, StopConfig

logger = logging.getLogger(__name__)

FORMAT_NAME = "sheafcalc"
FORMAT_VERSION = 1

_VERTEX = re.compile(r"^[A-Za-z0-9_.]+$")
_INTEGER = re.compile(r"^-?[0-9]+$")


@dataclass
class Workspace:
    """Named objects sharing one coefficient field; names are unique across kinds"""

    field: FieldConfig = dataclass_field(default_factory=FieldConfig)
    budgets: Dict[str, int] = dataclass_field(default_factory=dict)
    spaces: Dict[str, SimplicialComplex] = dataclass_field(default_factory=dict)
    complexes: Dict[str, Complex] = dataclass_field(default_factory=dict)
    sheaves: Dict[str, Sheaf] = dataclass_field(default_factory=dict)
    kernels: Dict[str, Sheaf] = dataclass_field(default_factory=dict)
    stops: Dict[str, StopConfig] = dataclass_field(default_factory=dict)
    bases: Dict[str, Tuple[str, ...]] = dataclass_field(default_factory=dict)
    _posets: Dict[str, FacePoset] = dataclass_field(default_factory=dict, repr=False)

    def names(self) -> List[str]:
        return [*self.spaces, *self.complexes, *self.sheaves, *self.kernels, *self.stops]

    def _claim(self, name: str):
        if not _VERTEX.match(name):
            raise ValidationError(f"object names use letters, digits, '_' and '.': {name!r}")
        if name in self.names():
            raise ValidationError(f"duplicate object name {name!r}")

    def poset(self, name: str) -> FacePoset:
        if name not in self.spaces:
            raise PreconditionError(f"no space named {name!r}")
        if name not in self._posets:
            self._posets[name] = face_poset(self.spaces[name])
        return self._posets[name]

    def base_poset(self, names: Sequence[str]) -> FacePoset:
        return product_poset(*[self.poset(n) for n in names])

    def add_space(self, name: str, K: SimplicialComplex):
        self._claim(name)
        self.spaces[name] = K

    def add_complex(self, name: str, C: Complex):
        self._claim(name)
        self.complexes[name] = C

    def add_sheaf(self, name: str, F: Sheaf, base: str):
        self._claim(name)
        if F.base != self.poset(base):
            raise PreconditionError(f"sheaf {name} does not live on {base}")
        self.sheaves[name] = F
        self.bases[name] = (base,)

    def add_kernel(self, name: str, K: Sheaf, source: str, target: str):
        self._claim(name)
        if K.base != self.base_poset([source, target]):
            raise PreconditionError(f"kernel {name} does not live on {source} x {target}")
        self.kernels[name] = K
        self.bases[name] = (source, target)

    def add_stops(self, name: str, cfg: StopConfig):
        self._claim(name)
        self.stops[name] = cfg

    def get(self, name: str) -> Any:
        for table in (self.spaces, self.complexes, self.sheaves, self.kernels, self.stops):
            if name in table:
                return table[name]
        raise PreconditionError(f"no object named {name!r}")


def _format_vertex(v: Hashable) -> str:
    text = str(v)
    if isinstance(v, bool) or not isinstance(v, (int, str)) or not _VERTEX.match(text):
        raise PreconditionError(f"vertex {v!r} cannot be written: labels use letters, digits, '_' and '.'")
    return text


def _format_matrix(field_config: FieldConfig, M: Matrix) -> str:
    return ";".join(",".join(field_config.format(x) for x in row) for row in M.to_rows())


def _format_coordinate(x: Fraction) -> str:
    return str(x)


def _serialize_space(name: str, K: SimplicialComplex) -> List[str]:
    lines = [f"space {name}", "vertices " + " ".join(_format_vertex(v) for v in K.vertices)]
    for s in K.simplices:
        if len(s) < 2:
            continue
        if K.link_vertices(s):
            continue
        lines.append("simplex " + "-".join(_format_vertex(v) for v in s))
    for v in K.vertices:
        if v in K.coordinates:
            lines.append(f"coordinate {_format_vertex(v)} " + ",".join(_format_coordinate(x) for x in K.coordinates[v]))
    lines.append("end")
    return lines


def _serialize_chain(name: str, C: Complex) -> List[str]:
    lines = [f"chain {name}", f"dims {Utils.format_graded(C.dims)}"]
    for n in sorted(C.d):
        lines.append(f"d {n} {_format_matrix(C.field, C.d[n])}")
    lines.append("end")
    return lines


def _serialize_sheaf(keyword: str, name: str, F: Sheaf, bases: Sequence[str]) -> List[str]:
    base = F.base
    lines = [f"{keyword} {name} on {' '.join(bases)}"]
    for s in base.elements:
        C = F.value(s)
        if C.is_zero():
            continue
        lines.append(f"stalk {base.label(s)} {Utils.format_graded(C.dims)}")
        for n in sorted(C.d):
            lines.append(f"d {base.label(s)} {n} {_format_matrix(F.field, C.d[n])}")
    for s, t in base.covering_pairs():
        rho = F.restriction(s, t)
        for n in sorted(rho.components):
            lines.append(f"res {base.label(s)} {base.label(t)} {n} {_format_matrix(F.field, rho.components[n])}")
    lines.append("end")
    return lines


def format_stop_config(cfg: StopConfig) -> str:
    return cfg.label()


def serialize_workspace(ws: Workspace) -> str:
    """Canonical text: header, field, budgets, then objects kind by kind in insertion order"""
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}", f"field {ws.field.label}"]
    for key, value in ws.budgets.items():
        lines.append(f"budget {key} {value}")
    for name, K in ws.spaces.items():
        lines.extend(_serialize_space(name, K))
    for name, C in ws.complexes.items():
        lines.extend(_serialize_chain(name, C))
    for name, F in ws.sheaves.items():
        lines.extend(_serialize_sheaf("sheaf", name, F, ws.bases[name]))
    for name, K in ws.kernels.items():
        lines.extend(_serialize_sheaf("kernel", name, K, ws.bases[name]))
    for name, cfg in ws.stops.items():
        lines.append(f"stops {name} {format_stop_config(cfg)}")
    return "\n".join(lines) + "\n"


class _Token:
    __slots__ = ("text", "line", "column")

    def __init__(self, text: str, line: int, column: int):
        self.text = text
        self.line = line
        self.column = column

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.column)


class _Parser:
    """Line-oriented reader; every error carries the line and column of the offending token"""

    def __init__(self, text: str):
        self.lines: List[List[_Token]] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            tokens = [_Token(m.group(), number, m.start() + 1) for m in re.finditer(r"\S+", raw)]
            if tokens and not tokens[0].text.startswith("#"):
                self.lines.append(tokens)
        self.position = 0
        self.last_line = len(text.splitlines())
        self.ws = Workspace()

    def next_line(self, inside: str) -> List[_Token]:
        if self.position >= len(self.lines):
            raise ParseError(f"unexpected end of input inside {inside}", self.last_line + 1, 1)
        tokens = self.lines[self.position]
        self.position += 1
        return tokens

    @staticmethod
    def expect(tokens: List[_Token], count: int, usage: str):
        if len(tokens) < count:
            last = tokens[-1]
            raise ParseError(f"expected: {usage}", last.line, last.column + len(last.text))
        if len(tokens) > count:
            raise tokens[count].error(f"unexpected token {tokens[count].text!r}; expected: {usage}")

    @staticmethod
    def integer(token: _Token) -> int:
        if not _INTEGER.match(token.text):
            raise token.error(f"expected an integer, got {token.text!r}")
        return int(token.text)

    def scalar(self, token: _Token, text: str):
        try:
            value = Fraction(text)
            self.ws.field(value)
        except (ValueError, ZeroDivisionError):
            raise token.error(f"not an exact fraction: {text!r}")
        except PreconditionError as e:
            raise token.error(str(e))
        return value

    def matrix(self, token: _Token, rows: int, cols: int) -> Matrix:
        data = [row.split(",") for row in token.text.split(";")]
        if len(data) != rows or any(len(row) != cols for row in data):
            raise token.error(f"matrix should be {rows}x{cols}")
        return Matrix.from_rows(self.ws.field, [[self.scalar(token, x) for x in row] for row in data], cols)

    @staticmethod
    def graded(tokens: Sequence[_Token]) -> Dict[int, int]:
        text = " ".join(t.text for t in tokens)
        try:
            return Utils.parse_graded(text)
        except ValueError:
            raise tokens[0].error(f"expected graded dimensions like '0:1 1:2', got {text!r}")

    @staticmethod
    def vertex(token: _Token, text: str) -> Hashable:
        if not _VERTEX.match(text):
            raise token.error(f"bad vertex label {text!r}")
        return int(text) if _INTEGER.match(text) else text

    def parse(self) -> Workspace:
        if not self.lines:
            raise ParseError("empty input: missing header", 1, 1)
        header = self.next_line("header")
        if header[0].text != FORMAT_NAME:
            raise header[0].error(f"expected header '{FORMAT_NAME} {FORMAT_VERSION}'")
        self.expect(header, 2, f"{FORMAT_NAME} {FORMAT_VERSION}")
        if self.integer(header[1]) != FORMAT_VERSION:
            raise header[1].error(f"unsupported format version {header[1].text}")
        while self.position < len(self.lines):
            tokens = self.next_line("workspace")
            keyword = tokens[0].text
            handler = {
                "field": self.parse_field,
                "budget": self.parse_budget,
                "space": self.parse_space,
                "chain": self.parse_chain,
                "sheaf": self.parse_sheaf,
                "kernel": self.parse_sheaf,
                "stops": self.parse_stops,
            }.get(keyword)
            if handler is None:
                raise tokens[0].error(f"unknown section {keyword!r}")
            handler(tokens)
        return self.ws

    def parse_field(self, tokens):
        self.expect(tokens, 2, "field q|fp:<p>")
        if self.ws.names():
            raise tokens[0].error("the field must be set before any object")
        try:
            self.ws.field = FieldConfig.parse(tokens[1].text)
        except PreconditionError as e:
            raise tokens[1].error(str(e))

    def parse_budget(self, tokens):
        self.expect(tokens, 3, "budget <key> <value>")
        self.ws.budgets[tokens[1].text] = self.integer(tokens[2])

    def claim(self, token: _Token, add, *args):
        try:
            add(token.text, *args)
        except ValidationError as e:
            raise token.error(str(e))

    def parse_space(self, tokens):
        self.expect(tokens, 2, "space <name>")
        vertices: Optional[List[Hashable]] = None
        simplices, coordinates = [], {}
        while True:
            line = self.next_line(f"space {tokens[1].text}")
            keyword = line[0].text
            if keyword == "end":
                self.expect(line, 1, "end")
                break
            if keyword == "vertices":
                vertices = [self.vertex(t, t.text) for t in line[1:]]
            elif keyword == "simplex":
                self.expect(line, 2, "simplex <v>-<v>-...")
                simplices.append((line[1], [self.vertex(line[1], v) for v in line[1].text.split("-")]))
            elif keyword == "coordinate":
                self.expect(line, 3, "coordinate <vertex> <x>,<y>,...")
                try:
                    point = tuple(Fraction(x) for x in line[2].text.split(","))
                except (ValueError, ZeroDivisionError):
                    raise line[2].error(f"coordinates must be exact fractions, got {line[2].text!r}")
                coordinates[self.vertex(line[1], line[1].text)] = point
            else:
                raise line[0].error(f"unknown space entry {keyword!r}")
        if vertices is None:
            raise tokens[0].error(f"space {tokens[1].text} has no vertices line")
        try:
            K = SimplicialComplex(vertices, [], coordinates)
        except ValidationError as e:
            raise tokens[1].error(str(e))
        for token, s in simplices:
            try:
                K.normalize(s)
            except ValidationError as e:
                raise token.error(str(e))
        self.claim(tokens[1], self.ws.add_space, SimplicialComplex(vertices, [s for _, s in simplices], coordinates))

    def parse_chain(self, tokens):
        self.expect(tokens, 2, "chain <name>")
        dims: Dict[int, int] = {}
        diffs: List[Tuple[_Token, int, _Token]] = []
        while True:
            line = self.next_line(f"chain {tokens[1].text}")
            keyword = line[0].text
            if keyword == "end":
                self.expect(line, 1, "end")
                break
            if keyword == "dims":
                dims = self.graded(line[1:]) if len(line) > 1 else {}
            elif keyword == "d":
                self.expect(line, 3, "d <degree> <matrix>")
                diffs.append((line[1], self.integer(line[1]), line[2]))
            else:
                raise line[0].error(f"unknown chain entry {keyword!r}")
        d = {n: self.matrix(token, dims.get(n + 1, 0), dims.get(n, 0)) for _, n, token in diffs}
        try:
            C = Complex(self.ws.field, dims, d)
        except ValidationError as e:
            raise ValidationError(f"chain {tokens[1].text} (line {tokens[0].line}): {e}")
        self.claim(tokens[1], self.ws.add_complex, C)

    def parse_sheaf(self, tokens):
        keyword, name = tokens[0].text, tokens[1].text if len(tokens) > 1 else ""
        arity = 1 if keyword == "sheaf" else 2
        self.expect(tokens, 3 + arity, f"{keyword} <name> on " + " ".join(["<space>"] * arity))
        if tokens[2].text != "on":
            raise tokens[2].error("expected 'on'")
        space_names = [t.text for t in tokens[3:]]
        for t in tokens[3:]:
            if t.text not in self.ws.spaces:
                raise t.error(f"no space named {t.text!r}")
        base = self.ws.base_poset(space_names)
        labels = {base.label(s): s for s in base.elements}

        def element(token: _Token):
            if token.text not in labels:
                raise token.error(f"no stratum labelled {token.text!r}")
            return labels[token.text]

        dims: Dict[Hashable, Dict[int, int]] = {}
        diffs: Dict[Hashable, Dict[int, _Token]] = {}
        res: Dict[Tuple[Hashable, Hashable], Dict[int, _Token]] = {}
        while True:
            line = self.next_line(f"{keyword} {name}")
            entry = line[0].text
            if entry == "end":
                self.expect(line, 1, "end")
                break
            if entry == "stalk":
                if len(line) < 3:
                    self.expect(line, 3, "stalk <stratum> <degree>:<dim> ...")
                dims[element(line[1])] = self.graded(line[2:])
            elif entry == "d":
                self.expect(line, 4, "d <stratum> <degree> <matrix>")
                diffs.setdefault(element(line[1]), {})[self.integer(line[2])] = line[3]
            elif entry == "res":
                self.expect(line, 5, "res <stratum> <face> <degree> <matrix>")
                s, t = element(line[1]), element(line[2])
                if t not in base.covers_above(s):
                    raise line[2].error(f"{line[2].text} is not a codimension-one face of {line[1].text}")
                res.setdefault((s, t), {})[self.integer(line[3])] = line[4]
            else:
                raise line[0].error(f"unknown {keyword} entry {entry!r}")
        values = {}
        for s in base.elements:
            graded = dims.get(s, {})
            d = {n: self.matrix(tok, graded.get(n + 1, 0), graded.get(n, 0)) for n, tok in diffs.get(s, {}).items()}
            try:
                values[s] = Complex(self.ws.field, graded, d)
            except ValidationError as e:
                raise ValidationError(f"{keyword} {name}, stalk {base.label(s)}: {e}")
        restrictions = {}
        for (s, t), comps in res.items():
            mats = {n: self.matrix(tok, values[s].dim(n), values[t].dim(n)) for n, tok in comps.items()}
            try:
                restrictions[(s, t)] = ChainMap(values[t], values[s], mats)
            except ValidationError as e:
                raise ValidationError(f"{keyword} {name}, restriction {base.label(t)} -> {base.label(s)}: {e}")
        try:
            F = Sheaf(base, self.ws.field, values, restrictions)
        except ValidationError as e:
            raise ValidationError(f"{keyword} {name}: {e}")
        if keyword == "sheaf":
            self.claim(tokens[1], self.ws.add_sheaf, F, space_names[0])
        else:
            self.claim(tokens[1], self.ws.add_kernel, F, space_names[0], space_names[1])

    def parse_stops(self, tokens):
        if len(tokens) < 2:
            self.expect(tokens, 2, "stops <name> <kind> <codirections>... grid <m>")
        cfg = parse_stop_config(tokens[2:], tokens[1])
        self.claim(tokens[1], self.ws.add_stops, cfg)


def parse_stop_config(tokens: Union[str, Sequence[_Token]], anchor: Optional[_Token] = None) -> StopConfig:
    """'circle +- + grid 3': kind, one codirection set per marked point ('.' for none), grid steps"""
    if isinstance(tokens, str):
        tokens = [_Token(m.group(), 1, m.start() + 1) for m in re.finditer(r"\S+", tokens)]
    if not tokens:
        raise (anchor or _Token("", 1, 1)).error("expected a stop configuration")
    kind = tokens[0]
    if kind.text not in BASE_KINDS:
        raise kind.error(f"unknown base {kind.text!r}, expected one of {', '.join(BASE_KINDS)}")
    stops, grid = [], 3
    rest = list(tokens[1:])
    while rest:
        token = rest.pop(0)
        if token.text == "grid":
            if len(rest) != 1:
                raise token.error("'grid' takes exactly one integer and ends the configuration")
            grid = _Parser.integer(rest.pop(0))
            break
        if token.text == ".":
            stops.append(frozenset())
        elif set(token.text) <= set(CODIRECTIONS) and len(set(token.text)) == len(token.text):
            stops.append(frozenset(token.text))
        else:
            raise token.error(f"codirections are written '+', '-', '+-' or '.', got {token.text!r}")
    try:
        return StopConfig(kind.text, tuple(stops), grid)
    except PreconditionError as e:
        raise kind.error(str(e))


def parse_workspace(text: str) -> Workspace:
    """Parse canonical text; syntax errors raise ParseError, invariant violations ValidationError"""
    ws = _Parser(text).parse()
    logger.info(f"parsed workspace with {len(ws.names())} objects over {ws.field.label}")
    return ws


def load_workspace(path: Union[str, Path]) -> Workspace:
    text = Path(path).read_text(encoding="utf-8")
    return parse_workspace(text)


def save_workspace(ws: Workspace, path: Union[str, Path]):
    Path(path).write_text(serialize_workspace(ws), encoding="utf-8", newline="\n")
