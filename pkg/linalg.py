"""
Exact Linear Algebra
Field configuration, sparse exact matrices, bounded cochain complexes, chain maps
and homotopy (co)limits over finite posets
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from sympy import isprime
from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix

from errors import PreconditionError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldConfig:
    """Coefficient field: exact rationals ("q") or a prime field ("fp")"""

    kind: str = "q"
    prime: Optional[int] = None

    def __post_init__(self):
        if self.kind == "q":
            if self.prime is not None:
                raise PreconditionError("rational field takes no prime")
        elif self.kind == "fp":
            if self.prime is None or not isprime(self.prime):
                raise PreconditionError(f"fp needs a prime characteristic, got {self.prime}")
        else:
            raise PreconditionError(f"unknown field kind: {self.kind}")

    @classmethod
    def parse(cls, text: str) -> "FieldConfig":
        """Parse 'q' or 'fp:<p>'"""
        text = text.strip()
        if text == "q":
            return cls("q")
        if text.startswith("fp:"):
            try:
                return cls("fp", int(text[3:]))
            except ValueError:
                raise PreconditionError(f"bad prime in field spec: {text}")
        raise PreconditionError(f"unknown field spec: {text}")

    @property
    def label(self) -> str:
        return "q" if self.kind == "q" else f"fp:{self.prime}"

    @cached_property
    def domain(self):
        return QQ if self.kind == "q" else GF(self.prime, symmetric=False)

    @property
    def zero(self):
        return self.domain.zero

    @property
    def one(self):
        return self.domain.one

    def __call__(self, value: Any):
        """Convert an int, Fraction, 'a/b' string or sympy Rational to a field element"""
        if isinstance(value, str):
            value = Fraction(value)
        if hasattr(value, "p") and hasattr(value, "q"):
            value = Fraction(int(value.p), int(value.q))
        if isinstance(value, int):
            value = Fraction(value)
        if not isinstance(value, Fraction):
            return value
        K = self.domain
        if self.kind == "q":
            return K(value.numerator, value.denominator)
        if value.denominator % self.prime == 0:
            raise PreconditionError(f"{value} is not defined in {self.label}")
        return K(value.numerator) / K(value.denominator)

    def format(self, x) -> str:
        if self.kind == "fp":
            return str(int(x) % self.prime)
        num, den = int(x.numerator), int(x.denominator)
        return str(num) if den == 1 else f"{num}/{den}"

    def sign(self, exponent: int):
        return self.one if exponent % 2 == 0 else -self.one


Rows = Dict[int, Dict[int, Any]]


class Matrix:
    """Sparse exact matrix; acts on column vectors"""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: FieldConfig, rows: int, cols: int, data: Optional[Rows] = None):
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data: Rows = {}
        zero = field.zero
        for i, row in (data or {}).items():
            kept = {j: v for j, v in row.items() if v != zero}
            if kept:
                self.data[i] = kept

    @classmethod
    def zeros(cls, field: FieldConfig, rows: int, cols: int) -> "Matrix":
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field: FieldConfig, n: int) -> "Matrix":
        return cls(field, n, n, {i: {i: field.one} for i in range(n)})

    @classmethod
    def from_rows(cls, field: FieldConfig, rows: Sequence[Sequence[Any]], cols: Optional[int] = None) -> "Matrix":
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        data = {i: {j: field(v) for j, v in enumerate(row)} for i, row in enumerate(rows)}
        return cls(field, len(rows), ncols, data)

    @classmethod
    def from_entries(cls, field: FieldConfig, rows: int, cols: int,
                     entries: Iterable[Tuple[int, int, Any]]) -> "Matrix":
        """Build from (i, j, value) triples, summing repeated positions"""
        data: Rows = {}
        for i, j, v in entries:
            row = data.setdefault(i, {})
            row[j] = row.get(j, field.zero) + v
        return cls(field, rows, cols, data)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def entry(self, i: int, j: int):
        return self.data.get(i, {}).get(j, self.field.zero)

    def is_zero(self) -> bool:
        return not self.data

    def entries(self) -> Iterable[Tuple[int, int, Any]]:
        for i in sorted(self.data):
            for j in sorted(self.data[i]):
                yield i, j, self.data[i][j]

    def columns(self) -> Dict[int, List[Tuple[int, Any]]]:
        """Nonzero entries grouped by column: {j: [(i, v), ...]}"""
        out: Dict[int, List[Tuple[int, Any]]] = {}
        for i, j, v in self.entries():
            out.setdefault(j, []).append((i, v))
        return out

    def to_rows(self) -> List[List[Any]]:
        zero = self.field.zero
        return [[self.data.get(i, {}).get(j, zero) for j in range(self.cols)] for i in range(self.rows)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.shape, tuple((i, j, str(v)) for i, j, v in self.entries())))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, nnz={sum(len(r) for r in self.data.values())})"

    def _check_same_shape(self, other: "Matrix"):
        if self.shape != other.shape:
            raise ValidationError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        data = {i: dict(r) for i, r in self.data.items()}
        for i, row in other.data.items():
            target = data.setdefault(i, {})
            for j, v in row.items():
                target[j] = target.get(j, self.field.zero) + v
        return Matrix(self.field, self.rows, self.cols, data)

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, self.rows, self.cols,
                      {i: {j: -v for j, v in r.items()} for i, r in self.data.items()})

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def scale(self, c) -> "Matrix":
        return Matrix(self.field, self.rows, self.cols,
                      {i: {j: c * v for j, v in r.items()} for i, r in self.data.items()})

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValidationError(f"cannot multiply {self.shape} by {other.shape}")
        data: Rows = {}
        for i, row in self.data.items():
            acc: Dict[int, Any] = {}
            for k, a in row.items():
                for j, b in other.data.get(k, {}).items():
                    acc[j] = acc.get(j, self.field.zero) + a * b
            data[i] = acc
        return Matrix(self.field, self.rows, other.cols, data)

    def transpose(self) -> "Matrix":
        data: Rows = {}
        for i, row in self.data.items():
            for j, v in row.items():
                data.setdefault(j, {})[i] = v
        return Matrix(self.field, self.cols, self.rows, data)

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product, row-major: (A⊗B)[(i,k),(j,l)] = A[i,j]·B[k,l]"""
        data: Rows = {}
        for i, row in self.data.items():
            for j, a in row.items():
                for k, orow in other.data.items():
                    target = data.setdefault(i * other.rows + k, {})
                    for l, b in orow.items():
                        target[j * other.cols + l] = a * b
        return Matrix(self.field, self.rows * other.rows, self.cols * other.cols, data)

    def submatrix(self, row_ids: Sequence[int], col_ids: Sequence[int]) -> "Matrix":
        col_pos = {c: n for n, c in enumerate(col_ids)}
        data: Rows = {}
        for n, i in enumerate(row_ids):
            row = self.data.get(i)
            if row:
                data[n] = {col_pos[j]: v for j, v in row.items() if j in col_pos}
        return Matrix(self.field, len(row_ids), len(col_ids), data)

    def hstack(self, *others: "Matrix") -> "Matrix":
        data = {i: dict(r) for i, r in self.data.items()}
        offset = self.cols
        for m in others:
            if m.rows != self.rows:
                raise ValidationError("hstack row mismatch")
            for i, row in m.data.items():
                data.setdefault(i, {}).update({j + offset: v for j, v in row.items()})
            offset += m.cols
        return Matrix(self.field, self.rows, offset, data)

    def vstack(self, *others: "Matrix") -> "Matrix":
        data = {i: dict(r) for i, r in self.data.items()}
        offset = self.rows
        for m in others:
            if m.cols != self.cols:
                raise ValidationError("vstack column mismatch")
            for i, row in m.data.items():
                data[i + offset] = dict(row)
            offset += m.rows
        return Matrix(self.field, offset, self.cols, data)

    def _domain_matrix(self) -> DomainMatrix:
        return DomainMatrix({i: dict(r) for i, r in self.data.items()}, self.shape, self.field.domain)

    def rank(self) -> int:
        if self.is_zero():
            return 0
        return self._domain_matrix().rank()

    def rref(self) -> Tuple["Matrix", Tuple[int, ...]]:
        """Reduced row echelon form with first-nonzero-column pivoting"""
        if self.is_zero():
            return Matrix.zeros(self.field, self.rows, self.cols), ()
        reduced, pivots = self._domain_matrix().rref()
        sdm = reduced.to_sparse().rep
        return Matrix(self.field, self.rows, self.cols, {i: dict(r) for i, r in sdm.items()}), tuple(pivots)

    def kernel(self) -> "Matrix":
        """Basis of the null space as columns, one per free column of the rref"""
        reduced, pivots = self.rref()
        free = [j for j in range(self.cols) if j not in set(pivots)]
        entries = []
        for n, f in enumerate(free):
            entries.append((f, n, self.field.one))
            for r, p in enumerate(pivots):
                v = reduced.entry(r, f)
                if v != self.field.zero:
                    entries.append((p, n, -v))
        return Matrix.from_entries(self.field, self.cols, len(free), entries)


def block_matrix(field: FieldConfig, row_sizes: Sequence[int], col_sizes: Sequence[int],
                 blocks: Iterable[Tuple[int, int, Matrix]]) -> Matrix:
    """Assemble a block matrix; repeated block positions are summed"""
    row_off = [0]
    for s in row_sizes:
        row_off.append(row_off[-1] + s)
    col_off = [0]
    for s in col_sizes:
        col_off.append(col_off[-1] + s)
    entries = []
    for bi, bj, m in blocks:
        if m.shape != (row_sizes[bi], col_sizes[bj]):
            raise ValidationError(f"block ({bi},{bj}) has shape {m.shape}, "
                                  f"expected {(row_sizes[bi], col_sizes[bj])}")
        for i, j, v in m.entries():
            entries.append((row_off[bi] + i, col_off[bj] + j, v))
    return Matrix.from_entries(field, row_off[-1], col_off[-1], entries)


class Complex:
    """Bounded cochain complex; d[n]: C^n -> C^{n+1}"""

    def __init__(self, field: FieldConfig, dims: Dict[int, int], d: Optional[Dict[int, Matrix]] = None,
                 validate: bool = True):
        self.field = field
        self.dims = {n: k for n, k in dims.items() if k > 0}
        self.d: Dict[int, Matrix] = {}
        for n, m in (d or {}).items():
            if m.shape != (self.dim(n + 1), self.dim(n)):
                raise ValidationError(f"differential d^{n} has shape {m.shape}, "
                                      f"expected {(self.dim(n + 1), self.dim(n))}")
            if not m.is_zero():
                self.d[n] = m
        if validate:
            self.validate()

    @classmethod
    def zero(cls, field: FieldConfig) -> "Complex":
        return cls(field, {})

    @classmethod
    def concentrated(cls, field: FieldConfig, dim: int, degree: int = 0) -> "Complex":
        return cls(field, {degree: dim})

    @classmethod
    def unit(cls, field: FieldConfig) -> "Complex":
        return cls(field, {0: 1})

    def validate(self):
        for n in self.d:
            if n + 1 in self.d and not (self.d[n + 1] @ self.d[n]).is_zero():
                raise ValidationError(f"d^{n + 1} d^{n} != 0 (degrees {n} -> {n + 2})")

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def degrees(self) -> List[int]:
        return sorted(self.dims)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def diff(self, n: int) -> Matrix:
        if n in self.d:
            return self.d[n]
        return Matrix.zeros(self.field, self.dim(n + 1), self.dim(n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Complex):
            return NotImplemented
        return self.dims == other.dims and self.d == other.d

    def __hash__(self):
        return hash((tuple(sorted(self.dims.items())), tuple(sorted((n, hash(m)) for n, m in self.d.items()))))

    def __repr__(self):
        return f"Complex({dict(sorted(self.dims.items()))})"

    def is_zero(self) -> bool:
        return not self.dims

    def shift(self, n: int) -> "Complex":
        """C[n]^k = C^{k+n}, d_{C[n]} = (-1)^n d_C"""
        s = self.field.sign(n)
        return Complex(self.field, {k - n: v for k, v in self.dims.items()},
                       {k - n: m.scale(s) for k, m in self.d.items()}, validate=False)

    def cohomology(self) -> Dict[int, int]:
        """Graded dimensions of H^n, nonzero entries only"""
        ranks = {n: m.rank() for n, m in self.d.items()}
        out = {}
        for n, k in self.dims.items():
            h = k - ranks.get(n, 0) - ranks.get(n - 1, 0)
            if h:
                out[n] = h
        return out

    def cohomology_basis(self, n: int) -> Tuple[Matrix, Matrix]:
        """Cycles Z^n (columns) and boundaries B^n (columns) in C^n"""
        cycles = self.diff(n).kernel()
        boundaries = self.diff(n - 1)
        return cycles, boundaries

    def is_acyclic(self) -> bool:
        return not self.cohomology()


def direct_sum(field: FieldConfig, parts: Sequence[Complex]) -> Complex:
    degrees = sorted({n for c in parts for n in c.dims})
    dims = {n: sum(c.dim(n) for c in parts) for n in degrees}
    d = {}
    for n in degrees:
        blocks = [(i, i, c.diff(n)) for i, c in enumerate(parts)]
        d[n] = block_matrix(field, [c.dim(n + 1) for c in parts], [c.dim(n) for c in parts], blocks)
    return Complex(field, dims, d, validate=False)


class ChainMap:
    """Degree-preserving map of complexes, commuting exactly with differentials"""

    def __init__(self, source: Complex, target: Complex, components: Optional[Dict[int, Matrix]] = None,
                 validate: bool = True):
        self.source = source
        self.target = target
        self.field = source.field
        self.components: Dict[int, Matrix] = {}
        for n, m in (components or {}).items():
            if m.shape != (target.dim(n), source.dim(n)):
                raise ValidationError(f"chain map component {n} has shape {m.shape}, "
                                      f"expected {(target.dim(n), source.dim(n))}")
            if not m.is_zero():
                self.components[n] = m
        if validate:
            self.validate()

    def component(self, n: int) -> Matrix:
        if n in self.components:
            return self.components[n]
        return Matrix.zeros(self.field, self.target.dim(n), self.source.dim(n))

    def validate(self):
        for n in set(self.source.dims) | set(self.target.dims):
            lhs = self.target.diff(n) @ self.component(n)
            rhs = self.component(n + 1) @ self.source.diff(n)
            if lhs != rhs:
                raise ValidationError(f"chain map does not commute with d in degree {n}")

    @classmethod
    def identity(cls, c: Complex) -> "ChainMap":
        return cls(c, c, {n: Matrix.identity(c.field, k) for n, k in c.dims.items()}, validate=False)

    @classmethod
    def zero(cls, source: Complex, target: Complex) -> "ChainMap":
        return cls(source, target, {}, validate=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(tuple(sorted((n, hash(m)) for n, m in self.components.items())))

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self ∘ first"""
        comps = {n: self.component(n) @ first.component(n) for n in first.source.dims}
        return ChainMap(first.source, self.target, comps, validate=False)

    def __add__(self, other: "ChainMap") -> "ChainMap":
        degrees = set(self.components) | set(other.components)
        return ChainMap(self.source, self.target,
                        {n: self.component(n) + other.component(n) for n in degrees}, validate=False)

    def scale(self, c) -> "ChainMap":
        return ChainMap(self.source, self.target,
                        {n: m.scale(c) for n, m in self.components.items()}, validate=False)

    def shift(self, n: int) -> "ChainMap":
        return ChainMap(self.source.shift(n), self.target.shift(n),
                        {k - n: m for k, m in self.components.items()}, validate=False)

    def is_zero(self) -> bool:
        return not self.components

    def cohomology_rank(self, n: int) -> int:
        """Rank of the induced map H^n(source) -> H^n(target)"""
        cycles = self.source.diff(n).kernel()
        if cycles.cols == 0:
            return 0
        boundaries = self.target.diff(n - 1)
        image = self.component(n) @ cycles
        return image.hstack(boundaries).rank() - boundaries.rank()

    def cohomology_ranks(self) -> Dict[int, int]:
        out = {}
        for n in self.source.degrees():
            r = self.cohomology_rank(n)
            if r:
                out[n] = r
        return out

    def is_quasi_isomorphism(self) -> bool:
        return cone(self).is_acyclic()


def direct_sum_map(maps: Sequence[ChainMap]) -> ChainMap:
    field = maps[0].field
    src = direct_sum(field, [f.source for f in maps])
    tgt = direct_sum(field, [f.target for f in maps])
    comps = {}
    for n in src.dims:
        comps[n] = block_matrix(field, [f.target.dim(n) for f in maps], [f.source.dim(n) for f in maps],
                                [(i, i, f.component(n)) for i, f in enumerate(maps)])
    return ChainMap(src, tgt, comps, validate=False)


def cone(f: ChainMap) -> Complex:
    """cone(f)^n = D^n ⊕ C^{n+1}, d = [[d_D, f^{n+1}], [0, -d_C^{n+1}]]"""
    field = f.field
    C, D = f.source, f.target
    degrees = sorted(set(D.dims) | {n - 1 for n in C.dims})
    dims = {n: D.dim(n) + C.dim(n + 1) for n in degrees}
    d = {}
    for n in degrees:
        rows = [D.dim(n + 1), C.dim(n + 2)]
        cols = [D.dim(n), C.dim(n + 1)]
        d[n] = block_matrix(field, rows, cols, [
            (0, 0, D.diff(n)), (0, 1, f.component(n + 1)), (1, 1, -C.diff(n + 1))])
    return Complex(field, dims, d, validate=False)


def cone_inclusion(f: ChainMap) -> ChainMap:
    """D -> cone(f)"""
    target = cone(f)
    comps = {n: block_matrix(f.field, [f.target.dim(n), f.source.dim(n + 1)], [f.target.dim(n)],
                             [(0, 0, Matrix.identity(f.field, f.target.dim(n)))]) for n in f.target.dims}
    return ChainMap(f.target, target, comps, validate=False)


def cone_map(f: ChainMap, g: ChainMap, a: ChainMap, b: ChainMap) -> ChainMap:
    """Map cone(f) -> cone(g) induced by a strictly commuting square b∘f = g∘a"""
    src, tgt = cone(f), cone(g)
    comps = {}
    for n in src.dims:
        comps[n] = block_matrix(f.field, [g.target.dim(n), g.source.dim(n + 1)],
                                [f.target.dim(n), f.source.dim(n + 1)],
                                [(0, 0, b.component(n)), (1, 1, a.component(n + 1))])
    return ChainMap(src, tgt, comps, validate=False)


def fiber(f: ChainMap) -> Complex:
    return cone(f).shift(-1)


def hom_complex(C: Complex, D: Complex) -> Complex:
    """Hom^n = ∏_i Hom(C^i, D^{i+n}) as row-major vec, dφ = d_D φ - (-1)^n φ d_C"""
    field = C.field
    pairs = {}
    for i in C.dims:
        for j in D.dims:
            pairs.setdefault(j - i, []).append(i)
    degrees = sorted(pairs)

    def layout(n):
        return [(i, D.dim(i + n) * C.dim(i)) for i in sorted(pairs.get(n, []))]

    dims = {n: sum(s for _, s in layout(n)) for n in degrees}
    d = {}
    for n in degrees:
        src, tgt = layout(n), layout(n + 1)
        src_idx = {i: k for k, (i, _) in enumerate(src)}
        tgt_idx = {i: k for k, (i, _) in enumerate(tgt)}
        blocks = []
        for i, _ in src:
            # post-composition with d_D lands in the same source index i
            if i in tgt_idx:
                left = D.diff(i + n).kron(Matrix.identity(field, C.dim(i)))
                blocks.append((tgt_idx[i], src_idx[i], left))
            # pre-composition with d_C^{i-1} lands in index i-1
            if i - 1 in tgt_idx:
                right = Matrix.identity(field, D.dim(i + n)).kron(C.diff(i - 1).transpose())
                blocks.append((tgt_idx[i - 1], src_idx[i], right.scale(-field.sign(n))))
        d[n] = block_matrix(field, [s for _, s in tgt], [s for _, s in src], blocks)
    return Complex(field, dims, d, validate=False)


def tensor_complex(C: Complex, D: Complex) -> Complex:
    """(C⊗D)^n = ⊕_i C^i ⊗ D^{n-i}, d(x⊗y) = dx⊗y + (-1)^i x⊗dy"""
    field = C.field
    pairs = {}
    for i in C.dims:
        for j in D.dims:
            pairs.setdefault(i + j, []).append(i)
    degrees = sorted(pairs)

    def layout(n):
        return [(i, C.dim(i) * D.dim(n - i)) for i in sorted(pairs.get(n, []))]

    dims = {n: sum(s for _, s in layout(n)) for n in degrees}
    d = {}
    for n in degrees:
        src, tgt = layout(n), layout(n + 1)
        tgt_idx = {i: k for k, (i, _) in enumerate(tgt)}
        blocks = []
        for k, (i, _) in enumerate(src):
            if i + 1 in tgt_idx:
                blocks.append((tgt_idx[i + 1], k, C.diff(i).kron(Matrix.identity(field, D.dim(n - i)))))
            if i in tgt_idx:
                blocks.append((tgt_idx[i], k,
                               Matrix.identity(field, C.dim(i)).kron(D.diff(n - i)).scale(field.sign(i))))
        d[n] = block_matrix(field, [s for _, s in tgt], [s for _, s in src], blocks)
    return Complex(field, dims, d, validate=False)


def tensor_map(f: ChainMap, g: ChainMap) -> ChainMap:
    src = tensor_complex(f.source, g.source)
    tgt = tensor_complex(f.target, g.target)
    field = f.field
    comps = {}
    for n in src.dims:
        src_parts = [i for i in f.source.degrees() if g.source.dim(n - i)]
        tgt_parts = [i for i in f.target.degrees() if g.target.dim(n - i)]
        blocks = []
        for b, i in enumerate(src_parts):
            if i in tgt_parts:
                blocks.append((tgt_parts.index(i), b, f.component(i).kron(g.component(n - i))))
        comps[n] = block_matrix(field, [f.target.dim(i) * g.target.dim(n - i) for i in tgt_parts],
                                [f.source.dim(i) * g.source.dim(n - i) for i in src_parts], blocks)
    return ChainMap(src, tgt, comps, validate=False)


def dual(C: Complex) -> Complex:
    """C^∨ = Hom(C, k): degree n is (C^{-n})^*, d^n = (-1)^{n+1} (d_C^{-n-1})^T"""
    field = C.field
    return Complex(field, {-n: k for n, k in C.dims.items()},
                   {-n - 1: m.transpose().scale(field.sign(-n)) for n, m in C.d.items()}, validate=False)


def dual_map(f: ChainMap) -> ChainMap:
    """f^∨: D^∨ -> C^∨ with components (f^{-n})^T"""
    return ChainMap(dual(f.target), dual(f.source),
                    {-n: m.transpose() for n, m in f.components.items()}, validate=False)


def biduality(C: Complex) -> ChainMap:
    """C -> C^∨∨, components (-1)^n"""
    field = C.field
    return ChainMap(C, dual(dual(C)),
                    {n: Matrix.identity(field, k).scale(field.sign(n)) for n, k in C.dims.items()})


def hom_map_covariant(C: Complex, g: ChainMap) -> ChainMap:
    """Hom(C, g): Hom(C, D) -> Hom(C, D')"""
    field = C.field
    src, tgt = hom_complex(C, g.source), hom_complex(C, g.target)
    comps = {}
    for n in src.dims:
        s_parts = [i for i in C.degrees() if g.source.dim(i + n)]
        t_parts = [i for i in C.degrees() if g.target.dim(i + n)]
        blocks = [(t_parts.index(i), b, g.component(i + n).kron(Matrix.identity(field, C.dim(i))))
                  for b, i in enumerate(s_parts) if i in t_parts]
        comps[n] = block_matrix(field, [g.target.dim(i + n) * C.dim(i) for i in t_parts],
                                [g.source.dim(i + n) * C.dim(i) for i in s_parts], blocks)
    return ChainMap(src, tgt, comps, validate=False)


class PosetDiagram:
    """
    Strict diagram of complexes on a finite poset, contravariant like a sheaf:
    each covering relation p ⋖ q carries a chain map D(q) -> D(p).
    """

    def __init__(self, field: FieldConfig, elements: Sequence[Hashable], leq: Callable[[Any, Any], bool],
                 values: Dict[Hashable, Complex], maps: Dict[Tuple[Hashable, Hashable], ChainMap],
                 validate: bool = True):
        self.field = field
        self.elements = list(elements)
        self.leq = leq
        self.values = values
        self.maps = dict(maps)
        self._index = {p: i for i, p in enumerate(self.elements)}
        self._above = {p: [q for q in self.elements if q != p and leq(p, q)] for p in self.elements}
        self._covers = {p: [q for q in self._above[p]
                            if not any(r != q and leq(r, q) for r in self._above[p])]
                        for p in self.elements}
        self._composites: Dict[Tuple[Hashable, Hashable], ChainMap] = {}
        if validate:
            self.validate()

    def value(self, p) -> Complex:
        return self.values[p]

    def above(self, p) -> List[Hashable]:
        return self._above[p]

    def covers(self, p) -> List[Hashable]:
        return self._covers[p]

    def map(self, p, q) -> ChainMap:
        """Structure map D(q) -> D(p) for p ≤ q"""
        if p == q:
            return ChainMap.identity(self.values[p])
        key = (p, q)
        if key not in self._composites:
            if key in self.maps:
                self._composites[key] = self.maps[key]
            else:
                r = next(r for r in self._covers[p] if self.leq(r, q))
                self._composites[key] = self.map(p, r).compose(self.map(r, q))
        return self._composites[key]

    def validate(self):
        for p in self.elements:
            for q in self._covers[p]:
                if (p, q) not in self.maps:
                    raise ValidationError(f"missing structure map for covering pair {p} < {q}")
        for p in self.elements:
            for q in self._above[p]:
                routes = [r for r in self._covers[p] if self.leq(r, q)]
                first = None
                for r in routes:
                    composite = self.maps[(p, q)] if r == q else self.map(p, r).compose(self.map(r, q))
                    if first is None:
                        first = composite
                    elif composite != first:
                        raise ValidationError(f"non-functorial diagram: chains {p} < {routes[0]} <= {q} "
                                              f"and {p} < {r} <= {q} disagree")
                self._composites[(p, q)] = first

    def chains(self, max_length: Optional[int] = None) -> List[List[Tuple[Hashable, ...]]]:
        """Strictly increasing chains grouped by length k (k+1 elements)"""
        by_k: List[List[Tuple[Hashable, ...]]] = [[(p,) for p in self.elements]]
        while by_k[-1] and (max_length is None or len(by_k) <= max_length):
            nxt = [c + (q,) for c in by_k[-1] for q in self._above[c[-1]]]
            if not nxt:
                break
            by_k.append(nxt)
        return by_k


class HolimModel:
    """Cobar total complex of a PosetDiagram with its block layout"""

    def __init__(self, diagram: PosetDiagram):
        self.diagram = diagram
        self.field = diagram.field
        self.chains = diagram.chains()
        self.blocks: Dict[int, List[Tuple[Tuple[Hashable, ...], int]]] = {}
        self.offsets: Dict[Tuple[Tuple[Hashable, ...], int], int] = {}
        for k, level in enumerate(self.chains):
            for c in level:
                V = diagram.value(c[0])
                for m in V.degrees():
                    self.blocks.setdefault(m + k, []).append((c, m))
        for n, blocks in self.blocks.items():
            off = 0
            for c, m in blocks:
                self.offsets[(c, m)] = off
                off += diagram.value(c[0]).dim(m)
        self.complex = self._build()

    def dim(self, n: int) -> int:
        return sum(self.diagram.value(c[0]).dim(m) for c, m in self.blocks.get(n, []))

    def _build(self) -> Complex:
        D = self.diagram
        field = self.field
        dims = {n: self.dim(n) for n in self.blocks}
        entries: Dict[int, List[Tuple[int, int, Any]]] = {n: [] for n in dims}
        for n, blocks in self.blocks.items():
            for c, m in blocks:
                k = len(c) - 1
                V = D.value(c[0])
                col = self.offsets[(c, m)]
                # internal differential with sign (-1)^k
                if V.dim(m + 1):
                    row = self.offsets[(c, m + 1)]
                    for i, j, v in V.diff(m).entries():
                        entries[n].append((row + i, col + j, field.sign(k) * v))
        for k in range(len(self.chains) - 1):
            for c2 in self.chains[k + 1]:
                for j in range(len(c2)):
                    c = c2[:j] + c2[j + 1:]
                    s = field.sign(j)
                    V = D.value(c[0])
                    for m in V.degrees():
                        n = m + k
                        if c2[0] == c[0]:
                            f = Matrix.identity(field, V.dim(m))
                        else:
                            f = D.map(c2[0], c[0]).component(m)
                        if f.is_zero():
                            continue
                        row = self.offsets[(c2, m)]
                        col = self.offsets[(c, m)]
                        for a, b, v in f.entries():
                            entries[n].append((row + a, col + b, s * v))
        d = {n: Matrix.from_entries(field, dims.get(n + 1, 0), dims[n], entries[n]) for n in dims}
        return Complex(field, dims, d, validate=False)

    def projection(self, sub: "HolimModel") -> ChainMap:
        """Restriction to the holim over a subset of elements (chains contained in the subset)"""
        comps = {}
        for n, blocks in sub.blocks.items():
            entries = []
            for c, m in blocks:
                size = sub.diagram.value(c[0]).dim(m)
                r0, c0 = sub.offsets[(c, m)], self.offsets[(c, m)]
                entries.extend((r0 + i, c0 + i, self.field.one) for i in range(size))
            comps[n] = Matrix.from_entries(self.field, sub.dim(n), self.dim(n), entries)
        return ChainMap(self.complex, sub.complex, comps, validate=False)

    def cone_map(self, source: Complex, legs: Dict[Hashable, ChainMap]) -> ChainMap:
        """X -> holim from a compatible family X -> D(p), placed in column 0"""
        comps = {}
        for n in source.dims:
            entries = []
            for p, leg in legs.items():
                if ((p,), n) not in self.offsets:
                    continue
                r0 = self.offsets[((p,), n)]
                entries.extend((r0 + i, j, v) for i, j, v in leg.component(n).entries())
            comps[n] = Matrix.from_entries(self.field, self.dim(n), source.dim(n), entries)
        return ChainMap(source, self.complex, comps, validate=False)


def holim(diagram: PosetDiagram) -> Complex:
    """Homotopy limit: column k = ∏_{p0<…<pk} D(p0) in degree +k"""
    return HolimModel(diagram).complex


def hocolim(diagram: PosetDiagram) -> Complex:
    """Homotopy colimit: column k = ⊕_{p0<…<pk} D(pk) in degree -k, bar differential"""
    field = diagram.field
    chains = diagram.chains()
    blocks: Dict[int, List[Tuple[Tuple[Hashable, ...], int]]] = {}
    for k, level in enumerate(chains):
        for c in level:
            V = diagram.value(c[-1])
            for m in V.degrees():
                blocks.setdefault(m - k, []).append((c, m))
    offsets, dims = {}, {}
    for n, bl in blocks.items():
        off = 0
        for c, m in bl:
            offsets[(c, m)] = off
            off += diagram.value(c[-1]).dim(m)
        dims[n] = off
    entries: Dict[int, List[Tuple[int, int, Any]]] = {n: [] for n in dims}
    for n, bl in blocks.items():
        for c, m in bl:
            k = len(c) - 1
            V = diagram.value(c[-1])
            col = offsets[(c, m)]
            if V.dim(m + 1):
                row = offsets[(c, m + 1)]
                entries[n].extend((row + i, col + j, field.sign(k) * v) for i, j, v in V.diff(m).entries())
            if k == 0:
                continue
            for j in range(len(c)):
                face = c[:j] + c[j + 1:]
                if j == k:
                    f = diagram.map(c[-2], c[-1]).component(m)
                else:
                    f = Matrix.identity(field, V.dim(m))
                row = offsets[(face, m)]
                entries[n].extend((row + a, col + b, field.sign(j) * v) for a, b, v in f.entries())
    d = {n: Matrix.from_entries(field, dims.get(n + 1, 0), dims[n], entries[n]) for n in dims}
    return Complex(field, dims, d, validate=False)
