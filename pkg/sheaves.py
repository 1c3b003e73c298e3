"""
Sheaf Core
Constructible sheaves as strict representations of a face poset, indicator
generators, sections, projective resolutions, derived Hom, tensor and internal Hom
"""

import logging
import threading
from dataclasses import dataclass
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import PreconditionError, ValidationError
from linalg import (ChainMap, Complex, FieldConfig, HolimModel, Matrix, PosetDiagram, block_matrix, cone,
                    cone_map, direct_sum, direct_sum_map, tensor_complex, tensor_map)
from posets import FacePoset

logger = logging.getLogger(__name__)


class Sheaf:
    """
    Constructible sheaf on a face poset: a complex F(s) per stratum and a restriction
    chain map F(t) -> F(s) for every covering pair s ⋖ t, strictly functorial.
    """

    def __init__(self, base: FacePoset, field: FieldConfig, values: Dict[Hashable, Complex],
                 restrictions: Optional[Dict[Tuple[Hashable, Hashable], ChainMap]] = None,
                 presentation: Optional["IndicatorComplex"] = None, validate: bool = True):
        self.base = base
        self.field = field
        self.values = {s: values.get(s) or Complex.zero(field) for s in base.elements}
        restrictions = restrictions or {}
        maps = {}
        for s, t in base.covering_pairs():
            f = restrictions.get((s, t))
            if f is None:
                f = ChainMap.zero(self.values[t], self.values[s])
            elif f.source.dims != self.values[t].dims or f.target.dims != self.values[s].dims:
                raise ValidationError(f"restriction {base.label(t)} -> {base.label(s)} has wrong shape")
            maps[(s, t)] = f
        self.diagram = PosetDiagram(field, base.elements, base.leq, self.values, maps, validate=validate)
        self.presentation = presentation

    def __repr__(self):
        dims = {self.base.label(s): c.total_dim() for s, c in self.values.items() if not c.is_zero()}
        return f"Sheaf({dims})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sheaf):
            return NotImplemented
        return (self.base == other.base and self.values == other.values
                and all(self.restriction(s, t) == other.restriction(s, t) for s, t in self.base.covering_pairs()))

    def __hash__(self):
        return hash(tuple(hash(self.values[s]) for s in self.base.elements))

    def value(self, s) -> Complex:
        return self.values[s]

    def restriction(self, s, t) -> ChainMap:
        """ρ: F(t) -> F(s) for s <= t"""
        return self.diagram.map(s, t)

    def restrictions(self) -> Dict[Tuple[Hashable, Hashable], ChainMap]:
        return {(s, t): self.diagram.map(s, t) for s, t in self.base.covering_pairs()}

    def support(self) -> List[Hashable]:
        return [s for s in self.base.elements if not self.values[s].is_zero()]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.values.values())

    def stalk_cohomology(self) -> Dict[Hashable, Dict[int, int]]:
        return {s: self.values[s].cohomology() for s in self.base.elements}

    def is_acyclic(self) -> bool:
        return all(c.is_acyclic() for c in self.values.values())

    def sub_diagram(self, subset: Iterable[Hashable]) -> PosetDiagram:
        keep = set(subset)
        elements = [s for s in self.base.elements if s in keep]
        maps = {(s, t): self.diagram.map(s, t) for s, t in self.base.covering_pairs() if s in keep and t in keep}
        return PosetDiagram(self.field, elements, self.base.leq, self.values, maps, validate=False)

    def without_presentation(self) -> "Sheaf":
        return Sheaf(self.base, self.field, self.values, self.restrictions(), validate=False)

    def shift(self, n: int) -> "Sheaf":
        pres = self.presentation.shift(n) if self.presentation is not None else None
        return Sheaf(self.base, self.field, {s: c.shift(n) for s, c in self.values.items()},
                     {k: f.shift(n) for k, f in self.restrictions().items()}, pres, validate=False)


class SheafMap:
    """Morphism of sheaves: a chain map per stratum commuting with restrictions"""

    def __init__(self, source: Sheaf, target: Sheaf, components: Dict[Hashable, ChainMap], validate: bool = True):
        if source.base != target.base:
            raise PreconditionError("sheaf map between different base posets")
        self.source = source
        self.target = target
        self.base = source.base
        self.components = {s: components.get(s) or ChainMap.zero(source.value(s), target.value(s))
                           for s in self.base.elements}
        if validate:
            self.validate()

    def component(self, s) -> ChainMap:
        return self.components[s]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SheafMap):
            return NotImplemented
        return self.base == other.base and self.components == other.components

    def __hash__(self):
        return hash(tuple(hash(self.components[s]) for s in self.base.elements))

    def validate(self):
        for s in self.base.elements:
            self.components[s].validate()
        for s, t in self.base.covering_pairs():
            lhs = self.target.restriction(s, t).compose(self.components[t])
            rhs = self.components[s].compose(self.source.restriction(s, t))
            if lhs != rhs:
                raise ValidationError(f"sheaf map does not commute with restriction "
                                      f"{self.base.label(t)} -> {self.base.label(s)}")

    @classmethod
    def identity(cls, F: Sheaf) -> "SheafMap":
        return cls(F, F, {s: ChainMap.identity(F.value(s)) for s in F.base.elements}, validate=False)

    @classmethod
    def zero(cls, F: Sheaf, G: Sheaf) -> "SheafMap":
        return cls(F, G, {}, validate=False)

    def compose(self, first: "SheafMap") -> "SheafMap":
        return SheafMap(first.source, self.target,
                        {s: self.components[s].compose(first.components[s]) for s in self.base.elements},
                        validate=False)

    def cohomology_ranks(self) -> Dict[Hashable, Dict[int, int]]:
        return {s: f.cohomology_ranks() for s, f in self.components.items()}

    def is_quasi_isomorphism(self) -> bool:
        return all(f.is_quasi_isomorphism() for f in self.components.values())


def sheaf_cone(f: SheafMap) -> Sheaf:
    """Pointwise mapping cone with restrictions induced on cones"""
    base = f.base
    values = {s: cone(f.components[s]) for s in base.elements}
    restrictions = {}
    for s, t in base.covering_pairs():
        restrictions[(s, t)] = cone_map(f.components[t], f.components[s],
                                        f.source.restriction(s, t), f.target.restriction(s, t))
    return Sheaf(base, f.source.field, values, restrictions, validate=False)


def sheaf_fiber(f: SheafMap) -> Sheaf:
    return sheaf_cone(f).shift(-1)


def direct_sum_sheaves(parts: Sequence[Sheaf]) -> Sheaf:
    if all(F.presentation is not None for F in parts):
        return IndicatorComplex.direct_sum([F.presentation for F in parts]).realize()
    base, field = parts[0].base, parts[0].field
    values = {s: direct_sum(field, [F.value(s) for F in parts]) for s in base.elements}
    restrictions = {(s, t): direct_sum_map([F.restriction(s, t) for F in parts]) for s, t in base.covering_pairs()}
    return Sheaf(base, field, values, restrictions, validate=False)


def constant_sheaf(base: FacePoset, field: FieldConfig, value: Optional[Complex] = None) -> Sheaf:
    """Constant sheaf with stalk V (the unit complex by default) and identity restrictions"""
    value = value or Complex.unit(field)
    return Sheaf(base, field, {s: value for s in base.elements},
                 {(s, t): ChainMap.identity(value) for s, t in base.covering_pairs()}, validate=False)


def zero_sheaf(base: FacePoset, field: FieldConfig) -> Sheaf:
    return Sheaf(base, field, {}, validate=False)


def locally_closed_constant(base: FacePoset, field: FieldConfig, subset: Iterable[Hashable]) -> Sheaf:
    """
    Constant sheaf on a locally closed subset extended by zero; restrictions are the
    identity inside the subset and zero when leaving it.
    """
    keep = set(subset)
    unit = Complex.unit(field)
    for s in keep:
        for t in keep:
            if base.leq(s, t):
                between = [r for r in base.elements if base.leq(s, r) and base.leq(r, t)]
                if any(r not in keep for r in between):
                    raise PreconditionError("subset is not locally closed")
    values = {s: unit for s in keep}
    restrictions = {(s, t): ChainMap.identity(unit) for s, t in base.covering_pairs() if s in keep and t in keep}
    return Sheaf(base, field, values, restrictions, validate=False)


def skyscraper(base: FacePoset, field: FieldConfig, s: Hashable, value: Optional[Complex] = None) -> Sheaf:
    """V at the single stratum s, zero elsewhere"""
    return Sheaf(base, field, {s: value or Complex.unit(field)}, validate=False)


class IndicatorComplex:
    """
    Finite complex of indicators: generator g stands for 1_{s_g} placed in degree n_g.
    D[h, g] may be nonzero only when n_h = n_g + 1 and s_g <= s_h.
    """

    def __init__(self, base: FacePoset, field: FieldConfig, generators: Sequence[Tuple[Hashable, int]],
                 D: Optional[Matrix] = None, validate: bool = True):
        self.base = base
        self.field = field
        self.generators: List[Tuple[Hashable, int]] = list(generators)
        n = len(self.generators)
        self.D = D if D is not None else Matrix.zeros(field, n, n)
        if validate:
            self.validate()

    def __len__(self) -> int:
        return len(self.generators)

    def __repr__(self):
        return f"IndicatorComplex({len(self.generators)} generators)"

    def validate(self):
        n = len(self.generators)
        if self.D.shape != (n, n):
            raise ValidationError("indicator differential has the wrong shape")
        for h, g, _ in self.D.entries():
            (sg, ng), (sh, nh) = self.generators[g], self.generators[h]
            if nh != ng + 1:
                raise ValidationError(f"indicator differential {g}->{h} does not raise degree by one")
            if not self.base.leq(sg, sh):
                raise ValidationError(f"no map 1_{self.base.label(sg)} -> 1_{self.base.label(sh)}")
        if not (self.D @ self.D).is_zero():
            raise ValidationError("indicator differential squares to a nonzero map")

    def degrees(self) -> List[int]:
        return sorted({n for _, n in self.generators})

    @classmethod
    def indicator(cls, base: FacePoset, field: FieldConfig, s, degree: int = 0) -> "IndicatorComplex":
        return cls(base, field, [(s, degree)], validate=False)

    @classmethod
    def direct_sum(cls, parts: Sequence["IndicatorComplex"]) -> "IndicatorComplex":
        gens, blocks, sizes = [], [], []
        for i, P in enumerate(parts):
            gens.extend(P.generators)
            sizes.append(len(P))
            blocks.append((i, i, P.D))
        D = block_matrix(parts[0].field, sizes, sizes, blocks)
        return cls(parts[0].base, parts[0].field, gens, D, validate=False)

    def shift(self, n: int) -> "IndicatorComplex":
        return IndicatorComplex(self.base, self.field, [(s, k - n) for s, k in self.generators],
                                self.D.scale(self.field.sign(n)), validate=False)

    def active(self, t) -> List[int]:
        return [g for g, (s, _) in enumerate(self.generators) if self.base.leq(t, s)]

    def realize(self) -> Sheaf:
        """P(t) = span{g : t <= s_g}, restrictions are inclusions of generator sets"""
        field = self.field
        layouts: Dict[Hashable, Dict[int, List[int]]] = {}
        values: Dict[Hashable, Complex] = {}
        for t in self.base.elements:
            by_degree: Dict[int, List[int]] = {}
            for g in self.active(t):
                by_degree.setdefault(self.generators[g][1], []).append(g)
            layouts[t] = by_degree
            d = {n: self.D.submatrix(by_degree.get(n + 1, []), gens) for n, gens in by_degree.items()}
            values[t] = Complex(field, {n: len(g) for n, g in by_degree.items()}, d, validate=False)
        restrictions = {}
        for s, t in self.base.covering_pairs():
            comps = {}
            for n, gens in layouts[t].items():
                rows = {g: i for i, g in enumerate(layouts[s].get(n, []))}
                comps[n] = Matrix.from_entries(field, len(rows), len(gens),
                                               [(rows[g], j, field.one) for j, g in enumerate(gens)])
            restrictions[(s, t)] = ChainMap(values[t], values[s], comps, validate=False)
        return Sheaf(self.base, field, values, restrictions, presentation=self, validate=False)

    def restricted_to_star(self, s) -> Tuple[List[Optional[Hashable]], List[int]]:
        """Locations meet(s_g, s) and the surviving generator indices on str(s)"""
        locations = [self.base.star_meet(sg, s) for sg, _ in self.generators]
        return locations, [g for g, loc in enumerate(locations) if loc is not None]

    def tensor(self, other: "IndicatorComplex") -> "IndicatorComplex":
        """1_a ⊗ 1_b = 1_{meet(a, b)}; differential D⊗1 + (-1)^{n_g} 1⊗D'"""
        field = self.field
        gens, index = [], {}
        for g, (a, n) in enumerate(self.generators):
            for h, (b, m) in enumerate(other.generators):
                loc = self.base.star_meet(a, b)
                if loc is not None:
                    index[(g, h)] = len(gens)
                    gens.append((loc, n + m))
        entries = []
        cols, other_cols = self.D.columns(), other.D.columns()
        for (g, h), k in index.items():
            for g2, v in cols.get(g, []):
                if (g2, h) in index:
                    entries.append((index[(g2, h)], k, v))
            sign = field.sign(self.generators[g][1])
            for h2, v in other_cols.get(h, []):
                if (g, h2) in index:
                    entries.append((index[(g, h2)], k, sign * v))
        D = Matrix.from_entries(field, len(gens), len(gens), entries)
        return IndicatorComplex(self.base, field, gens, D, validate=False)


class IndicatorMap:
    """Chain map of indicator complexes; M[h, g] needs n_h = n_g and s_g <= s_h"""

    def __init__(self, source: IndicatorComplex, target: IndicatorComplex, M: Matrix, validate: bool = True):
        self.source = source
        self.target = target
        self.M = M
        if validate:
            self.validate()

    def validate(self):
        base = self.source.base
        for h, g, _ in self.M.entries():
            (sg, ng), (sh, nh) = self.source.generators[g], self.target.generators[h]
            if ng != nh or not base.leq(sg, sh):
                raise ValidationError(f"indicator map entry {g}->{h} is not a valid generator map")
        if self.M @ self.source.D != self.target.D @ self.M:
            raise ValidationError("indicator map does not commute with differentials")

    def cone(self) -> IndicatorComplex:
        A, B = self.source, self.target
        gens = list(B.generators) + [(s, n - 1) for s, n in A.generators]
        D = block_matrix(A.field, [len(B), len(A)], [len(B), len(A)],
                         [(0, 0, B.D), (0, 1, self.M), (1, 1, -A.D)])
        return IndicatorComplex(A.base, A.field, gens, D, validate=False)

    def realize(self, source: Optional[Sheaf] = None, target: Optional[Sheaf] = None) -> SheafMap:
        P, Q = source or self.source.realize(), target or self.target.realize()
        field = self.source.field
        comps = {}
        for t in self.source.base.elements:
            pieces = {}
            src_by, tgt_by = {}, {}
            for g in self.source.active(t):
                src_by.setdefault(self.source.generators[g][1], []).append(g)
            for h in self.target.active(t):
                tgt_by.setdefault(self.target.generators[h][1], []).append(h)
            for n, gens in src_by.items():
                pieces[n] = self.M.submatrix(tgt_by.get(n, []), gens)
            comps[t] = ChainMap(P.value(t), Q.value(t), pieces, validate=False)
        return SheafMap(P, Q, comps, validate=False)


@dataclass
class IndicatorResolution:
    complex: IndicatorComplex
    augmentation: SheafMap
    index: Optional[Dict[Tuple[Tuple[Hashable, ...], int, int], int]] = None


def indicator(base: FacePoset, field: FieldConfig, s, degree: int = 0) -> Sheaf:
    """1_s: k at every t <= s, zero elsewhere, identity restrictions"""
    if s not in base:
        raise PreconditionError(f"unknown stratum {s!r}")
    return IndicatorComplex.indicator(base, field, s, degree).realize()


def sections_open(F: Sheaf, U: Iterable[Hashable]) -> Complex:
    """Γ(U; F) as the homotopy limit of F over the open set U"""
    U = set(U)
    if not F.base.is_open(U):
        raise PreconditionError("not open")
    return HolimModel(F.sub_diagram(U)).complex


def global_sections(F: Sheaf) -> Complex:
    return HolimModel(F.diagram).complex


def _bar_resolution(F: Sheaf) -> IndicatorResolution:
    """
    Normalized bar resolution: a generator for every chain p0 < ... < pk and basis vector
    of F(pk)^q, located at p0 in degree q - k.
    """
    base, field = F.base, F.field
    chains = F.diagram.chains()
    gens: List[Tuple[Hashable, int]] = []
    index: Dict[Tuple[Tuple[Hashable, ...], int, int], int] = {}
    for level in chains:
        for c in level:
            V = F.value(c[-1])
            for q in V.degrees():
                for i in range(V.dim(q)):
                    index[(c, q, i)] = len(gens)
                    gens.append((c[0], q - (len(c) - 1)))
    entries = []
    columns: Dict[Tuple[Hashable, Hashable, int], Dict[int, List[Tuple[int, Any]]]] = {}

    def cols(p, top, q):
        if (p, top, q) not in columns:
            f = F.value(p).diff(q) if p == top else F.restriction(p, top).component(q)
            columns[(p, top, q)] = f.columns()
        return columns[(p, top, q)].get

    for (c, q, i), g in index.items():
        k = len(c) - 1
        for r, v in cols(c[-1], c[-1], q)(i, []):
            entries.append((index[(c, q + 1, r)], g, field.sign(k) * v))
        if k == 0:
            continue
        for j in range(k + 1):
            face = c[:j] + c[j + 1:]
            if j == k:
                for r, v in cols(c[-2], c[-1], q)(i, []):
                    entries.append((index[(face, q, r)], g, field.sign(j) * v))
            else:
                entries.append((index[(face, q, i)], g, field.sign(j)))
    D = Matrix.from_entries(field, len(gens), len(gens), entries)
    P = IndicatorComplex(base, field, gens, D, validate=False)
    realized = P.realize()
    comps = {}
    reverse = {g: key for key, g in index.items()}
    for t in base.elements:
        by_degree = {}
        for g in P.active(t):
            by_degree.setdefault(gens[g][1], []).append(g)
        pieces = {}
        for n, active in by_degree.items():
            col_entries = []
            for col, g in enumerate(active):
                c, q, i = reverse[g]
                if len(c) > 1:
                    continue
                if t == c[0]:
                    col_entries.append((i, col, field.one))
                else:
                    col_entries.extend((r, col, v) for r, v in cols(t, c[0], q)(i, []))
            pieces[n] = Matrix.from_entries(field, F.value(t).dim(n), len(active), col_entries)
        comps[t] = ChainMap(realized.value(t), F.value(t), pieces, validate=False)
    logger.debug(f"bar resolution with {len(gens)} generators")
    return IndicatorResolution(P, SheafMap(realized, F, comps, validate=False), index)


_RESOLUTION_LOCK = threading.Lock()


def proj_resolve(F: Sheaf) -> IndicatorResolution:
    """Resolution by indicators: the presentation when known, otherwise the bar resolution"""
    if F.presentation is not None:
        return IndicatorResolution(F.presentation, SheafMap.identity(F))
    return bar_resolution(F)


def bar_resolution(F: Sheaf) -> IndicatorResolution:
    """The bar resolution even when F carries a presentation; cached on F"""
    with _RESOLUTION_LOCK:
        cached = getattr(F, "_resolution", None)
    if cached is not None:
        return cached
    resolution = _bar_resolution(F)
    with _RESOLUTION_LOCK:
        F._resolution = resolution
    return resolution


def bar_map(phi: SheafMap) -> IndicatorMap:
    """The map of bar resolutions induced by φ, strictly functorial in φ"""
    source, target = bar_resolution(phi.source), bar_resolution(phi.target)
    field = phi.source.field
    entries = []
    for (c, q, i), g in source.index.items():
        for r, v in phi.component(c[-1]).component(q).columns().get(i, []):
            entries.append((target.index[(c, q, r)], g, v))
    M = Matrix.from_entries(field, len(target.complex), len(source.complex), entries)
    return IndicatorMap(source.complex, target.complex, M, validate=False)


class HomModel:
    """Hom(P, G) for an indicator complex P with generator locations overridden"""

    def __init__(self, P: IndicatorComplex, G: Sheaf, locations: Optional[List[Optional[Hashable]]] = None):
        self.P = P
        self.G = G
        field = G.field
        self.locations = locations if locations is not None else [s for s, _ in P.generators]
        live = [g for g, loc in enumerate(self.locations) if loc is not None]
        self.blocks: Dict[int, List[int]] = {}
        for g in live:
            n_g = P.generators[g][1]
            for k in G.value(self.locations[g]).degrees():
                self.blocks.setdefault(k - n_g, []).append(g)
        self.offsets: Dict[Tuple[int, int], int] = {}
        dims = {}
        for m, gens in self.blocks.items():
            off = 0
            for g in gens:
                self.offsets[(m, g)] = off
                off += G.value(self.locations[g]).dim(P.generators[g][1] + m)
            dims[m] = off
        entries: Dict[int, List[Tuple[int, int, Any]]] = {m: [] for m in dims}
        by_source: Dict[int, List[Tuple[int, Any]]] = {}
        for h, g, v in P.D.entries():
            by_source.setdefault(h, []).append((g, v))
        for m, gens in self.blocks.items():
            for h in gens:
                loc_h = self.locations[h]
                n_h = P.generators[h][1]
                col = self.offsets[(m, h)]
                Gh = G.value(loc_h)
                if (m + 1, h) in self.offsets:
                    row = self.offsets[(m + 1, h)]
                    entries[m].extend((row + i, col + j, v) for i, j, v in Gh.diff(n_h + m).entries())
                for g, coeff in by_source.get(h, []):
                    loc_g = self.locations[g]
                    if loc_g is None or (m + 1, g) not in self.offsets:
                        continue
                    rho = G.restriction(loc_g, loc_h).component(n_h + m)
                    scale = -field.sign(m) * coeff
                    row = self.offsets[(m + 1, g)]
                    entries[m].extend((row + i, col + j, scale * v) for i, j, v in rho.entries())
        d = {m: Matrix.from_entries(field, dims.get(m + 1, 0), dims[m], entries[m]) for m in dims}
        self.complex = Complex(field, dims, d, validate=False)

    def dim(self, m: int) -> int:
        return self.complex.dim(m)


def _check_same_base(F: Sheaf, G: Sheaf):
    if F.base != G.base:
        raise PreconditionError("sheaves live on different base posets")


def derived_hom(F: Sheaf, G: Sheaf) -> Complex:
    """RHom(F, G) = Hom(projResolve(F), G)"""
    _check_same_base(F, G)
    return HomModel(proj_resolve(F).complex, G).complex


def hom_precompose(f: IndicatorMap, G: Sheaf) -> ChainMap:
    """Hom(Q, G) -> Hom(P, G), φ ↦ φ∘f for f: P -> Q"""
    src, tgt = HomModel(f.target, G), HomModel(f.source, G)
    field = G.field
    by_source: Dict[int, List[Tuple[int, Any]]] = {}
    for h, g, v in f.M.entries():
        by_source.setdefault(h, []).append((g, v))
    comps = {}
    for m, gens in src.blocks.items():
        entries = []
        for h in gens:
            col = src.offsets[(m, h)]
            loc_h = src.locations[h]
            n = f.target.generators[h][1] + m
            for g, coeff in by_source.get(h, []):
                if (m, g) not in tgt.offsets:
                    continue
                rho = G.restriction(tgt.locations[g], loc_h).component(n)
                row = tgt.offsets[(m, g)]
                entries.extend((row + i, col + j, coeff * v) for i, j, v in rho.entries())
        comps[m] = Matrix.from_entries(field, tgt.dim(m), src.dim(m), entries)
    return ChainMap(src.complex, tgt.complex, comps, validate=False)


def sheaf_hom(F: Sheaf, G: Sheaf) -> Sheaf:
    """sHom(F, G)(s) = Hom(P|str(s), G) with restrictions induced by G"""
    _check_same_base(F, G)
    base, field = F.base, F.field
    P = proj_resolve(F).complex
    models = {}
    for s in base.elements:
        locations, _ = P.restricted_to_star(s)
        models[s] = HomModel(P, G, locations)
    restrictions = {}
    for s, t in base.covering_pairs():
        src, tgt = models[t], models[s]
        comps = {}
        for m, gens in src.blocks.items():
            entries = []
            for g in gens:
                if (m, g) not in tgt.offsets:
                    continue
                n = P.generators[g][1] + m
                rho = G.restriction(tgt.locations[g], src.locations[g]).component(n)
                row, col = tgt.offsets[(m, g)], src.offsets[(m, g)]
                entries.extend((row + i, col + j, v) for i, j, v in rho.entries())
            comps[m] = Matrix.from_entries(field, tgt.dim(m), src.dim(m), entries)
        restrictions[(s, t)] = ChainMap(src.complex, tgt.complex, comps, validate=False)
    return Sheaf(base, field, {s: models[s].complex for s in base.elements}, restrictions, validate=False)


def tensor(F: Sheaf, G: Sheaf) -> Sheaf:
    """Pointwise tensor product; indicator presentations multiply by star meets"""
    _check_same_base(F, G)
    if F.presentation is not None and G.presentation is not None:
        return F.presentation.tensor(G.presentation).realize()
    base, field = F.base, F.field
    values = {s: tensor_complex(F.value(s), G.value(s)) for s in base.elements}
    restrictions = {(s, t): tensor_map(F.restriction(s, t), G.restriction(s, t)) for s, t in base.covering_pairs()}
    return Sheaf(base, field, values, restrictions, validate=False)


def random_sheaf(base: FacePoset, field: FieldConfig, rng: np.random.Generator, max_terms: int = 3,
                 max_coefficient: int = 2) -> Sheaf:
    """Cone of a random map between two random sums of indicators"""
    elements = base.elements
    a = [elements[i] for i in rng.integers(0, len(elements), size=int(rng.integers(0, max_terms + 1)))]
    b = [elements[i] for i in rng.integers(0, len(elements), size=int(rng.integers(1, max_terms + 1)))]
    gens = [(s, 0) for s in b] + [(s, -1) for s in a]
    entries = []
    for j, sa in enumerate(a):
        for i, sb in enumerate(b):
            if base.leq(sa, sb):
                c = int(rng.integers(-max_coefficient, max_coefficient + 1))
                if c:
                    entries.append((i, len(b) + j, field(c)))
    D = Matrix.from_entries(field, len(gens), len(gens), entries)
    return IndicatorComplex(base, field, gens, D).realize()
