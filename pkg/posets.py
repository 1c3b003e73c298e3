"""
Face Posets
Simplicial complexes, face posets in closure-reversing order, product posets,
poset maps and the staircase refinement of a product
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from errors import PreconditionError, ValidationError

logger = logging.getLogger(__name__)

Simplex = Tuple[Hashable, ...]


class SimplicialComplex:
    """Finite simplicial complex on a totally ordered vertex set"""

    def __init__(self, vertices: Sequence[Hashable], simplices: Iterable[Iterable[Hashable]],
                 coordinates: Optional[Dict[Hashable, Tuple[Fraction, ...]]] = None):
        self.vertices: List[Hashable] = list(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("vertex labels must be unique")
        self._order = {v: i for i, v in enumerate(self.vertices)}
        closed: Set[Simplex] = set()
        for s in simplices:
            s = self.normalize(s)
            for k in range(1, len(s) + 1):
                closed.update(combinations(s, k))
        closed.update((v,) for v in self.vertices)
        self.simplices: List[Simplex] = sorted(closed, key=self.sort_key)
        self.coordinates: Dict[Hashable, Tuple[Fraction, ...]] = {}
        for v, point in (coordinates or {}).items():
            if any(isinstance(x, float) for x in point):
                raise PreconditionError(f"coordinates of {v!r} must be exact, got {point}")
            self.coordinates[v] = tuple(Fraction(x) for x in point)

    def normalize(self, simplex: Iterable[Hashable]) -> Simplex:
        try:
            return tuple(sorted(set(simplex), key=self._order.__getitem__))
        except KeyError as e:
            raise ValidationError(f"unknown vertex {e.args[0]!r}")

    def sort_key(self, s: Simplex):
        return (len(s), [self._order[v] for v in s])

    def vertex_index(self, v: Hashable) -> int:
        return self._order[v]

    def __contains__(self, simplex) -> bool:
        return self.normalize(simplex) in set(self.simplices)

    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1 if self.simplices else -1

    def link_vertices(self, simplex: Simplex) -> List[Hashable]:
        """Vertices w not in σ with σ ∪ {w} a simplex"""
        present = set(self.simplices)
        return [w for w in self.vertices if w not in simplex and self.normalize(simplex + (w,)) in present]

    @classmethod
    def point(cls) -> "SimplicialComplex":
        return cls([0], [(0,)])

    @classmethod
    def path(cls, n_edges: int) -> "SimplicialComplex":
        """Subdivided interval with vertices 0..n_edges"""
        return cls(list(range(n_edges + 1)), [(i, i + 1) for i in range(n_edges)],
                   {i: (Fraction(i, n_edges),) for i in range(n_edges + 1)})

    @classmethod
    def interval(cls) -> "SimplicialComplex":
        return cls.path(1)

    @classmethod
    def circle(cls, n_vertices: int = 3) -> "SimplicialComplex":
        if n_vertices < 3:
            raise PreconditionError("a simplicial circle needs at least 3 vertices")
        return cls(list(range(n_vertices)), [(i, (i + 1) % n_vertices) for i in range(n_vertices)])


class FacePoset:
    """
    Finite poset in closure-reversing order: s <= t iff t is a face of s.
    Top simplices are minimal, vertices maximal, and str(s) = {t <= s} is a down-set.
    """

    def __init__(self, elements: Sequence[Hashable], dims: Dict[Hashable, int],
                 facets: Dict[Hashable, Dict[Hashable, int]], complex: Optional[SimplicialComplex] = None,
                 factors: Tuple["FacePoset", ...] = (), up: Optional[Dict[Hashable, FrozenSet]] = None):
        self.elements: List[Hashable] = list(elements)
        self._index = {s: i for i, s in enumerate(self.elements)}
        self._dims = dims
        self._facets = facets
        self.complex = complex
        self.factors = factors
        if up is None:
            up = {}
            for s in sorted(self.elements, key=lambda x: dims[x]):
                faces = {s}
                for t in facets.get(s, {}):
                    faces |= up[t]
                up[s] = frozenset(faces)
        self._up = up
        self._down: Dict[Hashable, Set[Hashable]] = {s: set() for s in self.elements}
        for s in self.elements:
            for t in self._up[s]:
                self._down[t].add(s)
        self._covers_above = {s: [t for t in self.sorted(self._up[s]) if t != s
                                  and not any(r != s and r != t and t in self._up[r] for r in self._up[s])]
                              for s in self.elements}
        self._covers_below: Dict[Hashable, List[Hashable]] = {t: [] for t in self.elements}
        for s in self.elements:
            for t in self._covers_above[s]:
                self._covers_below[t].append(s)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, s) -> bool:
        return s in self._index

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FacePoset):
            return NotImplemented
        return self.elements == other.elements and self._up == other._up

    def __hash__(self):
        return hash(tuple(self.elements))

    def __repr__(self):
        return f"FacePoset({len(self.elements)} elements)"

    def index(self, s) -> int:
        return self._index[s]

    def dim(self, s) -> int:
        return self._dims[s]

    def leq(self, s, t) -> bool:
        return t in self._up[s]

    def up(self, s) -> FrozenSet:
        """Closure strata of s: {t >= s}"""
        return self._up[s]

    def star(self, s) -> FrozenSet:
        """Open star str(s) = {t <= s}"""
        return frozenset(self._down[s])

    def covers_above(self, s) -> List[Hashable]:
        """Elements t with s ⋖ t (codimension-one faces of s)"""
        return self._covers_above[s]

    def covers_below(self, t) -> List[Hashable]:
        return self._covers_below[t]

    def covering_pairs(self) -> List[Tuple[Hashable, Hashable]]:
        return [(s, t) for s in self.elements for t in self._covers_above[s]]

    def incidence(self, s, t) -> int:
        """Orientation incidence [s:t] for t a codimension-one face of s"""
        return self._facets.get(s, {}).get(t, 0)

    def sorted(self, items: Iterable[Hashable]) -> List[Hashable]:
        return sorted(items, key=self._index.__getitem__)

    def is_open(self, subset: Iterable[Hashable]) -> bool:
        subset = set(subset)
        return all(self._down[s] <= subset for s in subset)

    def is_closed(self, subset: Iterable[Hashable]) -> bool:
        subset = set(subset)
        return all(self._up[s] <= subset for s in subset)

    def down_closure(self, subset: Iterable[Hashable]) -> FrozenSet:
        out: Set[Hashable] = set()
        for s in subset:
            out |= self._down[s]
        return frozenset(out)

    def up_closure(self, subset: Iterable[Hashable]) -> FrozenSet:
        out: Set[Hashable] = set()
        for s in subset:
            out |= self._up[s]
        return frozenset(out)

    def star_meet(self, a, b) -> Optional[Hashable]:
        """Maximum of str(a) ∩ str(b), when the intersection is a star; None when empty"""
        common = self._down[a] & self._down[b]
        if not common:
            return None
        tops = [s for s in common if self._down[s] >= common]
        if not tops:
            raise PreconditionError(f"str({a}) ∩ str({b}) is not a star")
        return tops[0]

    def induced(self, subset: Iterable[Hashable]) -> "FacePoset":
        keep = set(subset)
        elements = [s for s in self.elements if s in keep]
        facets = {s: {t: e for t, e in self._facets.get(s, {}).items() if t in keep} for s in elements}
        up = {s: frozenset(self._up[s] & keep) for s in elements}
        return FacePoset(elements, {s: self._dims[s] for s in elements}, facets, self.complex, self.factors, up)

    def max_chain_length(self) -> int:
        longest = {s: 0 for s in self.elements}
        for s in sorted(self.elements, key=lambda x: -self._dims[x]):
            for t in self._covers_above[s]:
                longest[s] = max(longest[s], longest[t] + 1)
        return max(longest.values(), default=0)

    def label(self, s) -> str:
        if self.factors:
            return "(" + "|".join(f.label(x) for f, x in zip(self.factors, s)) + ")"
        return "-".join(str(v) for v in s)

    def element_from_label(self, text: str) -> Hashable:
        for s in self.elements:
            if self.label(s) == text:
                return s
        raise PreconditionError(f"no element labelled {text!r}")


def face_poset(K: SimplicialComplex) -> FacePoset:
    """Face poset of K; [s:t] = (-1)^j when t is s with its j-th vertex removed"""
    dims = {s: len(s) - 1 for s in K.simplices}
    facets: Dict[Simplex, Dict[Simplex, int]] = {}
    for s in K.simplices:
        if len(s) > 1:
            facets[s] = {s[:j] + s[j + 1:]: (-1) ** j for j in range(len(s))}
    return FacePoset(K.simplices, dims, facets, complex=K)


def product_poset(*posets: FacePoset) -> FacePoset:
    """Product stratification; incidence [σ:σ'] on the first factor, (-1)^{dim σ}[τ:τ'] on the second"""
    if len(posets) == 1:
        return posets[0]
    if len(posets) > 2:
        head = product_poset(*posets[:-1])
        return _product_pair(head, posets[-1], flatten=True)
    return _product_pair(posets[0], posets[1], flatten=False)


def _product_pair(S: FacePoset, T: FacePoset, flatten: bool) -> FacePoset:
    factors = (S.factors + (T,)) if flatten else (S, T)

    def make(a, b):
        return tuple(a) + (b,) if flatten else (a, b)

    elements, dims, facets = [], {}, {}
    for a in S.elements:
        for b in T.elements:
            e = make(a, b)
            elements.append(e)
            dims[e] = S.dim(a) + T.dim(b)
            f = {}
            for a2 in S.covers_above(a):
                f[make(a2, b)] = S.incidence(a, a2)
            sign = (-1) ** S.dim(a)
            for b2 in T.covers_above(b):
                f[make(a, b2)] = sign * T.incidence(b, b2)
            facets[e] = f
    up = {}
    for a in S.elements:
        for b in T.elements:
            up[make(a, b)] = frozenset(make(x, y) for x in S.up(a) for y in T.up(b))
    return FacePoset(elements, dims, facets, factors=factors, up=up)


@dataclass
class SubposetInfo:
    kind: str
    poset: FacePoset


def subposets(P: FacePoset, subset: Iterable[Hashable]) -> SubposetInfo:
    """Classify a subset as open (down-set), closed (up-set) or neither"""
    subset = set(subset)
    unknown = subset - set(P.elements)
    if unknown:
        raise PreconditionError(f"elements not in poset: {sorted(map(str, unknown))}")
    if P.is_open(subset):
        kind = "open"
    elif P.is_closed(subset):
        kind = "closed"
    else:
        kind = "neither"
    return SubposetInfo(kind, P.induced(subset))


POSET_MAP_KINDS = ("general", "open-inclusion", "closed-inclusion", "refinement", "projection", "diagonal")


class PosetMap:
    """Order-preserving map of face posets with a kind tag"""

    def __init__(self, source: FacePoset, target: FacePoset, assignment: Dict[Hashable, Hashable],
                 kind: str = "general", validate: bool = True):
        if kind not in POSET_MAP_KINDS:
            raise PreconditionError(f"unknown poset map kind: {kind}")
        self.source = source
        self.target = target
        self.assignment = assignment
        self.kind = kind
        if validate:
            self.validate()

    def __call__(self, s) -> Hashable:
        return self.assignment[s]

    def validate(self):
        for s in self.source.elements:
            if s not in self.assignment or self.assignment[s] not in self.target:
                raise ValidationError(f"poset map undefined or out of range at {self.source.label(s)}")
        for s, t in self.source.covering_pairs():
            if not self.target.leq(self(s), self(t)):
                raise ValidationError(f"poset map not order-preserving at "
                                      f"{self.source.label(s)} <= {self.source.label(t)}")
        image = {self(s) for s in self.source.elements}
        if self.kind in ("open-inclusion", "closed-inclusion") and len(image) != len(self.source):
            raise ValidationError("inclusion is not injective")
        if self.kind == "open-inclusion" and not self.target.is_open(image):
            raise ValidationError("open-inclusion image is not a down-set")
        if self.kind == "closed-inclusion" and not self.target.is_closed(image):
            raise ValidationError("closed-inclusion image is not an up-set")
        if self.kind == "refinement" and image != set(self.target.elements):
            raise ValidationError("refinement must be surjective on strata")

    def preimage(self, subset: Iterable[Hashable]) -> List[Hashable]:
        subset = set(subset)
        return [s for s in self.source.elements if self(s) in subset]

    def require(self, *kinds: str):
        if self.kind not in kinds:
            raise PreconditionError(f"expected a poset map of kind {'/'.join(kinds)}, got {self.kind}")


def identity_map(P: FacePoset) -> PosetMap:
    return PosetMap(P, P, {s: s for s in P.elements}, "general", validate=False)


def inclusion(P: FacePoset, subset: Iterable[Hashable]) -> PosetMap:
    """Open or closed inclusion of a subposet, tagged by its kind"""
    info = subposets(P, subset)
    if info.kind == "neither":
        raise PreconditionError("subset is neither open nor closed")
    return PosetMap(info.poset, P, {s: s for s in info.poset.elements}, f"{info.kind}-inclusion")


def projection(P: FacePoset, keep: Sequence[int]) -> PosetMap:
    """Projection of a product poset onto the factors listed in keep"""
    if not P.factors:
        raise PreconditionError("projection needs a product poset")
    target = product_poset(*[P.factors[i] for i in keep])
    if len(keep) == 1:
        assignment = {s: s[keep[0]] for s in P.elements}
    else:
        assignment = {s: tuple(s[i] for i in keep) for s in P.elements}
    return PosetMap(P, target, assignment, "projection", validate=False)


def to_point(P: FacePoset) -> PosetMap:
    pt = face_poset(SimplicialComplex.point())
    return PosetMap(P, pt, {s: (0,) for s in P.elements}, "projection", validate=False)


def swap_map(P: FacePoset) -> PosetMap:
    """Coordinate swap (x, y) -> (y, x) on a binary product"""
    if len(P.factors) != 2:
        raise PreconditionError("swap needs a binary product poset")
    target = product_poset(P.factors[1], P.factors[0])
    return PosetMap(P, target, {(a, b): (b, a) for a, b in P.elements}, "general", validate=False)


def product_map(f: PosetMap, g: PosetMap, kind: str = "general") -> PosetMap:
    """f × g between binary products"""
    source = product_poset(f.source, g.source)
    target = product_poset(f.target, g.target)
    return PosetMap(source, target, {(a, b): (f(a), g(b)) for a, b in source.elements}, kind)


@dataclass
class ProductGeometry:
    """Staircase refinement R of |K| x |L| with q: R -> S x T and the diagonal of R"""

    K: SimplicialComplex
    L: SimplicialComplex
    S: FacePoset
    T: FacePoset
    product: FacePoset
    R_complex: SimplicialComplex
    R: FacePoset
    q: PosetMap
    diagonal: FrozenSet = field(default_factory=frozenset)

    def diagonal_map(self) -> PosetMap:
        """Δ: S -> R onto the diagonal subcomplex"""
        assignment = {s: tuple((v, v) for v in s) for s in self.S.elements}
        return PosetMap(self.S, self.R, assignment, "diagonal")


def staircase(K: SimplicialComplex, L: Optional[SimplicialComplex] = None) -> ProductGeometry:
    """
    Staircase triangulation of |K| x |L|: simplices are chains of vertex pairs, strictly
    increasing in the product of the vertex orders, whose coordinates span simplices.
    """
    L = L or K
    simplices_K, simplices_L = set(K.simplices), set(L.simplices)
    pairs = [(a, b) for a in K.vertices for b in L.vertices]

    def span(vs, X):
        return X.normalize(vs)

    found: List[Tuple] = []

    def extend(chain):
        found.append(tuple(chain))
        a0, b0 = chain[-1]
        for a, b in pairs:
            if (a, b) == (a0, b0):
                continue
            if K.vertex_index(a) < K.vertex_index(a0) or L.vertex_index(b) < L.vertex_index(b0):
                continue
            new = chain + [(a, b)]
            if span([p[0] for p in new], K) in simplices_K and span([p[1] for p in new], L) in simplices_L:
                extend(new)

    for p in pairs:
        extend([p])
    R_complex = SimplicialComplex(pairs, found)
    R = face_poset(R_complex)
    S, T = face_poset(K), face_poset(L)
    product = product_poset(S, T)
    q = PosetMap(R, product, {r: (span([p[0] for p in r], K), span([p[1] for p in r], L)) for r in R.elements},
                 "refinement")
    diagonal = frozenset(r for r in R.elements if all(a == b for a, b in r)) if L is K else frozenset()
    logger.debug(f"staircase: {len(R)} simplices over {len(product)} product cells")
    return ProductGeometry(K, L, S, T, product, R_complex, R, q, diagonal)


def coarsening(fine: FacePoset, coarse: FacePoset, assignment: Dict[Hashable, Hashable]) -> PosetMap:
    """Refinement map from a subdivision to the stratification it refines"""
    return PosetMap(fine, coarse, assignment, "refinement")


def subdivision_map(n_edges: int) -> PosetMap:
    """Refinement from the subdivided interval with n_edges edges onto the standard interval"""
    fine = face_poset(SimplicialComplex.path(n_edges))
    coarse = face_poset(SimplicialComplex.interval())
    assignment = {}
    for s in fine.elements:
        if s == (0,):
            assignment[s] = (0,)
        elif s == (n_edges,):
            assignment[s] = (1,)
        else:
            assignment[s] = (0, 1)
    return coarsening(fine, coarse, assignment)
