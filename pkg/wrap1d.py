"""
Wrap 1D
Circles and intervals with stops: the stratification and its fine grid, rotation
kernels, localization onto the stop-constrained subcategory, the wrap-once functors
and the duality checks built on them
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Hashable, List, Optional, Tuple, Union

import pandas as pd

from errors import BudgetExceededError, PreconditionError
from kernels import Kernel, boxtimes, convolve, convolve_map, generator_map, standard_dual
from linalg import ChainMap, Complex, FieldConfig, Matrix
from microlocal import SignAssignment, link_keys, microstalk
from posets import (FacePoset, PosetMap, SimplicialComplex, coarsening, face_poset, inclusion, product_poset,
                    staircase)
from sheaves import (HomModel, IndicatorComplex, Sheaf, SheafMap, bar_map, bar_resolution, derived_hom,
                     global_sections, hom_precompose, indicator, proj_resolve, tensor)
from six_functors import (dualizing, gamma_c, naive_dual, pullback_star, shriek_restrict_closed,
                          verdier_dual)
from utils import Utils

logger = logging.getLogger(__name__)

BASE_KINDS = ("circle", "interval")
CODIRECTIONS = ("+", "-")
MAX_LOCALIZATION_STEPS = 64
MIN_GRID_STEPS = 3

Path = Tuple[Tuple[Hashable, Hashable], ...]


@dataclass(frozen=True)
class StopConfig:
    """
    A circle with marked points, or an interval with interior marked points, and for
    every marked point the codirections it contributes to Λ.
    """

    kind: str
    stops: Tuple[FrozenSet[str], ...]
    grid_steps: int = 3

    def __post_init__(self):
        if self.kind not in BASE_KINDS:
            raise PreconditionError(f"unknown base {self.kind!r}, expected one of {', '.join(BASE_KINDS)}")
        if self.kind == "circle" and not self.stops:
            raise PreconditionError("a circle needs at least one marked point")
        for stop in self.stops:
            if not set(stop) <= set(CODIRECTIONS):
                raise PreconditionError(f"codirections are '+' and '-', got {sorted(stop)}")
        if self.grid_steps < MIN_GRID_STEPS:
            raise PreconditionError(f"grid_steps must be at least {MIN_GRID_STEPS} steps per gap, "
                                    f"got {self.grid_steps}")

    @classmethod
    def full(cls, kind: str, points: int, grid_steps: int = 3) -> "StopConfig":
        return cls(kind, tuple(frozenset(CODIRECTIONS) for _ in range(points)), grid_steps)

    @property
    def points(self) -> int:
        return len(self.stops)

    @property
    def is_full(self) -> bool:
        return all(stop == frozenset(CODIRECTIONS) for stop in self.stops)

    @property
    def is_empty(self) -> bool:
        return not any(self.stops)

    def refined(self, factor: int = 2) -> "StopConfig":
        """Same stops on a grid with factor times more steps, so ε shrinks by that factor"""
        return replace(self, grid_steps=self.grid_steps * factor)

    def label(self) -> str:
        parts = [self.kind] + ["".join(d for d in CODIRECTIONS if d in stop) or "." for stop in self.stops]
        return " ".join(parts + ["grid", str(self.grid_steps)])


@dataclass
class Stratification:
    """The coarse stratification by marked points and arcs, refined by a fine grid"""

    config: StopConfig
    complex: SimplicialComplex
    fine: FacePoset
    coarse: FacePoset
    q: PosetMap
    marked: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.complex.vertices)

    @property
    def epsilon(self) -> Fraction:
        """One grid step, as a fraction of the gap between marked points"""
        return Fraction(1, self.config.grid_steps)

    def neighbours(self, v: int) -> Tuple[Optional[int], Optional[int]]:
        N = self.size
        if self.config.kind == "circle":
            return (v - 1) % N, (v + 1) % N
        return (v - 1 if v > 0 else None), (v + 1 if v < N - 1 else None)

    def left_edge(self, v: int):
        left, _ = self.neighbours(v)
        return None if left is None else self.complex.normalize((left, v))

    def right_edge(self, v: int):
        _, right = self.neighbours(v)
        return None if right is None else self.complex.normalize((v, right))

    def allowed(self, v: int) -> FrozenSet[str]:
        """Codirections in Λ at a grid vertex; interval endpoints impose nothing"""
        if v in self.marked:
            return self.config.stops[self.marked.index(v)]
        if self.config.kind == "interval" and v in (0, self.size - 1):
            return frozenset(CODIRECTIONS)
        return frozenset()

    def representative(self, c) -> Hashable:
        """A grid cell inside the coarse stratum c: the marked vertex, or a middle vertex of the arc"""
        cells = self.q.preimage([c])
        vertices = [s for s in cells if len(s) == 1] or cells
        return vertices[len(vertices) // 2]

    def coarse_stalks(self, F: Sheaf) -> Dict[Hashable, Dict[int, int]]:
        return {c: F.value(self.representative(c)).cohomology() for c in self.coarse.elements}


def _coarse_circle(n: int) -> Tuple[FacePoset, Any]:
    if n >= 3:
        K = SimplicialComplex.circle(n)
        return face_poset(K), lambda i: K.normalize((i, (i + 1) % n))
    # one or two marked points: arcs are not simplices, build the poset directly
    vertices = [(i,) for i in range(n)]
    arcs = [(i, (i + 1) % n) for i in range(n)]
    dims = {**{v: 0 for v in vertices}, **{a: 1 for a in arcs}}
    facets = {a: ({(a[0],): 0} if a[0] == a[1] else {(a[1],): 1, (a[0],): -1}) for a in arcs}
    return FacePoset(vertices + arcs, dims, facets), lambda i: arcs[i]


def stratify(cfg: StopConfig) -> Stratification:
    """
    Circle with n marked points: n vertices and n open arcs. Interval with n interior
    points: n + 2 vertices and n + 1 edges. Both come with a fine grid of
    cfg.grid_steps steps per gap and the refinement map onto the strata.
    """
    m, n = cfg.grid_steps, cfg.points
    if cfg.kind == "circle":
        N = n * m
        K = SimplicialComplex.circle(N)
        coarse, arc = _coarse_circle(n)
        marked = tuple(i * m for i in range(n))
    else:
        N = (n + 1) * m
        K = SimplicialComplex.path(N)
        coarse = face_poset(SimplicialComplex.path(n + 1))
        arc = lambda i: (i, i + 1)  # noqa: E731
        marked = tuple(i * m for i in range(1, n + 1))
    fine = face_poset(K)
    assignment = {}
    for s in fine.elements:
        if len(s) == 1:
            v = s[0]
            assignment[s] = (v // m,) if v % m == 0 else arc(v // m)
        else:
            start = s[1] if cfg.kind == "circle" and s == (0, N - 1) else s[0]
            assignment[s] = arc(start // m)
    q = coarsening(fine, coarse, assignment)
    logger.debug(f"stratified {cfg.label()}: {len(coarse)} strata, {len(fine)} grid cells")
    return Stratification(cfg, K, fine, coarse, q, marked)


def _open_reach(P: FacePoset, t) -> FrozenSet:
    """Union of the open stars of the vertices of t"""
    return frozenset().union(*(P.star((w,)) for w in t))


def _closed_reach(P: FacePoset, t) -> FrozenSet:
    """Closed star of a vertex, closure of an edge"""
    return P.up_closure(P.star(t)) if P.dim(t) == 0 else P.up(t)


def _constant_on(base: FacePoset, field: FieldConfig, support, value: Complex) -> Sheaf:
    identity = ChainMap.identity(value)
    return Sheaf(base, field, {x: value for x in support},
                 {(x, y): identity for x, y in base.covering_pairs() if x in support and y in support},
                 validate=False)


def _direction(sign: Union[int, str]) -> int:
    if sign in (1, "+"):
        return 1
    if sign in (-1, "-"):
        return -1
    raise PreconditionError(f"direction must be + or -, got {sign!r}")


@dataclass
class RotationKernel:
    """Push-off by ε along the circle or interval, as a kernel on grid × grid"""

    strata: Stratification
    direction: int
    epsilon: Fraction
    steps: int
    kernel: Kernel

    def apply(self, F: Sheaf) -> Sheaf:
        for _ in range(self.steps):
            F = convolve(self.kernel, F)
        return F

    def apply_map(self, f: SheafMap) -> SheafMap:
        for _ in range(self.steps):
            f = convolve_map(self.kernel, f)
        return f


def rotation_kernel(strata: Stratification, field: FieldConfig, direction: Union[int, str],
                    epsilon: Optional[Fraction] = None) -> RotationKernel:
    """
    One grid step: K_+ is k[1] on {(s, t): s in the open reach of t}, a zero-extension;
    K_- is k on {(s, t): s in the closed reach of t}. Larger ε convolves repeatedly.
    """
    direction = _direction(direction)
    epsilon = strata.epsilon if epsilon is None else Fraction(epsilon)
    if epsilon <= 0:
        raise PreconditionError("ε must be positive")
    if epsilon >= Fraction(1, 2):
        raise PreconditionError(f"ε = {epsilon} too large: it must stay below half the gap between marked points")
    steps = epsilon * strata.config.grid_steps
    if steps.denominator != 1:
        raise PreconditionError(f"ε = {epsilon} is not a whole number of grid steps of {strata.epsilon}")
    P = strata.fine
    base = product_poset(P, P)
    if direction > 0:
        support = {(s, t) for t in P.elements for s in _open_reach(P, t)}
        value = Complex.unit(field).shift(1)
    else:
        support = {(s, t) for t in P.elements for s in _closed_reach(P, t)}
        value = Complex.unit(field)
    kernel = _constant_on(base, field, support, value)
    return RotationKernel(strata, direction, epsilon, int(steps), kernel)


class StopLocalization:
    """
    The grid category with every restriction whose microstalk must vanish inverted.
    Inverted arrows have to form a forest; contracting it leaves a free category whose
    hom sets are paths of kept arrows. Arrows are covering pairs (s, t) read t -> s.
    """

    def __init__(self, strata: Stratification, budget: Optional[int] = None):
        self.strata = strata
        self.budget = MAX_LOCALIZATION_STEPS if budget is None else budget
        P = strata.fine
        self.inverted = set()
        for v in strata.complex.vertices:
            allowed = strata.allowed(v)
            for d, edge in (("+", strata.left_edge(v)), ("-", strata.right_edge(v))):
                if edge is not None and d not in allowed:
                    self.inverted.add((edge, (v,)))
        parent = {s: s for s in P.elements}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s, t in sorted(self.inverted, key=lambda a: (P.index(a[0]), P.index(a[1]))):
            a, b = find(s), find(t)
            if a == b:
                raise PreconditionError(f"inverted restrictions close a loop at {P.label(s)}: "
                                        f"the localization has infinite hom spaces")
            parent[b] = a
        self.component = {s: find(s) for s in P.elements}
        self.arrows: Dict[Hashable, List[Tuple[Hashable, Hashable]]] = {}
        for s, t in P.covering_pairs():
            if (s, t) in self.inverted:
                continue
            if self.component[s] == self.component[t]:
                raise PreconditionError(f"restriction {P.label(t)} -> {P.label(s)} becomes a loop: "
                                        f"the localization has infinite hom spaces")
            self.arrows.setdefault(self.component[t], []).append((s, t))
        self._check_acyclic()
        self._paths: Dict[Tuple[Hashable, Hashable], List[Path]] = {}
        self._representables: Dict[Hashable, Sheaf] = {}
        logger.debug(f"localization of {strata.config.label()}: {len(self.inverted)} inverted arrows, "
                     f"{len(set(self.component.values()))} objects")

    def _check_acyclic(self):
        state: Dict[Hashable, int] = {}
        for root in sorted(set(self.component.values()), key=self.strata.fine.index):
            if state.get(root):
                continue
            state[root] = 1
            stack = [(root, iter(self.arrows.get(root, [])))]
            while stack:
                node, it = stack[-1]
                arrow = next(it, None)
                if arrow is None:
                    state[node] = 2
                    stack.pop()
                    continue
                nxt = self.component[arrow[0]]
                if state.get(nxt) == 1:
                    raise PreconditionError("kept restrictions form a cycle: the localization has infinite hom spaces")
                if not state.get(nxt):
                    state[nxt] = 1
                    stack.append((nxt, iter(self.arrows.get(nxt, []))))

    def _component_paths(self, c, d) -> List[Path]:
        key = (c, d)
        if key not in self._paths:
            found: List[Path] = [()] if c == d else []
            for arrow in self.arrows.get(c, []):
                found.extend((arrow,) + p for p in self._component_paths(self.component[arrow[0]], d))
            if any(len(p) > self.budget for p in found):
                raise BudgetExceededError(f"localization paths longer than the step bound {self.budget}")
            self._paths[key] = found
        return self._paths[key]

    def homs(self, x, y) -> List[Path]:
        """Morphisms x -> y of the localized category"""
        return self._component_paths(self.component[x], self.component[y])

    def piece(self, s, t) -> Path:
        """The image of the restriction t -> s (s <= t)"""
        if s == t or (s, t) in self.inverted:
            return ()
        return ((s, t),)

    def _layout(self, P: IndicatorComplex):
        layouts: Dict[Hashable, Dict[int, List[Tuple[int, Path]]]] = {}
        for t in self.strata.fine.elements:
            by_degree: Dict[int, List[Tuple[int, Path]]] = {}
            for g, (s, n) in enumerate(P.generators):
                for path in self.homs(s, t):
                    by_degree.setdefault(n, []).append((g, path))
            layouts[t] = by_degree
        index = {t: {n: {key: i for i, key in enumerate(keys)} for n, keys in lay.items()}
                 for t, lay in layouts.items()}
        return layouts, index

    def localize(self, P: IndicatorComplex) -> Sheaf:
        """ι*: every 1_s becomes the representable of its image, generator maps precompose"""
        base, field = self.strata.fine, P.field
        layouts, index = self._layout(P)
        columns = P.D.columns()
        values = {}
        for t, lay in layouts.items():
            d = {}
            for n, keys in lay.items():
                rows = index[t].get(n + 1, {})
                entries = []
                for j, (g, path) in enumerate(keys):
                    for h, v in columns.get(g, []):
                        key = (h, self.piece(P.generators[g][0], P.generators[h][0]) + path)
                        entries.append((rows[key], j, v))
                d[n] = Matrix.from_entries(field, len(rows), len(keys), entries)
            values[t] = Complex(field, {n: len(keys) for n, keys in lay.items()}, d, validate=False)
        restrictions = {}
        for s, t in base.covering_pairs():
            step = self.piece(s, t)
            comps = {}
            for n, keys in layouts[t].items():
                rows = index[s][n]
                comps[n] = Matrix.from_entries(field, len(rows), len(keys),
                                               [(rows[(g, path + step)], j, field.one)
                                                for j, (g, path) in enumerate(keys)])
            restrictions[(s, t)] = ChainMap(values[t], values[s], comps, validate=False)
        return Sheaf(base, field, values, restrictions, validate=False)

    def unit(self, P: IndicatorComplex) -> SheafMap:
        """P -> ι*P, sending an active generator to its image under the restriction"""
        field = P.field
        source, target = P.realize(), self.localize(P)
        _, index = self._layout(P)
        comps = {}
        for t in self.strata.fine.elements:
            by_degree: Dict[int, List[int]] = {}
            for g in P.active(t):
                by_degree.setdefault(P.generators[g][1], []).append(g)
            pieces = {}
            for n, gens in by_degree.items():
                rows = index[t][n]
                entries = [(rows[(g, self.piece(t, P.generators[g][0]))], j, field.one) for j, g in enumerate(gens)]
                pieces[n] = Matrix.from_entries(field, len(rows), len(gens), entries)
            comps[t] = ChainMap(source.value(t), target.value(t), pieces, validate=False)
        return SheafMap(source, target, comps, validate=False)

    def representable(self, t, field: FieldConfig) -> Sheaf:
        if t not in self._representables:
            self._representables[t] = self.localize(IndicatorComplex.indicator(self.strata.fine, field, t))
        return self._representables[t]

    def _representable_map(self, s, t, field: FieldConfig) -> SheafMap:
        """ι*(1_s -> 1_t): a path from s becomes a path from t by precomposing t -> s"""
        source, target = self.representable(s, field), self.representable(t, field)
        step = self.piece(s, t)
        comps = {}
        for u in self.strata.fine.elements:
            paths = self.homs(s, u)
            if not paths:
                continue
            rows = {p: i for i, p in enumerate(self.homs(t, u))}
            M = Matrix.from_entries(field, len(rows), len(paths),
                                    [(rows[step + p], j, field.one) for j, p in enumerate(paths)])
            comps[u] = ChainMap(source.value(u), target.value(u), {0: M}, validate=False)
        return SheafMap(source, target, comps, validate=False)

    def shriek(self, G: Sheaf) -> Sheaf:
        """ι^! G(t) = RHom(ι*1_t, G), restrictions by precomposition"""
        base, field = self.strata.fine, G.field
        if G.base != base:
            raise PreconditionError("ι^!: sheaf does not live on the grid")
        values = {t: HomModel(bar_resolution(self.representable(t, field)).complex, G).complex
                  for t in base.elements}
        restrictions = {(s, t): hom_precompose(bar_map(self._representable_map(s, t, field)), G)
                        for s, t in base.covering_pairs()}
        return Sheaf(base, field, values, restrictions, validate=False)


def codirection_assignment(strata: Stratification, v: int, codirection: str) -> Optional[SignAssignment]:
    """'+' makes the left neighbour negative, '-' the right one; None past an interval end"""
    left, right = strata.neighbours(v)
    negative = left if codirection == "+" else right
    if negative is None:
        return None
    keys = link_keys(strata.fine, (v,))
    return SignAssignment((v,), tuple((w, -1 if w == negative else 1) for w in keys))


class WrapLab:
    """Rotation, localization and wrap-once functors on one stop configuration"""

    def __init__(self, cfg: StopConfig, field: FieldConfig, budget: Optional[int] = None):
        self.logger = logging.getLogger(__name__)
        self.config = cfg
        self.field = field
        self.budget = budget
        self.strata = stratify(cfg)
        self._localization: Optional[StopLocalization] = None
        self._kernels: Dict[int, RotationKernel] = {}
        self._omega: Optional[Sheaf] = None
        self._geometry = None

    @property
    def localization(self) -> StopLocalization:
        if self._localization is None:
            self._localization = StopLocalization(self.strata, self.budget)
        return self._localization

    @property
    def omega(self) -> Sheaf:
        if self._omega is None:
            self._omega = dualizing(self.strata.fine, self.field)
        return self._omega

    def kernel(self, sign: Union[int, str]) -> RotationKernel:
        direction = _direction(sign)
        if direction not in self._kernels:
            self._kernels[direction] = rotation_kernel(self.strata, self.field, direction)
        return self._kernels[direction]

    def _require_grid(self, F: Sheaf):
        if F.base != self.strata.fine:
            raise PreconditionError(f"sheaf does not live on the grid of {self.config.label()}")

    def push_off(self, F: Sheaf, sign: Union[int, str]) -> Sheaf:
        """T_{±ε}"""
        self._require_grid(F)
        return self.kernel(sign).apply(F)

    def localize(self, F: Sheaf) -> Sheaf:
        """ι*_Λ through an indicator resolution of F"""
        self._require_grid(F)
        return self.localization.localize(proj_resolve(F).complex)

    def unit(self, F: Sheaf) -> SheafMap:
        """Unit from the resolution of F to ι*_Λ F"""
        self._require_grid(F)
        return self.localization.unit(proj_resolve(F).complex)

    def shriek_localize(self, G: Sheaf) -> Sheaf:
        self._require_grid(G)
        return self.localization.shriek(G)

    def wrap_once(self, F: Sheaf, sign: Union[int, str]) -> Sheaf:
        """S⁺ = ι* ∘ T_ε and S⁻ = ι^! ∘ T_{-ε}"""
        if _direction(sign) > 0:
            return self.localize(self.push_off(F, 1))
        return self.shriek_localize(self.push_off(F, -1))

    def generators(self) -> Dict[str, Sheaf]:
        """Pulled-back indicators of the strata, localized when Λ is not full"""
        out = {}
        for c in self.strata.coarse.elements:
            F = pullback_star(self.strata.q, indicator(self.strata.coarse, self.field, c))
            out[f"1_{self.strata.coarse.label(c)}"] = F if self.config.is_full else self.localize(F)
        return out

    def standard_dual(self, F: Sheaf) -> Sheaf:
        """SD_Λ(F) = ι*(SD F): Hom(SD_Λ F, G) = p_!(F ⊗ G) for G in the subcategory"""
        self._require_grid(F)
        return self.localization.localize(proj_resolve(standard_dual(F)).complex)

    def _iso_records(self, name: str, expected: Sheaf, got: Sheaf) -> List[Dict[str, Any]]:
        base = self.strata.fine

        def ranks(F):
            return {(s, t): F.restriction(s, t).cohomology_ranks() for s, t in base.covering_pairs()}

        return [
            Utils.check_record(f"{name} stalks", Utils.format_stalks(base, expected.stalk_cohomology()),
                               Utils.format_stalks(base, got.stalk_cohomology())),
            Utils.check_record(f"{name} restrictions", Utils.format_restriction_ranks(base, ranks(expected)),
                               Utils.format_restriction_ranks(base, ranks(got))),
        ]

    def sabloff_serre_tables(self, F: Sheaf, G: Sheaf) -> Dict[str, Dict[int, int]]:
        """The graded dimensions that Serre duality by wrapping identifies"""
        self._require_grid(F)
        self._require_grid(G)
        omega = self.omega
        twisted = tensor(G, omega)
        return {
            "Hom(T+F, G⊗ω)": derived_hom(self.push_off(F, 1), twisted).cohomology(),
            "Hom(F, T-(G⊗ω))": derived_hom(F, self.push_off(twisted, -1)).cohomology(),
            "Hom(S+F, G⊗ω)": derived_hom(self.wrap_once(F, 1), twisted).cohomology(),
            "Hom(F, S-(G⊗ω))": derived_hom(F, self.wrap_once(twisted, -1)).cohomology(),
            "p!(VD(F)⊗G)": gamma_c(tensor(verdier_dual(F, omega), G)).cohomology(),
            "Hom(G,F)^∨": {-n: d for n, d in derived_hom(G, F).cohomology().items()},
        }

    def sabloff_serre_check(self, F: Sheaf, G: Sheaf, name: str = "sabloff-serre") -> List[Dict[str, Any]]:
        tables = self.sabloff_serre_tables(F, G)
        expected = Utils.format_graded(tables.pop("Hom(G,F)^∨"))
        return [Utils.check_record(f"{name} {key} vs Hom(G,F)^∨", expected, Utils.format_graded(dims))
                for key, dims in tables.items()]

    def verdier_standard_compare(self, F: Sheaf, name: str = "verdier-standard") -> List[Dict[str, Any]]:
        """SD(F) against S⁺(ND F), and VD(F) against S⁻(SD F) ⊗ ω"""
        sd = self.standard_dual(F)
        records = self._iso_records(f"{name} SD(F) vs S+(ND F)", sd, self.wrap_once(naive_dual(F), 1))
        wrapped = tensor(self.wrap_once(sd, -1), self.omega)
        records.extend(self._iso_records(f"{name} VD(F) vs S-(SD F)⊗ω", verdier_dual(F, self.omega), wrapped))
        return records

    def invertibility_check(self, F: Sheaf, name: str = "invertibility") -> List[Dict[str, Any]]:
        """S⁻S⁺F and S⁺S⁻F against F"""
        records = self._iso_records(f"{name} S-S+", F, self.wrap_once(self.wrap_once(F, 1), -1))
        records.extend(self._iso_records(f"{name} S+S-", F, self.wrap_once(self.wrap_once(F, -1), 1)))
        return records

    def perturbation_check(self, F: Sheaf, G: Sheaf, name: str = "perturbation") -> Dict[str, Any]:
        """Hom(F, G) against Hom(F, T_ε G)"""
        expected = derived_hom(F, G).cohomology()
        got = derived_hom(F, self.push_off(G, 1)).cohomology()
        return Utils.check_record(name, Utils.format_graded(expected), Utils.format_graded(got))

    def inverse_kernel_records(self, name: str = "rotation inverse") -> List[Dict[str, Any]]:
        """T_-T_+ and T_+T_- act as the identity on grid generators and generator maps"""
        base, field = self.strata.fine, self.field
        plus, minus = self.kernel(1), self.kernel(-1)
        records = []
        for s in base.elements:
            one = indicator(base, field, s)
            expected = Utils.format_stalks(base, one.stalk_cohomology())
            for label, first, second in (("T-T+", plus, minus), ("T+T-", minus, plus)):
                got = second.apply(first.apply(one)).stalk_cohomology()
                records.append(Utils.check_record(f"{name} {label} 1_{base.label(s)}", expected,
                                                  Utils.format_stalks(base, got)))
        for s, t in base.covering_pairs():
            iota = generator_map(base, field, s, t)
            got = minus.apply_map(plus.apply_map(iota)).cohomology_ranks()
            records.append(Utils.check_record(f"{name} T-T+ 1_{base.label(s)}->1_{base.label(t)}",
                                              Utils.format_rank_table(base, iota.cohomology_ranks()),
                                              Utils.format_rank_table(base, got)))
        return records

    def verdier_pairing_check(self, F: Sheaf, G: Sheaf, name: str = "verdier pairing") -> Dict[str, Any]:
        """Hom(VD F, G) against p_*Δ^!(F ⊠ G), with Δ^! taken on the staircase of the grid square"""
        if self._geometry is None:
            self._geometry = staircase(self.strata.complex)
        geometry = self._geometry
        expected = derived_hom(verdier_dual(F, self.omega), G).cohomology()
        fine = pullback_star(geometry.q, boxtimes(F, G))
        diagonal = shriek_restrict_closed(inclusion(geometry.R, geometry.diagonal), fine)
        got = global_sections(diagonal).cohomology()
        return Utils.check_record(name, Utils.format_graded(expected), Utils.format_graded(got))

    def microstalk_table(self, F: Sheaf) -> pd.DataFrame:
        """Microstalks at every grid vertex and codirection"""
        rows = []
        for v in self.strata.complex.vertices:
            allowed = self.strata.allowed(v)
            for d in CODIRECTIONS:
                xi = codirection_assignment(self.strata, v, d)
                if xi is None:
                    continue
                rows.append({
                    "vertex": v,
                    "codirection": d,
                    "in_stop": d in allowed,
                    "cohomology": Utils.format_graded(microstalk(F, xi).cohomology()),
                })
        return pd.DataFrame(rows, columns=["vertex", "codirection", "in_stop", "cohomology"])

    def microstalk_check(self, F: Sheaf, name: str = "microstalks off Λ") -> Dict[str, Any]:
        table = self.microstalk_table(F)
        off = table[~table["in_stop"] & (table["cohomology"] != "0")]
        got = "; ".join(f"{v}{d}={c}" for v, d, c in zip(off["vertex"], off["codirection"], off["cohomology"]))
        return Utils.check_record(name, "0", got or "0")

    def wrap_orbit(self, F: Sheaf, steps: int) -> pd.DataFrame:
        """Coarse stalks of F, S⁺F, ..., (S⁺)^steps F"""
        rows = []
        current = F
        for k in range(steps + 1):
            rows.append({"step": k,
                         "stalks": Utils.format_stalks(self.strata.coarse, self.strata.coarse_stalks(current))})
            if k < steps:
                current = self.wrap_once(current, 1)
        self.logger.debug(f"wrap orbit of length {steps} on {self.config.label()}")
        return pd.DataFrame(rows, columns=["step", "stalks"])


def epsilon_stability_check(cfg: StopConfig, field: FieldConfig, budget: Optional[int] = None,
                            factor: int = 2) -> List[Dict[str, Any]]:
    """Coarse stalks of S⁺ and S⁻ on every generator agree after refining the grid"""
    coarse_lab, fine_lab = WrapLab(cfg, field, budget), WrapLab(cfg.refined(factor), field, budget)
    coarse_gens, fine_gens = coarse_lab.generators(), fine_lab.generators()
    records = []
    for label in coarse_gens:
        for sign in (1, -1):
            tables = []
            for lab, gens in ((coarse_lab, coarse_gens), (fine_lab, fine_gens)):
                wrapped = lab.wrap_once(gens[label], sign)
                tables.append(Utils.format_stalks(lab.strata.coarse, lab.strata.coarse_stalks(wrapped)))
            records.append(Utils.check_record(f"ε-stability {cfg.label()} S{'+' if sign > 0 else '-'} {label}",
                                              tables[0], tables[1]))
    return records
