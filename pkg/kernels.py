"""
Kernels
Exterior products, convolution, kernel composition, the right adjoint hom-kernel,
localization along refinements, the identity kernel, duality data and reconstruction
of a kernel from its action on generators
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Optional, Tuple

import numpy as np

from errors import BudgetExceededError, PreconditionError, ValidationError
from linalg import ChainMap, Complex, FieldConfig, Matrix, tensor_complex, tensor_map
from posets import (FacePoset, PosetMap, ProductGeometry, SimplicialComplex, identity_map, product_map,
                    product_poset, projection, staircase, swap_map)
from sheaves import (IndicatorComplex, IndicatorMap, Sheaf, SheafMap, derived_hom, indicator,
                     locally_closed_constant, proj_resolve, random_sheaf, sheaf_hom, tensor)
from six_functors import (dualizing, gamma_c, pullback_map, pullback_star, push_shriek_proj,
                          push_shriek_proj_map, push_star)
from utils import Utils

logger = logging.getLogger(__name__)

# a kernel is a sheaf on a binary product S×T, source first
Kernel = Sheaf

MAX_TRIPLE_PRODUCT = 729


def kernel_factors(K: Kernel) -> Tuple[FacePoset, FacePoset]:
    if len(K.base.factors) != 2:
        raise PreconditionError("a kernel must live on a binary product poset")
    return K.base.factors[0], K.base.factors[1]


def _check_budget(size: int, budget: Optional[int], what: str):
    limit = MAX_TRIPLE_PRODUCT if budget is None else budget
    if size > limit:
        raise BudgetExceededError(f"{what} has {size} strata, budget is {limit}")


def _external_presentation(P: IndicatorComplex, Q: IndicatorComplex, base: FacePoset) -> IndicatorComplex:
    """1_a ⊠ 1_b = 1_(a,b) with differential D⊗1 + (-1)^{n_g} 1⊗D'"""
    field = P.field
    index = {}
    gens = []
    for g, (a, n) in enumerate(P.generators):
        for h, (b, m) in enumerate(Q.generators):
            index[(g, h)] = len(gens)
            gens.append(((a, b), n + m))
    entries = []
    cols, other_cols = P.D.columns(), Q.D.columns()
    for (g, h), k in index.items():
        for g2, v in cols.get(g, []):
            entries.append((index[(g2, h)], k, v))
        sign = field.sign(P.generators[g][1])
        for h2, v in other_cols.get(h, []):
            entries.append((index[(g, h2)], k, sign * v))
    D = Matrix.from_entries(field, len(gens), len(gens), entries)
    return IndicatorComplex(base, field, gens, D, validate=False)


def boxtimes(F: Sheaf, G: Sheaf) -> Sheaf:
    """(F⊠G)(s,t) = F(s)⊗G(t); presented inputs give the presented product"""
    base = product_poset(F.base, G.base)
    if F.presentation is not None and G.presentation is not None:
        return _external_presentation(F.presentation, G.presentation, base).realize()
    values = {(s, t): tensor_complex(F.value(s), G.value(t)) for s, t in base.elements}
    restrictions = {(x, y): tensor_map(F.restriction(x[0], y[0]), G.restriction(x[1], y[1]))
                    for x, y in base.covering_pairs()}
    return Sheaf(base, F.field, values, restrictions, validate=False)


def _tensor_pointwise(F: Sheaf, G: Sheaf) -> Sheaf:
    return tensor(F.without_presentation() if F.presentation is not None else F, G)


def _tensor_maps(f: SheafMap, g: SheafMap) -> SheafMap:
    source = _tensor_pointwise(f.source, g.source)
    target = _tensor_pointwise(f.target, g.target)
    return SheafMap(source, target, {x: tensor_map(f.component(x), g.component(x)) for x in f.base.elements},
                    validate=False)


def convolve(K: Kernel, F: Sheaf) -> Sheaf:
    """K∘F = π₂!(K ⊗ π₁*F)"""
    S, _ = kernel_factors(K)
    if F.base != S:
        raise PreconditionError("convolve: sheaf does not live on the kernel's source")
    P = K.base
    pulled = pullback_star(projection(P, [0]), F)
    return push_shriek_proj(projection(P, [1]), _tensor_pointwise(K, pulled))


def convolve_map(K: Kernel, f: SheafMap) -> SheafMap:
    """K∘f for a morphism f of sheaves on the source"""
    kernel_factors(K)
    P = K.base
    pulled = pullback_map(projection(P, [0]), f)
    identity = SheafMap.identity(K)
    return push_shriek_proj_map(projection(P, [1]), _tensor_maps(identity, pulled))


def compose_kernels(K: Kernel, L: Kernel, budget: Optional[int] = None) -> Kernel:
    """L∘K = π₁₃!(π₂₃*L ⊗ π₁₂*K) for K on X₁×X₂ and L on X₂×X₃"""
    X1, X2 = kernel_factors(K)
    X2b, X3 = kernel_factors(L)
    if X2 != X2b:
        raise PreconditionError("compose: middle factors differ")
    P = product_poset(X1, X2, X3)
    _check_budget(len(P), budget, "triple product")
    inner = _tensor_pointwise(pullback_star(projection(P, [1, 2]), L), pullback_star(projection(P, [0, 1]), K))
    return push_shriek_proj(projection(P, [0, 2]), inner)


def swap_kernel(K: Kernel) -> Kernel:
    """Pullback along (y, x) -> (x, y)"""
    S, T = kernel_factors(K)
    return pullback_star(swap_map(product_poset(T, S)), K)


def hom_kernel_right_adjoint(G: Kernel, H: Kernel, budget: Optional[int] = None) -> Kernel:
    """
    Right adjoint to F ↦ G∘F: π₁₂* sHom(π₂₃*G, π₁₃^!H), with π₁₃^! = π₁₃* ⊗ π₂*ω
    for G on X₂×X₃ and H on X₁×X₃.
    """
    X2, X3 = kernel_factors(G)
    X1, X3b = kernel_factors(H)
    if X3 != X3b:
        raise PreconditionError("hom kernel: target factors differ")
    P = product_poset(X1, X2, X3)
    _check_budget(len(P), budget, "triple product")
    omega = pullback_star(projection(P, [1]), dualizing(X2, G.field))
    twisted = _tensor_pointwise(pullback_star(projection(P, [0, 2]), H), omega)
    inner = sheaf_hom(pullback_star(projection(P, [1, 2]), G), twisted)
    return push_star(projection(P, [0, 1]), inner)


def left_kan_localize(q: PosetMap, F: Sheaf) -> Sheaf:
    """ι* along a refinement: resolve by indicators and relabel 1_r ↦ 1_{q(r)}"""
    q.require("refinement")
    if F.base != q.source:
        raise PreconditionError("localize: sheaf does not live on the refinement")
    P = proj_resolve(F).complex
    generators = [(q(s), n) for s, n in P.generators]
    return IndicatorComplex(q.target, F.field, generators, P.D, validate=False).realize()


def localize_kernel(q: PosetMap, K: Kernel) -> Kernel:
    """ι* of a kernel on R×R onto S×S"""
    return left_kan_localize(product_map(q, q, "refinement"), K)


def coarse_source_pullback(q: PosetMap, K: Kernel) -> Kernel:
    """A kernel on S×S viewed on R×S by pulling back its source factor"""
    _, T = kernel_factors(K)
    return pullback_star(product_map(q, identity_map(T)), K)


def identity_kernel(K: SimplicialComplex, field: FieldConfig, geometry: Optional[ProductGeometry] = None) -> Kernel:
    """ι*(1_Δ): constant sheaf on the staircase diagonal, localized onto S×S"""
    geometry = geometry or staircase(K)
    diagonal = locally_closed_constant(geometry.R, field, geometry.diagonal)
    kernel = left_kan_localize(geometry.q, diagonal)
    logger.debug(f"identity kernel with {len(kernel.presentation)} generators")
    return kernel


def generator_map(base: FacePoset, field: FieldConfig, s, t) -> SheafMap:
    """The map 1_s -> 1_t for s <= t"""
    if not base.leq(s, t):
        raise PreconditionError(f"no map 1_{base.label(s)} -> 1_{base.label(t)}")
    source = IndicatorComplex.indicator(base, field, s)
    target = IndicatorComplex.indicator(base, field, t)
    return IndicatorMap(source, target, Matrix.identity(field, 1)).realize()


@dataclass
class DualityData:
    """Counit ε = p_!Δ* through the staircase and unit η = ι*Δ_*p*"""

    geometry: ProductGeometry
    field: FieldConfig
    eta: Kernel

    @property
    def base(self) -> FacePoset:
        return self.geometry.S

    def epsilon(self, M: Sheaf) -> Complex:
        fine = pullback_star(self.geometry.q, M)
        return gamma_c(pullback_star(self.geometry.diagonal_map(), fine))

    def _diagonal_assignment(self, b) -> Tuple:
        return self.geometry.q(self.geometry.diagonal_map()(b))

    def _contract_map(self, first: bool) -> PosetMap:
        """(a, b) -> (a, b, b) when first, else (b, c) -> (b, b, c), through q∘Δ"""
        S = self.base
        P = product_poset(S, S, S)
        source = product_poset(S, S)
        if first:
            assignment = {(a, b): (a,) + self._diagonal_assignment(b) for a, b in source.elements}
        else:
            assignment = {(b, c): self._diagonal_assignment(b) + (c,) for b, c in source.elements}
        return PosetMap(source, P, assignment, validate=False)

    def triangle(self, F: Sheaf, first: bool = True) -> Sheaf:
        """(id⊗ε)∘(η⊗id) applied to F when first, else (ε⊗id)∘(id⊗η)"""
        S = self.base
        P = product_poset(S, S, S)
        if first:
            M = _tensor_pointwise(pullback_star(projection(P, [0, 1]), self.eta),
                                  pullback_star(projection(P, [2]), F))
        else:
            M = _tensor_pointwise(pullback_star(projection(P, [1, 2]), self.eta),
                                  pullback_star(projection(P, [0]), F))
        contracted = pullback_star(self._contract_map(first), M)
        return push_shriek_proj(projection(contracted.base, [0] if first else [1]), contracted)

    def triangle_map(self, f: SheafMap, first: bool = True) -> SheafMap:
        S = self.base
        P = product_poset(S, S, S)
        eta = SheafMap.identity(self.eta)
        if first:
            M = _tensor_maps(pullback_map(projection(P, [0, 1]), eta), pullback_map(projection(P, [2]), f))
        else:
            M = _tensor_maps(pullback_map(projection(P, [1, 2]), eta), pullback_map(projection(P, [0]), f))
        contract = self._contract_map(first)
        contracted = pullback_map(contract, M)
        return push_shriek_proj_map(projection(contract.source, [0] if first else [1]), contracted)


def duality_data(K: SimplicialComplex, field: FieldConfig) -> DualityData:
    geometry = staircase(K)
    eta = swap_kernel(identity_kernel(K, field, geometry))
    return DualityData(geometry, field, eta)


def _generator_records(name: str, base: FacePoset, field: FieldConfig, apply, apply_map) -> List[Dict[str, Any]]:
    records = []
    for s in base.elements:
        expected = indicator(base, field, s).stalk_cohomology()
        got = apply(indicator(base, field, s)).stalk_cohomology()
        records.append(Utils.check_record(f"{name} 1_{base.label(s)}", Utils.format_stalks(base, expected),
                                          Utils.format_stalks(base, got)))
    for s, t in base.covering_pairs():
        iota = generator_map(base, field, s, t)
        expected = iota.cohomology_ranks()
        got = apply_map(iota).cohomology_ranks()
        records.append(Utils.check_record(f"{name} 1_{base.label(s)}->1_{base.label(t)}",
                                          Utils.format_rank_table(base, expected),
                                          Utils.format_rank_table(base, got)))
    return records


def check_triangles(data: DualityData) -> List[Dict[str, Any]]:
    """Both triangle identities on every generator and generator map"""
    records = []
    for first, label in ((True, "triangle (id⊗ε)(η⊗id)"), (False, "triangle (ε⊗id)(id⊗η)")):
        records.extend(_generator_records(label, data.base, data.field,
                                          lambda F, first=first: data.triangle(F, first),
                                          lambda f, first=first: data.triangle_map(f, first)))
    logger.info(f"triangle identities: {sum(r['passed'] for r in records)}/{len(records)} checks passed")
    return records


def standard_dual(F: Sheaf) -> Sheaf:
    """
    SD(F) by dualizing an indicator presentation: SD(1_s) has a generator for every τ in str(s)
    in degree -dim τ, and Hom(SD F, G) = p_!(F ⊗ G).
    """
    base, field = F.base, F.field
    P = proj_resolve(F).complex
    gens, index = [], {}
    for g, (s, n) in enumerate(P.generators):
        for tau in base.sorted(base.star(s)):
            index[(g, tau)] = len(gens)
            gens.append((tau, -base.dim(tau) - n))
    entries = []
    for (g, upsilon), k in index.items():
        s, n = P.generators[g]
        sign = field.sign(n)
        for tau in base.covers_above(upsilon):
            if (g, tau) in index:
                e = base.incidence(upsilon, tau) * (-1) ** base.dim(tau)
                entries.append((index[(g, tau)], k, sign * field(e)))
    for g, h, v in P.D.entries():
        # 1_{s_h} -> 1_{s_g} dualizes to SD(1_{s_g}) -> SD(1_{s_h}) on the smaller star
        for tau in base.star(P.generators[h][0]):
            entries.append((index[(h, tau)], index[(g, tau)], v))
    D = Matrix.from_entries(field, len(gens), len(gens), entries)
    return IndicatorComplex(base, field, gens, D, validate=False).realize()


def pairing_dims(F: Sheaf, G: Sheaf) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Graded dims of Hom(SD F, G) and p_!(F ⊗ G)"""
    return derived_hom(standard_dual(F), G).cohomology(), gamma_c(tensor(F, G)).cohomology()


def kernel_action(K: Kernel, field: FieldConfig) -> Tuple[Dict[Hashable, Sheaf], Dict[Tuple, SheafMap]]:
    """K∘1_s for every generator and K∘(1_s -> 1_t) for every covering pair"""
    S, _ = kernel_factors(K)
    table = {s: convolve(K, indicator(S, field, s)) for s in S.elements}
    maps = {(s, t): convolve_map(K, generator_map(S, field, s, t)) for s, t in S.covering_pairs()}
    return table, maps


def action_records(name: str, K1: Kernel, K2: Kernel, field: FieldConfig) -> List[Dict[str, Any]]:
    """Compare two kernels by their action on generators and generator maps"""
    S, T = kernel_factors(K1)
    records = []
    for s in S.elements:
        a = convolve(K1, indicator(S, field, s)).stalk_cohomology()
        b = convolve(K2, indicator(S, field, s)).stalk_cohomology()
        records.append(Utils.check_record(f"{name} on 1_{S.label(s)}", Utils.format_stalks(T, a),
                                          Utils.format_stalks(T, b)))
    for s, t in S.covering_pairs():
        iota = generator_map(S, field, s, t)
        a = convolve_map(K1, iota).cohomology_ranks()
        b = convolve_map(K2, iota).cohomology_ranks()
        records.append(Utils.check_record(f"{name} on 1_{S.label(s)}->1_{S.label(t)}",
                                          Utils.format_rank_table(T, a), Utils.format_rank_table(T, b)))
    return records


class _FunctorTable:
    """Generator table with composites along chains, checked for functoriality"""

    def __init__(self, S: FacePoset, table: Dict[Hashable, Sheaf], maps: Dict[Tuple, SheafMap]):
        self.S = S
        self.table = table
        self.maps = maps
        self._composites: Dict[Tuple, SheafMap] = {}
        missing = [s for s in S.elements if s not in table]
        if missing:
            raise ValidationError(f"functor table misses generator 1_{S.label(missing[0])}")
        for s, t in S.covering_pairs():
            if (s, t) not in maps:
                raise ValidationError(f"functor table misses the map for {S.label(s)} <= {S.label(t)}")
        self.validate()

    def composite(self, s, u) -> SheafMap:
        """Image of 1_s -> 1_u"""
        if s == u:
            return SheafMap.identity(self.table[s])
        if (s, u) not in self._composites:
            t = next(t for t in self.S.covers_above(s) if self.S.leq(t, u))
            self._composites[(s, u)] = self.composite(t, u).compose(self.maps[(s, t)])
        return self._composites[(s, u)]

    def validate(self):
        S = self.S
        for s in S.elements:
            for u in S.up(s):
                if u == s:
                    continue
                first = self.composite(s, u)
                for t in S.covers_above(s):
                    if S.leq(t, u) and self.composite(t, u).compose(self.maps[(s, t)]) != first:
                        raise ValidationError(f"non-functorial table: routes {S.label(s)} -> {S.label(u)} disagree")


def reconstruct_kernel(S: FacePoset, T: FacePoset, table: Dict[Hashable, Sheaf], maps: Dict[Tuple, SheafMap],
                       field: FieldConfig, identity: Optional[Kernel] = None) -> Kernel:
    """
    Kernel of a functor given on generators: totalize 1_{a_g} ⊠ Φ(1_{b_g})[-n_g] over the
    presentation generators (a_g, b_g, n_g) of the identity kernel.
    """
    functor = _FunctorTable(S, table, maps)
    for s, F in table.items():
        if F.base != T:
            raise ValidationError(f"table value at 1_{S.label(s)} does not live on the target")
    if identity is None:
        if S.complex is None:
            raise PreconditionError("reconstruction needs the simplicial complex of the source")
        identity = identity_kernel(S.complex, field)
    P = identity.presentation
    gens = [(a, b, n) for (a, b), n in P.generators]
    base = product_poset(S, T)
    D_cols = P.D.columns()
    layouts: Dict[Hashable, Dict[int, List[Tuple[int, int]]]] = {}
    offsets: Dict[Hashable, Dict[Tuple[int, int], int]] = {}
    values: Dict[Hashable, Complex] = {}
    for x, y in base.elements:
        layout: Dict[int, List[Tuple[int, int]]] = {}
        for g, (a, b, n) in enumerate(gens):
            if S.leq(x, a):
                V = table[b].value(y)
                for m in V.degrees():
                    layout.setdefault(m + n, []).append((g, m))
        offs, dims = {}, {}
        for N, blocks in layout.items():
            off = 0
            for g, m in blocks:
                offs[(g, m)] = off
                off += table[gens[g][1]].value(y).dim(m)
            dims[N] = off
        entries: Dict[int, list] = {N: [] for N in dims}
        for N, blocks in layout.items():
            for g, m in blocks:
                a, b, n = gens[g]
                V = table[b].value(y)
                col = offs[(g, m)]
                if (g, m + 1) in offs:
                    row = offs[(g, m + 1)]
                    sign = field.sign(n)
                    entries[N].extend((row + i, col + j, sign * v) for i, j, v in V.diff(m).entries())
                for h, coeff in D_cols.get(g, []):
                    if (h, m) not in offs:
                        continue
                    f = functor.composite(b, gens[h][1]).component(y).component(m)
                    row = offs[(h, m)]
                    entries[N].extend((row + i, col + j, coeff * v) for i, j, v in f.entries())
        d = {N: Matrix.from_entries(field, dims.get(N + 1, 0), dims[N], entries[N]) for N in dims}
        values[(x, y)] = Complex(field, dims, d, validate=False)
        layouts[(x, y)] = layout
        offsets[(x, y)] = offs
    restrictions = {}
    for p, q in base.covering_pairs():
        comps = {}
        for N, blocks in layouts[q].items():
            entries = []
            for g, m in blocks:
                if (g, m) not in offsets[p]:
                    continue
                f = table[gens[g][1]].restriction(p[1], q[1]).component(m)
                row, col = offsets[p][(g, m)], offsets[q][(g, m)]
                entries.extend((row + i, col + j, v) for i, j, v in f.entries())
            comps[N] = Matrix.from_entries(field, values[p].dim(N), values[q].dim(N), entries)
        restrictions[(p, q)] = ChainMap(values[q], values[p], comps, validate=False)
    logger.debug(f"reconstructed kernel from {len(gens)} identity-kernel generators")
    return Sheaf(base, field, values, restrictions, validate=False)


def random_kernel(S: FacePoset, T: FacePoset, field: FieldConfig, rng: np.random.Generator,
                  max_terms: int = 3) -> Kernel:
    return random_sheaf(product_poset(S, T), field, rng, max_terms=max_terms)


def lad_ker_composites(q: PosetMap, K: Kernel, F: Sheaf) -> List[Sheaf]:
    """
    For a refinement q: R -> S, a kernel K on R×R and F on R: ι*(K∘q*ι*F), (ι*K)∘F and
    (ι*K)∘q*ι*F, all on S.
    """
    coarse = left_kan_localize(q, F)
    refined = pullback_star(q, coarse)
    localized = coarse_source_pullback(q, localize_kernel(q, K))
    first = left_kan_localize(q, convolve(K, refined))
    second = convolve(localized, F)
    third = convolve(localized, refined)
    return [first, second, third]
