"""
Six Functors
Pullbacks and pushforwards along poset maps, recollement functors, compactly
supported sections, the dualizing sheaf and naive/Verdier duality
"""

import logging
from itertools import combinations
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from errors import PreconditionError
from linalg import ChainMap, Complex, HolimModel, Matrix, dual, dual_map
from posets import FacePoset, PosetMap, inclusion
from sheaves import Sheaf, SheafMap, constant_sheaf, sheaf_fiber, sheaf_hom

logger = logging.getLogger(__name__)


def pullback_star(f: PosetMap, G: Sheaf) -> Sheaf:
    """(f*G)(s) = G(f(s)) with induced restrictions"""
    if G.base != f.target:
        raise PreconditionError("pullback: sheaf does not live on the target poset")
    S = f.source
    values = {s: G.value(f(s)) for s in S.elements}
    restrictions = {(s, t): G.restriction(f(s), f(t)) for s, t in S.covering_pairs()}
    return Sheaf(S, G.field, values, restrictions, validate=False)


def pullback_map(f: PosetMap, phi: SheafMap) -> SheafMap:
    return SheafMap(pullback_star(f, phi.source), pullback_star(f, phi.target),
                    {s: phi.component(f(s)) for s in f.source.elements}, validate=False)


def _push_star_models(f: PosetMap, F: Sheaf) -> Tuple[Sheaf, Dict[Hashable, HolimModel]]:
    if F.base != f.source:
        raise PreconditionError("pushforward: sheaf does not live on the source poset")
    T = f.target
    models = {t: HolimModel(F.sub_diagram(f.preimage(T.star(t)))) for t in T.elements}
    restrictions = {(s, t): models[t].projection(models[s]) for s, t in T.covering_pairs()}
    sheaf = Sheaf(T, F.field, {t: m.complex for t, m in models.items()}, restrictions, validate=False)
    return sheaf, models


def push_star(f: PosetMap, F: Sheaf) -> Sheaf:
    """(f_*F)(t) = Γ(f^{-1}(str t); F), restrictions are projections onto sub-chains"""
    return _push_star_models(f, F)[0]


def restrict_open(j: PosetMap, F: Sheaf) -> Sheaf:
    j.require("open-inclusion")
    return pullback_star(j, F)


def extend_by_zero(j: PosetMap, F: Sheaf) -> Sheaf:
    """j_! for an open inclusion: zero-extension, exact stalkwise"""
    j.require("open-inclusion")
    X = j.target
    inverse = {j(u): u for u in j.source.elements}
    values = {j(u): F.value(u) for u in j.source.elements}
    restrictions = {(s, t): F.restriction(inverse[s], inverse[t])
                    for s, t in X.covering_pairs() if s in inverse and t in inverse}
    return Sheaf(X, F.field, values, restrictions, validate=False)


def restrict_closed(i: PosetMap, F: Sheaf) -> Sheaf:
    i.require("closed-inclusion")
    return pullback_star(i, F)


def push_closed(i: PosetMap, F: Sheaf) -> Sheaf:
    """i_* = i_! for a closed inclusion: zero-extension from an up-set"""
    i.require("closed-inclusion")
    X = i.target
    inverse = {i(z): z for z in i.source.elements}
    values = {i(z): F.value(z) for z in i.source.elements}
    restrictions = {(s, t): F.restriction(inverse[s], inverse[t])
                    for s, t in X.covering_pairs() if s in inverse and t in inverse}
    return Sheaf(X, F.field, values, restrictions, validate=False)


def push_star_open(j: PosetMap, F: Sheaf) -> Sheaf:
    j.require("open-inclusion")
    return push_star(j, F)


def open_unit(F: Sheaf, U: Sequence[Hashable]) -> SheafMap:
    """Unit F -> j_*j^*F for the open set U"""
    X = F.base
    j = inclusion(X, U)
    if j.kind != "open-inclusion":
        raise PreconditionError("not open")
    target, models = _push_star_models(j, restrict_open(j, F))
    comps = {}
    for s in X.elements:
        legs = {p: F.restriction(p, s) for p in models[s].diagram.elements}
        comps[s] = models[s].cone_map(F.value(s), legs)
    return SheafMap(F, target, comps, validate=False)


def shriek_restrict_closed(i: PosetMap, F: Sheaf) -> Sheaf:
    """i^!F = i^* fib(F -> j_*j^*F) for the complementary open U"""
    i.require("closed-inclusion")
    X = i.target
    Z = {i(z) for z in i.source.elements}
    U = [s for s in X.elements if s not in Z]
    return pullback_star(i, sheaf_fiber(open_unit(F, U)))


class CompactSupportModel:
    """⊕_σ F(σ)[-dim σ] with d = (-1)^{dim σ} d_F + Σ_{τ ⋖ σ} [τ:σ] ρ over a set of cells"""

    def __init__(self, F: Sheaf, cells: Sequence[Hashable], dim: Callable[[Hashable], int],
                 incidence: Callable[[Hashable, Hashable], int]):
        self.F = F
        self.cells = list(cells)
        field = F.field
        cell_set = set(self.cells)
        self.blocks: Dict[int, List[Tuple[Hashable, int]]] = {}
        for c in self.cells:
            for m in F.value(c).degrees():
                self.blocks.setdefault(m + dim(c), []).append((c, m))
        self.offsets: Dict[Tuple[Hashable, int], int] = {}
        dims = {}
        for n, blocks in self.blocks.items():
            off = 0
            for c, m in blocks:
                self.offsets[(c, m)] = off
                off += F.value(c).dim(m)
            dims[n] = off
        entries: Dict[int, list] = {n: [] for n in dims}
        base = F.base
        for n, blocks in self.blocks.items():
            for c, m in blocks:
                col = self.offsets[(c, m)]
                V = F.value(c)
                if V.dim(m + 1):
                    row = self.offsets[(c, m + 1)]
                    s = field.sign(dim(c))
                    entries[n].extend((row + i, col + j, s * v) for i, j, v in V.diff(m).entries())
                for tau in base.covers_below(c):
                    if tau not in cell_set:
                        continue
                    e = incidence(tau, c)
                    if not e or (tau, m) not in self.offsets:
                        continue
                    rho = F.restriction(tau, c).component(m)
                    row = self.offsets[(tau, m)]
                    entries[n].extend((row + i, col + j, field(e) * v) for i, j, v in rho.entries())
        d = {n: Matrix.from_entries(field, dims.get(n + 1, 0), dims[n], entries[n]) for n in dims}
        self.complex = Complex(field, dims, d, validate=False)

    def dim(self, n: int) -> int:
        return self.complex.dim(n)

    def map_to(self, other: "CompactSupportModel", pairing: Dict[Hashable, Hashable],
               components: Dict[Hashable, ChainMap]) -> ChainMap:
        """Cellwise map: cell c of self goes to pairing[c] of other through components[c]"""
        field = self.F.field
        comps = {}
        for n in self.complex.dims:
            entries = []
            for c, m in self.blocks[n]:
                target = pairing.get(c)
                if target is None or (target, m) not in other.offsets:
                    continue
                f = components[c].component(m)
                row, col = other.offsets[(target, m)], self.offsets[(c, m)]
                entries.extend((row + i, col + j, v) for i, j, v in f.entries())
            comps[n] = Matrix.from_entries(field, other.dim(n), self.dim(n), entries)
        return ChainMap(self.complex, other.complex, comps, validate=False)


def gamma_c(F: Sheaf, cells: Optional[Sequence[Hashable]] = None) -> Complex:
    """Compactly supported sections over an open set of cells (the whole base by default)"""
    base = F.base
    cells = base.elements if cells is None else base.sorted(cells)
    if not base.is_open(cells):
        raise PreconditionError("compact support sections need an open set")
    return CompactSupportModel(F, cells, base.dim, base.incidence).complex


def _slice_rule(P: FacePoset, keep: Sequence[int]):
    """Dimension and incidence of the fibres of a projection, using the forgotten factors only"""
    forgotten = [i for i in range(len(P.factors)) if i not in keep]

    def dim(x):
        return sum(P.factors[i].dim(x[i]) for i in forgotten)

    def incidence(tau, sigma):
        for pos, i in enumerate(forgotten):
            if tau[i] != sigma[i]:
                sign = (-1) ** sum(P.factors[k].dim(sigma[k]) for k in forgotten[:pos])
                return sign * P.factors[i].incidence(tau[i], sigma[i])
        return 0

    return dim, incidence


def _kept_factors(pi: PosetMap) -> List[int]:
    """Factor positions a projection keeps, recovered from its assignment"""
    P, T = pi.source, pi.target
    if len(T) == 1:
        return []
    n_kept = len(T.factors) or 1
    for keep in combinations(range(len(P.factors)), n_kept):
        if all(_coordinates(x, keep) == pi(x) for x in P.elements):
            return list(keep)
    raise PreconditionError("projection does not forget whole factors")


def _coordinates(x, keep: Sequence[int]):
    return x[keep[0]] if len(keep) == 1 else tuple(x[i] for i in keep)


def _shriek_fibres(pi: PosetMap):
    """Fibres of a projection with their slice dimension/incidence and the coordinate mover"""
    pi.require("projection")
    P, T = pi.source, pi.target
    if P.factors:
        keep = _kept_factors(pi)
        dim, incidence = _slice_rule(P, keep)
    elif len(T) == 1:
        keep, dim, incidence = [], P.dim, P.incidence
    else:
        raise PreconditionError("pushShriek: projection from a non-product must go to the point")
    fibres = {t: [x for x in P.elements if pi(x) == t] for t in T.elements}

    def moved(x, s):
        y = list(x)
        for i, v in zip(keep, (s,) if len(keep) == 1 else s):
            y[i] = v
        return tuple(y)

    return fibres, dim, incidence, moved


def push_shriek_proj(pi: PosetMap, K: Sheaf) -> Sheaf:
    """π_!K for a projection: (π_!K)(t) = Γ_c(fibre over t; K), restrictions move kept coordinates"""
    if K.base != pi.source:
        raise PreconditionError("pushShriek: sheaf does not live on the source")
    return _push_shriek_models(pi, K)[0]


def _push_shriek_models(pi: PosetMap, K: Sheaf) -> Tuple[Sheaf, Dict[Hashable, CompactSupportModel]]:
    fibres, dim, incidence, moved = _shriek_fibres(pi)
    T = pi.target
    models = {t: CompactSupportModel(K, fibres[t], dim, incidence) for t in T.elements}
    restrictions = {}
    for s, t in T.covering_pairs():
        pairing = {x: moved(x, s) for x in fibres[t]}
        comps = {x: K.restriction(pairing[x], x) for x in fibres[t]}
        restrictions[(s, t)] = models[t].map_to(models[s], pairing, comps)
    logger.debug(f"pushShriek: {len(pi.source)} cells onto {len(T)} strata")
    return Sheaf(T, K.field, {t: m.complex for t, m in models.items()}, restrictions, validate=False), models


def push_shriek_proj_map(pi: PosetMap, phi: SheafMap) -> SheafMap:
    """π_! on morphisms, cellwise along each fibre"""
    if phi.base != pi.source:
        raise PreconditionError("pushShriek: map does not live on the source")
    source, src_models = _push_shriek_models(pi, phi.source)
    target, tgt_models = _push_shriek_models(pi, phi.target)
    comps = {}
    for t in pi.target.elements:
        cells = src_models[t].cells
        comps[t] = src_models[t].map_to(tgt_models[t], {x: x for x in cells},
                                        {x: phi.component(x) for x in cells})
    return SheafMap(source, target, comps, validate=False)


def dualizing(S: FacePoset, field) -> Sheaf:
    """ω(σ) = Γ_c(str σ; k)^∨, restrictions dual to extension by zero between stars"""
    k = constant_sheaf(S, field)
    models = {s: CompactSupportModel(k, S.sorted(S.star(s)), S.dim, S.incidence) for s in S.elements}
    values = {s: dual(m.complex) for s, m in models.items()}
    restrictions = {}
    for s, t in S.covering_pairs():
        identity = {c: ChainMap.identity(k.value(c)) for c in models[s].cells}
        inclusion_map = models[s].map_to(models[t], {c: c for c in models[s].cells}, identity)
        restrictions[(s, t)] = dual_map(inclusion_map)
    return Sheaf(S, field, values, restrictions, validate=False)


def naive_dual(F: Sheaf) -> Sheaf:
    """ND(F) = sHom(F, k)"""
    return sheaf_hom(F, constant_sheaf(F.base, F.field))


def verdier_dual(F: Sheaf, omega: Optional[Sheaf] = None) -> Sheaf:
    """VD(F) = sHom(F, ω)"""
    return sheaf_hom(F, omega if omega is not None else dualizing(F.base, F.field))
