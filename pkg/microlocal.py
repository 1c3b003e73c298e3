"""
Microlocal
Combinatorial microstalks from sign assignments on links, their indicator
corepresentatives, singular-support tables and constructibility tests
"""

import logging
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Any, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from errors import BudgetExceededError, PreconditionError
from linalg import Complex, HolimModel, Matrix, fiber, tensor_complex
from posets import FacePoset, PosetMap
from sheaves import (IndicatorComplex, IndicatorMap, Sheaf, indicator, locally_closed_constant,
                     proj_resolve)
from utils import Utils

logger = logging.getLogger(__name__)

MAX_LINK_SIZE = 12


@dataclass(frozen=True)
class SignAssignment:
    """
    A generic covector at a stratum, recorded by the sign of every link vertex.
    On a product stratum the keys are (factor, vertex) pairs.
    """

    stratum: Hashable
    signs: Tuple[Tuple[Hashable, int], ...]

    def __post_init__(self):
        if any(s not in (1, -1) for _, s in self.signs):
            raise PreconditionError("sign assignments take values +1 and -1 only")

    def sign(self, key) -> int:
        return dict(self.signs)[key]

    def negative(self) -> frozenset:
        return frozenset(k for k, s in self.signs if s < 0)

    def is_zero_section(self) -> bool:
        return all(s > 0 for _, s in self.signs)

    def label(self) -> str:
        def key(k):
            return ".".join(map(str, k)) if isinstance(k, tuple) else str(k)
        return " ".join(f"{key(k)}{'+' if s > 0 else '-'}" for k, s in self.signs) or "()"

    @classmethod
    def product(cls, parts: Sequence["SignAssignment"]) -> "SignAssignment":
        """Concatenate factor assignments onto the product stratum"""
        signs = tuple(((i, k), s) for i, part in enumerate(parts) for k, s in part.signs)
        return cls(tuple(p.stratum for p in parts), signs)


def link_keys(P: FacePoset, sigma) -> List[Hashable]:
    """Link vertices of a stratum, keyed by (factor, vertex) on products"""
    if P.factors:
        keys = []
        for i, factor in enumerate(P.factors):
            keys.extend((i, w) for w in link_keys(factor, sigma[i]))
        return keys
    if P.complex is None:
        raise PreconditionError("link vertices need the simplicial complex of the poset")
    return P.complex.link_vertices(sigma)


def sign_assignments(P: FacePoset, sigma, budget: Optional[int] = None) -> Iterator[SignAssignment]:
    keys = link_keys(P, sigma)
    limit = MAX_LINK_SIZE if budget is None else budget
    if len(keys) > limit:
        raise BudgetExceededError(f"link of {P.label(sigma)} has {len(keys)} vertices, budget is {limit}")
    for signs in cartesian((1, -1), repeat=len(keys)):
        yield SignAssignment(sigma, tuple(zip(keys, signs)))


def _is_negative(P: FacePoset, sigma, tau, negative: frozenset, prefix: Tuple = ()) -> bool:
    if P.factors:
        return any(_is_negative(f, sigma[i], tau[i], negative, (i,)) for i, f in enumerate(P.factors))
    extra = [v for v in tau if v not in sigma]
    return any(((prefix + (v,)) if prefix else v) in negative for v in extra)


def negative_region(P: FacePoset, xi: SignAssignment) -> List[Hashable]:
    """N_ξ: cofaces of the stratum with a negative link vertex, an open set"""
    negative = xi.negative()
    sigma = xi.stratum
    return P.sorted(t for t in P.star(sigma) if t != sigma and _is_negative(P, sigma, t, negative))


def microstalk(F: Sheaf, xi: SignAssignment) -> Complex:
    """μ_ξ(F) = fib(F(σ) -> Γ(N_ξ; F)); the stalk when no sign is negative"""
    sigma = xi.stratum
    if sigma not in F.base:
        raise PreconditionError(f"unknown stratum {sigma!r}")
    region = negative_region(F.base, xi)
    if not region:
        return F.value(sigma)
    model = HolimModel(F.sub_diagram(region))
    legs = {t: F.restriction(t, sigma) for t in region}
    return fiber(model.cone_map(F.value(sigma), legs))


def microstalk_corep(base: FacePoset, field, xi: SignAssignment) -> Sheaf:
    """cone(res(1_{N_ξ}) -> 1_σ): Hom(C, F) ≃ μ_ξ(F)"""
    sigma = xi.stratum
    region = negative_region(base, xi)
    if not region:
        return indicator(base, field, sigma)
    resolution = proj_resolve(locally_closed_constant(base, field, region)).complex
    target = IndicatorComplex.indicator(base, field, sigma)
    entries = [(0, g, field.one) for g, (_, n) in enumerate(resolution.generators) if n == 0]
    M = Matrix.from_entries(field, 1, len(resolution), entries)
    return IndicatorMap(resolution, target, M, validate=False).cone().realize()


def is_realizable(base: FacePoset, xi: SignAssignment) -> Optional[bool]:
    """
    Whether an affine functional vanishing on the stratum has these signs on its link.
    Decided for one-dimensional coordinates; None when it cannot be decided.
    """
    K = base.complex
    if base.factors or K is None or not K.coordinates:
        return None
    if any(len(K.coordinates[v]) != 1 for v in K.vertices):
        return None
    sigma = xi.stratum
    if len(sigma) > 1:
        return not xi.signs
    x0 = K.coordinates[sigma[0]][0]
    left = {s for w, s in xi.signs if K.coordinates[w][0] < x0}
    right = {s for w, s in xi.signs if K.coordinates[w][0] > x0}
    if len(left) > 1 or len(right) > 1:
        return False
    return not (left and right and left == right)


def singular_support(F: Sheaf, budget: Optional[int] = None) -> pd.DataFrame:
    """Every (σ, ξ) with nonzero microstalk, in poset order"""
    rows = []
    for sigma in F.base.elements:
        for xi in sign_assignments(F.base, sigma, budget):
            dims = microstalk(F, xi).cohomology()
            if dims:
                rows.append({
                    "stratum": F.base.label(sigma),
                    "signs": xi.label(),
                    "cohomology": Utils.format_graded(dims),
                    "zero_section": xi.is_zero_section(),
                })
    logger.debug(f"singular support table with {len(rows)} entries")
    return pd.DataFrame(rows, columns=["stratum", "signs", "cohomology", "zero_section"])


def is_constructible_wrt(F: Sheaf, q: PosetMap) -> bool:
    """F on a refinement R is S-constructible: restrictions inside merged strata are quasi-isomorphisms"""
    q.require("refinement")
    if F.base != q.source:
        raise PreconditionError("constructibility test: sheaf does not live on the refinement")
    R = q.source
    return all(F.restriction(r, t).is_quasi_isomorphism() for r, t in R.covering_pairs() if q(r) == q(t))


def microlocal_constructibility(F: Sheaf, q: PosetMap, budget: Optional[int] = None) -> bool:
    """
    The same test read off microstalks: at every stratum swallowed by a larger coarse stratum,
    realizable covectors off the zero section have vanishing microstalk.
    """
    q.require("refinement")
    R, S = q.source, q.target
    for r in R.elements:
        if S.dim(q(r)) <= R.dim(r):
            continue
        for xi in sign_assignments(R, r, budget):
            if xi.is_zero_section():
                continue
            realizable = is_realizable(R, xi)
            if realizable is None:
                raise PreconditionError("microlocal constructibility needs one-dimensional coordinates")
            if realizable and not microstalk(F, xi).is_acyclic():
                return False
    return True


def thom_sebastiani_records(F: Sheaf, G: Sheaf, product_sheaf: Sheaf,
                            budget: Optional[int] = None) -> List[Dict[str, Any]]:
    """μ(F)⊗μ(G) against μ(F⊠G) over every pair of strata and sign assignments"""
    S, T = F.base, G.base
    P = product_sheaf.base
    records = []
    for sigma in S.elements:
        for tau in T.elements:
            for xi in sign_assignments(S, sigma, budget):
                left = microstalk(F, xi)
                for zeta in sign_assignments(T, tau, budget):
                    expected = tensor_complex(left, microstalk(G, zeta)).cohomology()
                    got = microstalk(product_sheaf, SignAssignment.product([xi, zeta])).cohomology()
                    records.append(Utils.check_record(
                        f"thom-sebastiani {P.label((sigma, tau))} [{xi.label()} | {zeta.label()}]",
                        Utils.format_graded(expected), Utils.format_graded(got)))
    return records
