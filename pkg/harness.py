"""
Verification Harness
The acceptance suite as ordered groups of exact checks, one report row per check
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from errors import PreconditionError
from kernels import (action_records, boxtimes, check_triangles, duality_data, identity_kernel, kernel_action,
                     lad_ker_composites, left_kan_localize, pairing_dims, random_kernel, reconstruct_kernel)
from linalg import FieldConfig, hocolim, holim
from microlocal import (is_constructible_wrt, is_realizable, microlocal_constructibility, microstalk,
                        microstalk_corep, sign_assignments, thom_sebastiani_records)
from posets import FacePoset, SimplicialComplex, face_poset, product_poset, subdivision_map
from settings_manager import SettingsManager
from sheaves import Sheaf, constant_sheaf, derived_hom, global_sections, indicator, random_sheaf
from six_functors import dualizing, gamma_c, verdier_dual
from utils import Utils
from wrap1d import StopConfig, WrapLab, epsilon_stability_check

Records = List[Dict[str, Any]]


@dataclass(frozen=True)
class CheckGroup:
    """A named batch of checks; the suite runs groups independently and reports them in order"""

    name: str
    run: Callable[[], Records]


def _generators(base: FacePoset, field: FieldConfig) -> Dict[str, Sheaf]:
    return {f"1_{base.label(s)}": indicator(base, field, s) for s in base.elements}


def _iso_records(name: str, expected: Sheaf, got: Sheaf) -> Records:
    """Stalk cohomology and restriction ranks of two sheaves on one base"""
    base = expected.base

    def ranks(F):
        return {(s, t): F.restriction(s, t).cohomology_ranks() for s, t in base.covering_pairs()}

    return [
        Utils.check_record(f"{name} stalks", Utils.format_stalks(base, expected.stalk_cohomology()),
                           Utils.format_stalks(base, got.stalk_cohomology())),
        Utils.check_record(f"{name} restrictions", Utils.format_restriction_ranks(base, ranks(expected)),
                           Utils.format_restriction_ranks(base, ranks(got))),
    ]


class VerificationSuite:
    """Builds the check groups from the settings and runs them, serially or on a thread pool"""

    def __init__(self, settings: Optional[SettingsManager] = None):
        self.logger = logging.getLogger(__name__)
        self.settings = settings or SettingsManager()
        self.field = self.settings.field_config()
        self.samples = self.settings.get("harness", "random_samples")
        self.kernel_samples = self.settings.get("harness", "random_kernels")
        self.seed = self.settings.get("harness", "seed")
        self.grid_steps = self.settings.get("wrap", "grid_steps")
        self.link_budget = self.settings.budget("max_link_size")
        self.step_budget = self.settings.budget("max_localization_steps")
        self.interval = face_poset(SimplicialComplex.interval())
        self.circle = face_poset(SimplicialComplex.circle(3))

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng(self.seed + offset)

    def _lab(self, kind: str, points: int) -> WrapLab:
        return WrapLab(StopConfig.full(kind, points, self.grid_steps), self.field, self.step_budget)

    def groups(self) -> List[CheckGroup]:
        return [
            CheckGroup("kunneth", self.kunneth),
            CheckGroup("pairing", self.duality_pairing),
            CheckGroup("triangles", self.triangles),
            CheckGroup("fourier-mukai", self.fourier_mukai),
            CheckGroup("lad-ker", self.lad_ker),
            CheckGroup("thom-sebastiani", self.thom_sebastiani),
            CheckGroup("stop-removal", self.stop_removal),
            CheckGroup("biduality", self.biduality),
            CheckGroup("sabloff-serre", self.sabloff_serre),
            CheckGroup("verdier-standard", self.verdier_standard),
            CheckGroup("invertibility", self.invertibility),
            CheckGroup("oracles", self.oracles),
        ]

    def kunneth(self) -> Records:
        """1_s ⊠ 1_t = 1_(s,t) on interval×interval and circle×interval"""
        records = []
        for S, T, label in ((self.interval, self.interval, "interval×interval"),
                            (self.circle, self.interval, "circle×interval")):
            P = product_poset(S, T)
            for s in S.elements:
                for t in T.elements:
                    got = boxtimes(indicator(S, self.field, s), indicator(T, self.field, t))
                    records.extend(_iso_records(f"künneth {label} 1_{P.label((s, t))}",
                                                indicator(P, self.field, (s, t)), got))
        return records

    def duality_pairing(self) -> Records:
        """Hom(SD F, G) against p_!(F ⊗ G) for generators F and random G"""
        records = []
        for offset, (base, label) in enumerate(((self.interval, "interval"), (self.circle, "circle"))):
            rng = self._rng(100 + offset)
            samples = [random_sheaf(base, self.field, rng) for _ in range(self.samples)]
            for name, F in _generators(base, self.field).items():
                for i, G in enumerate(samples):
                    hom, pushed = pairing_dims(F, G)
                    records.append(Utils.check_record(f"pairing {label} {name} G{i}",
                                                      Utils.format_graded(pushed), Utils.format_graded(hom)))
        return records

    def triangles(self) -> Records:
        records = []
        for K, label in ((SimplicialComplex.interval(), "interval"), (SimplicialComplex.circle(3), "circle")):
            for r in check_triangles(duality_data(K, self.field)):
                records.append({**r, "name": f"{label} {r['name']}"})
        return records

    def fourier_mukai(self) -> Records:
        """Kernels reconstructed from their action, and distinct kernels with distinct actions"""
        S = self.interval
        rng = self._rng(200)
        identity = identity_kernel(S.complex, self.field)
        kernels = [random_kernel(S, S, self.field, rng) for _ in range(self.kernel_samples)]
        records, signatures = [], []
        for i, K in enumerate(kernels):
            table, maps = kernel_action(K, self.field)
            rebuilt = reconstruct_kernel(S, S, table, maps, self.field, identity)
            records.extend(_iso_records(f"fm-reconstruct K{i}", K, rebuilt))
            records.extend(action_records(f"fm-action K{i}", K, rebuilt, self.field))
            action = tuple(Utils.format_stalks(S, F.stalk_cohomology()) for F in table.values())
            stalks = Utils.format_stalks(K.base, K.stalk_cohomology())
            signatures.append((action, stalks))
        clashes = [f"K{i}=K{j}" for i in range(len(signatures)) for j in range(i + 1, len(signatures))
                   if signatures[i][0] == signatures[j][0] and signatures[i][1] != signatures[j][1]]
        records.append(Utils.check_record("fm distinct kernels have distinct actions", "0",
                                          ", ".join(clashes) or "0"))
        return records

    def lad_ker(self) -> Records:
        """The three localization composites on the subdivided interval"""
        q = subdivision_map(2)
        R = q.source
        K = identity_kernel(R.complex, self.field)
        records = []
        for name, F in _generators(R, self.field).items():
            first, second, third = lad_ker_composites(q, K, F)
            expected = left_kan_localize(q, F)
            for label, got in (("ι*(K∘ι*F)", first), ("ι*K∘F", second), ("ι*K∘ι*F", third)):
                records.extend(_iso_records(f"lad-ker {label} {name}", expected, got))
        return records

    def thom_sebastiani(self) -> Records:
        S = self.interval
        records = []
        gens = _generators(S, self.field)
        for F in gens.values():
            for G in gens.values():
                records.extend(thom_sebastiani_records(F, G, boxtimes(F, G), self.link_budget))
        return records

    def stop_removal(self) -> Records:
        """Microstalk corepresentatives: killed by ι* off the coarse strata, and Hom(C_ξ, F) = μ_ξ F"""
        q = subdivision_map(2)
        R = q.source
        gens = _generators(R, self.field)
        records = []
        for r in R.elements:
            for xi in sign_assignments(R, r, self.link_budget):
                corep = microstalk_corep(R, self.field, xi)
                label = f"{R.label(r)} [{xi.label()}]"
                for name, F in gens.items():
                    records.append(Utils.check_record(
                        f"corep {label} Hom(C, {name})",
                        Utils.format_graded(microstalk(F, xi).cohomology()),
                        Utils.format_graded(derived_hom(corep, F).cohomology())))
                swallowed = q.target.dim(q(r)) > R.dim(r)
                if swallowed and not xi.is_zero_section() and is_realizable(R, xi):
                    localized = left_kan_localize(q, corep)
                    records.append(Utils.check_record(f"stop removal ι*C {label}", "0",
                                                      Utils.format_stalks(q.target, localized.stalk_cohomology())))
        for name, F in gens.items():
            records.append(Utils.check_record(f"constructibility {name} microlocal vs restrictions",
                                              is_constructible_wrt(F, q),
                                              microlocal_constructibility(F, q, self.link_budget)))
        return records

    def biduality(self) -> Records:
        records = []
        for base, label in ((self.interval, "interval"), (self.circle, "circle")):
            omega = dualizing(base, self.field)
            for name, F in _generators(base, self.field).items():
                twice = verdier_dual(verdier_dual(F, omega), omega)
                records.append(Utils.check_record(f"biduality {label} {name}",
                                                  Utils.format_stalks(base, F.stalk_cohomology()),
                                                  Utils.format_stalks(base, twice.stalk_cohomology())))
            if label == "circle":
                expected = {s: {-1: 1} for s in base.elements}
                records.append(Utils.check_record("ω circle stalks", Utils.format_stalks(base, expected),
                                                  Utils.format_stalks(base, omega.stalk_cohomology())))
        return records

    def sabloff_serre(self) -> Records:
        records = []
        for n in (1, 2, 3):
            lab = self._lab("circle", n)
            gens = lab.generators()
            for a, F in gens.items():
                for b, G in gens.items():
                    records.extend(lab.sabloff_serre_check(F, G, f"sabloff-serre circle/{n} ({a}, {b})"))
        return records

    def verdier_standard(self) -> Records:
        records = []
        for n in (1, 2, 3):
            lab = self._lab("circle", n)
            for name, F in lab.generators().items():
                records.extend(lab.verdier_standard_compare(F, f"verdier-standard circle/{n} {name}"))
        return records

    def invertibility(self) -> Records:
        records = []
        for n in (1, 2, 3):
            lab = self._lab("circle", n)
            gens = lab.generators()
            for name, F in gens.items():
                records.extend(lab.invertibility_check(F, f"invertibility circle/{n} {name}"))
            if n < 3:
                for a, F in gens.items():
                    for b, G in gens.items():
                        records.append(lab.verdier_pairing_check(F, G, f"verdier pairing circle/{n} ({a}, {b})"))
        records.extend(self._lab("circle", 2).inverse_kernel_records("rotation inverse circle/2"))
        records.extend(epsilon_stability_check(StopConfig.full("circle", 1, self.grid_steps), self.field,
                                               self.step_budget))
        return records

    def oracles(self) -> Records:
        """Known cohomology of constant sheaves, contractible homotopy limits, perturbation invariance"""
        field = self.field
        point = face_poset(SimplicialComplex.point())
        records = []
        for base, label, expected in ((point, "point", {0: 1}), (self.interval, "interval", {0: 1}),
                                      (self.circle, "circle", {0: 1, 1: 1})):
            k = constant_sheaf(base, field)
            records.append(Utils.check_record(f"Γ constant {label}", Utils.format_graded(expected),
                                              Utils.format_graded(global_sections(k).cohomology())))
        records.append(Utils.check_record("Γ_c constant interval", "0:1",
                                          Utils.format_graded(gamma_c(constant_sheaf(self.interval, field)).cohomology())))
        records.append(Utils.check_record("Γ_c constant open interval", "1:1", Utils.format_graded(
            gamma_c(constant_sheaf(self.interval, field), [(0, 1)]).cohomology())))
        records.append(Utils.check_record("Γ_c constant circle", "0:1 1:1",
                                          Utils.format_graded(gamma_c(constant_sheaf(self.circle, field)).cohomology())))
        for base, label in ((self.interval, "interval"), (face_poset(SimplicialComplex.path(3)), "path/3")):
            diagram = constant_sheaf(base, field).diagram
            records.append(Utils.check_record(f"holim constant {label}", "0:1",
                                              Utils.format_graded(holim(diagram).cohomology())))
            records.append(Utils.check_record(f"hocolim constant {label}", "0:1",
                                              Utils.format_graded(hocolim(diagram).cohomology())))
        for n in (1, 2):
            lab = self._lab("circle", n)
            gens = lab.generators()
            for a, F in gens.items():
                for b, G in gens.items():
                    records.append(lab.perturbation_check(F, G, f"perturbation circle/{n} Hom({a}, {b})"))
        return records

    def _run_group(self, group: CheckGroup) -> Records:
        start = time.perf_counter()
        self.logger.info(f"Check group {group.name} started")
        records = group.run()
        passed = sum(r["passed"] for r in records)
        self.logger.info(f"Check group {group.name}: {passed}/{len(records)} passed in "
                         f"{Utils.format_duration(time.perf_counter() - start)}")
        return records

    def run(self, only: Optional[List[str]] = None, jobs: Optional[int] = None) -> pd.DataFrame:
        """Report rows in suite order whatever the number of jobs"""
        groups = self.groups()
        unknown = sorted(set(only or []) - {g.name for g in groups})
        if unknown:
            raise PreconditionError(f"unknown check group(s) {', '.join(unknown)}; "
                                    f"known: {', '.join(g.name for g in groups)}")
        groups = [g for g in groups if only is None or g.name in only]
        jobs = jobs or self.settings.get("harness", "jobs")
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(self._run_group, groups))
        else:
            results = [self._run_group(g) for g in groups]
        return Utils.create_report_table(r for records in results for r in records)


def verify_all(settings: Optional[SettingsManager] = None, only: Optional[List[str]] = None) -> pd.DataFrame:
    return VerificationSuite(settings).run(only)


def write_report(report: pd.DataFrame, path: Union[str, Path]):
    report.to_csv(path, index=False, lineterminator="\n")
