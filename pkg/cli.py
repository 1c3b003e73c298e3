"""
Command-line driver: loads a workspace, runs one verb, prints deterministic output and
exits 0 on success, 1 on failed checks, 2 on parse errors, 3 on precondition or
validation errors and 4 on exceeded budgets
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

import pandas as pd

from errors import BudgetExceededError, ParseError, PreconditionError, ValidationError
from formats import Workspace, load_workspace, parse_stop_config, serialize_workspace
from harness import VerificationSuite, write_report
from kernels import (boxtimes, check_triangles, convolve, duality_data, hom_kernel_right_adjoint, identity_kernel,
                     kernel_action, kernel_factors, reconstruct_kernel, standard_dual)
from linalg import Complex
from microlocal import SignAssignment, link_keys, microstalk, singular_support
from posets import FacePoset
from settings_manager import SettingsManager
from sheaves import Sheaf, derived_hom, global_sections, proj_resolve, sheaf_hom, tensor
from six_functors import dualizing, gamma_c, naive_dual, verdier_dual
from utils import Utils
from wrap1d import CODIRECTIONS, StopConfig, WrapLab

logger = logging.getLogger("sheafcalc")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_BUDGET = 4

CHECK_VERBS = ("check-triangles", "fm-reconstruct", "sabloff", "verdier-compare", "verify-all")


class Session:
    """One CLI invocation: settings, the loaded workspace and the output stream"""

    def __init__(self, args: argparse.Namespace, out=None):
        self.args = args
        self.out = out or sys.stdout
        self.logger = logging.getLogger("sheafcalc.session")
        self.settings = SettingsManager()
        self.explicit_budgets = set()
        if args.field:
            self.settings.set("field", "spec", args.field)
        for item in args.budget or []:
            key, _, value = item.rpartition("=")
            try:
                self.settings.set("budgets", key or "max_poset_size", int(value))
                self.explicit_budgets.add(key or "max_poset_size")
            except ValueError:
                raise PreconditionError(f"budget must be an integer or KEY=INTEGER, got {item!r}")
        if args.jobs:
            self.settings.set("harness", "jobs", args.jobs)
        self.field = self.settings.field_config()
        self.workspace = self._load()

    def _load(self) -> Workspace:
        if not self.args.fixture:
            return Workspace(field=self.field)
        ws = load_workspace(self.args.fixture)
        if self.args.field and ws.field != self.field:
            raise PreconditionError(f"fixture is over {ws.field.label} but --field is {self.field.label}")
        for key, value in ws.budgets.items():
            if key not in self.settings.default_settings["budgets"]:
                raise PreconditionError(f"unknown budget {key!r} in fixture")
            if key not in self.explicit_budgets:
                self.settings.set("budgets", key, value)
                self.logger.info(f"fixture sets budget {key} = {value}")
        limit = self.settings.budget("max_poset_size")
        for name in ws.spaces:
            if len(ws.poset(name)) > limit:
                raise BudgetExceededError(f"space {name} has {len(ws.poset(name))} strata, budget is {limit}")
        self.logger.info(f"Loaded workspace {self.args.fixture} with {len(ws.names())} objects")
        return ws

    def emit(self, text: str):
        self.out.write(text.rstrip("\n") + "\n")

    def sheaf(self, name: str) -> Sheaf:
        if name in self.workspace.sheaves:
            return self.workspace.sheaves[name]
        if name in self.workspace.kernels:
            return self.workspace.kernels[name]
        raise PreconditionError(f"no sheaf or kernel named {name!r}")

    def kernel(self, name: str) -> Sheaf:
        if name not in self.workspace.kernels:
            raise PreconditionError(f"no kernel named {name!r}")
        return self.workspace.kernels[name]

    def stops(self, text: str) -> StopConfig:
        if text in self.workspace.stops:
            return self.workspace.stops[text]
        return parse_stop_config(text)

    def lab(self, text: str) -> WrapLab:
        return WrapLab(self.stops(text), self.field, self.settings.budget("max_localization_steps"))

    def show_complex(self, C: Complex):
        self.emit(Utils.format_graded(C.cohomology()))

    def show_sheaf(self, F: Sheaf):
        self.emit(Utils.format_stalks(F.base, F.stalk_cohomology()))
        if self.args.output:
            self._save(F)

    def _save(self, F: Sheaf):
        """Write the result, with the spaces it lives on, as a workspace file"""
        ws = Workspace(field=F.field)
        name = self.args.name
        factors = F.base.factors or (F.base,)
        spaces = []
        for i, P in enumerate(factors):
            if P.complex is None:
                raise PreconditionError("the result does not live on a simplicial complex and cannot be written")
            known = next((n for n in self.workspace.spaces if self.workspace.poset(n) == P), f"{name}_space{i}")
            if known not in ws.spaces:
                ws.add_space(known, P.complex)
            spaces.append(known)
        if len(spaces) == 1:
            ws.add_sheaf(name, F, spaces[0])
        elif len(spaces) == 2:
            ws.add_kernel(name, F, spaces[0], spaces[1])
        else:
            raise PreconditionError("only sheaves and two-factor kernels can be written")
        with open(self.args.output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(serialize_workspace(ws))
        self.logger.info(f"Wrote {name} to {self.args.output}")

    def report(self, records) -> int:
        report = records if isinstance(records, pd.DataFrame) else Utils.create_report_table(records)
        if self.args.report:
            write_report(report, self.args.report)
        self.emit(report.to_csv(index=False, lineterminator="\n"))
        failed = Utils.failed_checks(report)
        self.logger.info(f"{Utils.calculate_pass_rate(report):.1f}% of {len(report)} checks passed")
        return EXIT_CHECK_FAILED if failed else EXIT_OK


def _sign_assignment(F: Sheaf, stratum: str, signs: Sequence[str]) -> SignAssignment:
    """'v-' marks link vertex v negative; unmentioned link vertices are positive"""
    P: FacePoset = F.base
    sigma = P.element_from_label(stratum)
    keys = link_keys(P, sigma)

    def text(k):
        return ".".join(map(str, k)) if isinstance(k, tuple) else str(k)

    by_text = {text(k): k for k in keys}
    chosen: Dict = {}
    for item in signs:
        if len(item) < 2 or item[-1] not in CODIRECTIONS or item[:-1] not in by_text:
            raise PreconditionError(f"sign {item!r} is not '<link vertex>+' or '<link vertex>-' "
                                    f"(link: {', '.join(by_text) or 'empty'})")
        chosen[by_text[item[:-1]]] = 1 if item[-1] == "+" else -1
    return SignAssignment(sigma, tuple((k, chosen.get(k, 1)) for k in keys))


def run_verb(session: Session, args: argparse.Namespace) -> int:
    verb = args.verb
    ws = session.workspace
    if verb == "cohomology":
        target = ws.get(args.object)
        if isinstance(target, Complex):
            session.show_complex(target)
        elif isinstance(target, Sheaf):
            session.emit(Utils.format_stalks(target.base, target.stalk_cohomology()))
        else:
            raise PreconditionError(f"{args.object} is neither a complex nor a sheaf")
    elif verb == "sections":
        session.show_complex(global_sections(session.sheaf(args.sheaf)))
    elif verb == "gammac":
        session.show_complex(gamma_c(session.sheaf(args.sheaf)))
    elif verb == "hom":
        session.show_complex(derived_hom(session.sheaf(args.source), session.sheaf(args.target)))
    elif verb == "shom":
        session.show_sheaf(sheaf_hom(session.sheaf(args.source), session.sheaf(args.target)))
    elif verb == "tensor":
        session.show_sheaf(tensor(session.sheaf(args.first), session.sheaf(args.second)))
    elif verb == "boxtimes":
        session.show_sheaf(boxtimes(session.sheaf(args.first), session.sheaf(args.second)))
    elif verb == "convolve":
        session.show_sheaf(convolve(session.kernel(args.kernel), session.sheaf(args.sheaf)))
    elif verb == "homkernel":
        budget = session.settings.budget("max_triple_product")
        session.show_sheaf(hom_kernel_right_adjoint(session.kernel(args.first), session.kernel(args.second), budget))
    elif verb == "dual":
        F = session.sheaf(args.sheaf)
        dual = {"naive": naive_dual, "verdier": verdier_dual, "standard": standard_dual}[args.kind]
        session.show_sheaf(dual(F))
    elif verb == "omega":
        session.show_sheaf(dualizing(ws.poset(args.space), ws.field))
    elif verb == "microstalk":
        F = session.sheaf(args.sheaf)
        session.show_complex(microstalk(F, _sign_assignment(F, args.stratum, args.signs)))
    elif verb == "ss":
        table = singular_support(session.sheaf(args.sheaf), session.settings.budget("max_link_size"))
        session.emit(table.to_csv(index=False, lineterminator="\n"))
    elif verb == "resolve":
        F = session.sheaf(args.sheaf)
        P = proj_resolve(F).complex
        limit = session.settings.budget("max_generators")
        if len(P) > limit:
            raise BudgetExceededError(f"resolution has {len(P)} generators, budget is {limit}")
        rows = [{"generator": g, "stratum": F.base.label(s), "degree": n} for g, (s, n) in enumerate(P.generators)]
        session.emit(pd.DataFrame(rows, columns=["generator", "stratum", "degree"]).to_csv(index=False,
                                                                                         lineterminator="\n"))
    elif verb == "localize":
        lab = session.lab(args.stops)
        F = session.sheaf(args.sheaf)
        session.show_sheaf(lab.localize(F))
    elif verb == "idkernel":
        session.show_sheaf(identity_kernel(ws.spaces[_space(ws, args.space)], ws.field))
    elif verb == "check-triangles":
        return session.report(check_triangles(duality_data(ws.spaces[_space(ws, args.space)], ws.field)))
    elif verb == "fm-reconstruct":
        K = session.kernel(args.kernel)
        S, T = kernel_factors(K)
        table, maps = kernel_action(K, ws.field)
        rebuilt = reconstruct_kernel(S, T, table, maps, ws.field)
        expected = Utils.format_stalks(K.base, K.stalk_cohomology())
        got = Utils.format_stalks(rebuilt.base, rebuilt.stalk_cohomology())
        return session.report([Utils.check_record(f"fm-reconstruct {args.kernel}", expected, got)])
    elif verb == "wrap":
        lab = session.lab(args.stops)
        if args.sheaf:
            session.show_sheaf(lab.wrap_once(session.sheaf(args.sheaf), args.direction))
        else:
            rows = []
            for name, F in lab.generators().items():
                wrapped = lab.wrap_once(F, args.direction)
                rows.append({"generator": name,
                             "stalks": Utils.format_stalks(lab.strata.coarse, lab.strata.coarse_stalks(wrapped))})
            session.emit(pd.DataFrame(rows, columns=["generator", "stalks"]).to_csv(index=False, lineterminator="\n"))
    elif verb == "sabloff":
        lab = session.lab(args.stops)
        gens = lab.generators()
        records = []
        for a, F in gens.items():
            for b, G in gens.items():
                records.extend(lab.sabloff_serre_check(F, G, f"sabloff-serre ({a}, {b})"))
        return session.report(records)
    elif verb == "verdier-compare":
        lab = session.lab(args.stops)
        records = []
        for name, F in lab.generators().items():
            records.extend(lab.verdier_standard_compare(F, f"verdier-standard {name}"))
        return session.report(records)
    elif verb == "verify-all":
        suite = VerificationSuite(session.settings)
        return session.report(suite.run(args.only or None))
    return EXIT_OK


def _space(ws: Workspace, name: str) -> str:
    if name not in ws.spaces:
        raise PreconditionError(f"no space named {name!r}")
    return name


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sheafcalc", description="Exact computations with constructible sheaves "
                                                                  "on finite simplicial complexes")
    parser.add_argument("--field", help="coefficient field: q or fp:<p>")
    parser.add_argument("--budget", action="append", metavar="[KEY=]N",
                        help="size budget; a bare number caps the number of strata of a space")
    parser.add_argument("--fixture", help="workspace file to load")
    parser.add_argument("--report", help="write the check report as CSV")
    parser.add_argument("--jobs", type=int, help="worker threads for verify-all")
    parser.add_argument("--output", help="write a sheaf-valued result as a workspace file")
    parser.add_argument("--name", default="result", help="object name used with --output")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    verbs = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name: str, help_text: str, *positional: str):
        sub = verbs.add_parser(name, help=help_text)
        for p in positional:
            sub.add_argument(p)
        return sub

    verb("cohomology", "cohomology of a complex, or stalk cohomology of a sheaf", "object")
    verb("sections", "global sections Γ(F)", "sheaf")
    verb("gammac", "compactly supported sections Γ_c(F)", "sheaf")
    verb("hom", "derived Hom(F, G)", "source", "target")
    verb("shom", "internal Hom sheaf", "source", "target")
    verb("tensor", "pointwise tensor product", "first", "second")
    verb("boxtimes", "exterior product, a kernel on the product", "first", "second")
    verb("convolve", "K ∘ F", "kernel", "sheaf")
    verb("homkernel", "right adjoint kernel of convolution", "first", "second")
    dual = verb("dual", "naive, Verdier or standard dual")
    dual.add_argument("kind", choices=["naive", "verdier", "standard"])
    dual.add_argument("sheaf")
    verb("omega", "dualizing sheaf of a space", "space")
    micro = verb("microstalk", "microstalk at a stratum and sign assignment", "sheaf", "stratum")
    micro.add_argument("signs", nargs="*", help="negative or positive link vertices, e.g. 1- 2+")
    verb("ss", "singular support table", "sheaf")
    verb("resolve", "generators of the indicator resolution", "sheaf")
    verb("localize", "ι* onto the subcategory of a stop configuration", "stops", "sheaf")
    verb("idkernel", "identity kernel of a space", "space")
    verb("check-triangles", "triangle identities of the duality data", "space")
    verb("fm-reconstruct", "rebuild a kernel from its action on generators", "kernel")
    wrap = verb("wrap", "wrap-once functor S+ or S-")
    wrap.add_argument("direction", choices=list(CODIRECTIONS))
    wrap.add_argument("stops")
    wrap.add_argument("sheaf", nargs="?")
    verb("sabloff", "Serre duality tables on every generator pair", "stops")
    verb("verdier-compare", "Verdier dual against the standard dual by wrapping", "stops")
    verify = verb("verify-all", "run the acceptance suite")
    verify.add_argument("--only", action="append", help="run only the named check group")
    return parser


def main(argv: Optional[List[str]] = None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        session = Session(args, out)
        return run_verb(session, args)
    except ParseError as e:
        logger.error(f"parse error: {e}")
        return EXIT_PARSE
    except (PreconditionError, ValidationError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_PRECONDITION
    except BudgetExceededError as e:
        logger.error(f"budget exceeded: {e}")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
