"""Command-line driver.

Usage:
    hecke-pm sturm 52 2 --g0
    hecke-pm classify fixtures/S_2_G0_52.basis --p 3 --m 2 --catalog fixtures/S_2_G0_52.catalog
    hecke-pm halfsum fixtures/S_2_G0_52.basis --f f --g gt --p 3

Exit codes: 0 success, 1 mathematical negative (not found, not in span, failed check),
2 input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from hecke_pm import divided_congruence, eigen_classify, nebentypus
from hecke_pm.characters import DirichletCharacter
from hecke_pm.errors import BasisError, HeckePmError, ParseError, PreconditionError
from hecke_pm.hecke_algebra import (
    HeckeMatrixCache,
    SpaceBasis,
    algebra_rank,
    hecke_matrix,
    reduce_form,
)
from hecke_pm.ingest import BasisDirectory, parse_catalog_file, parse_space_file, sibling_catalog
from hecke_pm.qexp import QExpansion, sturm_bound
from hecke_pm.report import Report
from hecke_pm.ring_tower import ModRing
from hecke_pm.services.matrix_store import MatrixStore
from hecke_pm.services.observability import configure_logging, enable_tracing, shutdown_tracing, span

logger = logging.getLogger(__name__)

SHOW_COEFFICIENTS = 20


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting."""

    def error(self, message):
        raise ParseError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hecke-pm", description="Modular forms and Hecke algebras mod p^m")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--trace", choices=("none", "console", "otlp"), default="none")
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    parser.add_argument("--cache-dir", help="directory for persisted Hecke matrices")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized harnesses")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sturm", help="Sturm bound of S_k(Gamma(M))")
    p.add_argument("level", type=int)
    p.add_argument("weight", type=int)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--g0", dest="group", action="store_const", const="g0")
    group.add_argument("--g1", dest="group", action="store_const", const="g1")

    p = sub.add_parser("hecke-matrix", help="T_n in the saturated basis")
    p.add_argument("space")
    p.add_argument("n", type=int)
    p.add_argument("--rank", type=int, metavar="N_MAX", help="also report the rank of T_1..T_N_MAX")

    p = sub.add_parser("classify", help="enumerate and classify weak eigenforms")
    p.add_argument("space")
    _ring_arguments(p)
    p.add_argument("--D", type=int, dest="away_from")
    p.add_argument("--bound", type=int)
    p.add_argument("--catalog")

    p = sub.add_parser("halfsum", help="h = (f + g)/2 mod p^2 with its eigen certificate")
    p.add_argument("space")
    p.add_argument("--f", required=True, dest="f_label")
    p.add_argument("--g", required=True, dest="g_label")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--D", type=int, dest="away_from")
    p.add_argument("--bound", type=int)
    p.add_argument("--catalog")

    p = sub.add_parser("strip-level", help="search a level-N form congruent to a form at level N p^r")
    p.add_argument("space")
    p.add_argument("--form", dest="label", help="row label (default: first row)")
    p.add_argument("--target-level", type=int, required=True)
    p.add_argument("--cmax", type=int, required=True)
    p.add_argument("--bound", type=int)
    p.add_argument("--basis-dir", default=".")
    _ring_arguments(p)

    p = sub.add_parser("roundtrip", help="plant level-N forms times E~ at level N p and strip them again")
    p.add_argument("space")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--cmax", type=int, default=4)
    p.add_argument("--bound", type=int)
    p.add_argument("--basis-dir")
    _ring_arguments(p)

    p = sub.add_parser("divide", help="divide a congruence between forms")
    p.add_argument("--form", action="append", required=True, metavar="FILE:LABEL[*COEFF]")
    p.add_argument("--pi", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--basis", help="express the quotient in this basis")

    p = sub.add_parser("equalize", help="equalize weights with powers of E~")
    p.add_argument("--form", action="append", required=True, metavar="FILE:LABEL[*COEFF]")
    _ring_arguments(p)

    p = sub.add_parser("weights", help="weight congruence check for forms with stroke-eigen sum")
    p.add_argument("--form", action="append", required=True, metavar="FILE:LABEL[*COEFF]")
    p.add_argument("--h", type=int, default=None, help="expected h; the characters of the forms determine it")
    p.add_argument("--D", type=int, dest="away_from", default=1)
    p.add_argument("--variant", action="store_true", help="forms summing to zero mod p^m")
    _ring_arguments(p)

    p = sub.add_parser("obstruct", help="determinant obstruction for a nebentypus")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--char", required=True, dest="character")

    p = sub.add_parser("decompose", help="chi = psi omega^i eta")
    p.add_argument("--char", required=True, dest="character")
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("eisenstein", help="E_(p-1) and E~ = E_(p-1)^(p^(m-1))")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--bound", type=int, default=50)
    return parser


def _ring_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--residue-degree", type=int, default=1, help="f of the unramified coefficient ring")


def _ring(args) -> ModRing:
    return ModRing.unramified(args.p, getattr(args, "residue_degree", 1), args.m)


def _cache(args) -> HeckeMatrixCache:
    return HeckeMatrixCache(MatrixStore(args.cache_dir) if args.cache_dir else None)


def _load_space(path: str, report: Report) -> SpaceBasis:
    S = parse_space_file(path)
    report.add_input(path)
    for w in S.warnings:
        report.warn(w)
    return S


def _load_form(spec: str, report: Report) -> QExpansion:
    """``FILE:LABEL[*COEFF]`` from a basis or catalog file."""
    path, sep, rest = spec.rpartition(":")
    if not sep:
        raise ParseError(f"form must be FILE:LABEL[*COEFF], got {spec!r}")
    label, _, coeff = rest.partition("*")
    if path.endswith(".catalog"):
        form = parse_catalog_file(path).form(label)
    else:
        form = parse_space_file(path).generator(label)
    report.add_input(path)
    if coeff:
        try:
            form = form.scale(int(coeff))
        except ValueError:
            raise ParseError(f"bad coefficient {coeff!r} in {spec!r}") from None
    return form


def _find_labelled(S: SpaceBasis, space_path: str, label: str, catalog: Optional[str], report: Report) -> QExpansion:
    """Basis rows first, then the given catalog, then the catalog next to the basis file."""
    if label in S.labels:
        return S.generator(label)
    for path in (catalog, sibling_catalog(space_path)):
        if path is None:
            continue
        cat = parse_catalog_file(path)
        if label in cat.labels:
            report.add_input(path)
            return cat.form(label)
    raise BasisError(f"no form labelled {label!r} in the basis or its catalogs")


def _catalog_forms(path: Optional[str], space_path: str, report: Report) -> list[QExpansion]:
    path = path or sibling_catalog(space_path)
    if path is None:
        return []
    report.add_input(path)
    return parse_catalog_file(path).forms


def _values_text(values, count: int = SHOW_COEFFICIENTS) -> str:
    return ",".join(str(v) for v in values[:count])


# =============================================================================
# Commands
# =============================================================================


def cmd_sturm(args, report: Report) -> int:
    group = args.group or "g0"
    report.record("sturm", level=args.level, weight=args.weight, group=group, bound=sturm_bound(args.level, args.weight, group))
    return 0


def cmd_hecke_matrix(args, report: Report) -> int:
    S = _load_space(args.space, report)
    cache = _cache(args)
    op = hecke_matrix(S, args.n, cache)
    report.record("hecke-matrix", space=S.describe(), operator=op.tag, matrix=op.matrix.dump().strip().replace("\n", " | "))
    if args.rank:
        report.record("hecke-algebra", n_max=args.rank, rank=algebra_rank(S, args.rank, cache), dimension=S.dimension)
    return 0


def cmd_classify(args, report: Report) -> int:
    S = _load_space(args.space, report)
    ring = _ring(args)
    catalog = _catalog_forms(args.catalog, args.space, report)
    classes = eigen_classify.classify_space(S, ring, args.away_from, args.bound, catalog, _cache(args))
    for entry in classes:
        e = entry.system
        report.record(
            "system",
            ring=ring.describe(),
            root_choice=ring.root_choice(),
            away_from=e.away_from,
            bound=e.bound,
            eigenvalues=e.describe(),
            provenance=entry.provenance,
            matches=[f"{m.label}@{m.prime_index}" for m in entry.matches],
            forms=len(entry.forms),
            coordinates=[f.coordinate_text() for f in entry.forms],
            residual_irreducibility=entry.residual_irreducibility,
        )
    report.record("summary", space=S.describe(), systems=len(classes), forms=sum(len(c.forms) for c in classes))
    report.warn(f"residual irreducibility {eigen_classify.RESIDUAL_IRREDUCIBILITY}")
    return 0


def cmd_halfsum(args, report: Report) -> int:
    S = _load_space(args.space, report)
    cache = _cache(args)
    f = reduce_form(S, _find_labelled(S, args.space, args.f_label, args.catalog, report))
    g = reduce_form(S, _find_labelled(S, args.space, args.g_label, args.catalog, report))
    result = eigen_classify.half_sum_construct(f, g, args.p, args.away_from, args.bound, cache)
    report.record(
        "half-sum",
        p=args.p,
        ring=result.h.ring.describe(),
        away_from=result.away_from,
        bound=result.bound,
        h=_values_text(result.h.values),
        verified=result.verified,
        liftable=result.liftable,
    )
    for entry in result.entries:
        report.record("eigenvalue", n=entry.n, f=entry.lam, g=entry.mu, h=entry.eigenvalue, verified=entry.verified)
    system = eigen_classify.is_weak_eigenform(result.h, result.away_from, result.bound, cache)
    catalog = _catalog_forms(args.catalog, args.space, report)
    if system is not None and catalog:
        matches = eigen_classify.strong_match(system, catalog)
        report.record("strong-match", catalog=[c.label for c in catalog], matches=[m.label for m in matches])
    if result.liftable:
        report.warn("eigenvalues agree mod p^2 at every checked index; h may lift")
    return 0 if result.verified and system is not None else 1


def cmd_strip_level(args, report: Report) -> int:
    S = _load_space(args.space, report)
    ring = _ring(args)
    f = S.generator(args.label) if args.label else S.generators[0]
    bound = args.bound or S.injectivity_bound
    bases = BasisDirectory(args.basis_dir)
    found = divided_congruence.strip_level_search(f, args.target_level, args.cmax, bound, bases, ring)
    for w in bases.warnings:
        report.warn(w)
    if found is None:
        report.record("strip-level", form=f.label, target_level=args.target_level, cmax=args.cmax, bound=bound, found=False)
        report.warn("search exhausted; this is not a proof of non-existence")
        return 1
    report.record(
        "strip-level",
        form=f.label,
        target_level=args.target_level,
        weight=found.weight,
        bound=bound,
        found=True,
        coordinates=found.form.coordinate_text(),
        searched=list(found.searched),
    )
    return 0


class _SingleSpace:
    def __init__(self, S: SpaceBasis):
        self.S = S

    def space(self, level: int, weight: int) -> Optional[SpaceBasis]:
        if level == self.S.level and weight in self.S.weights and len(self.S.weights) == 1:
            return self.S
        return None


def cmd_roundtrip(args, report: Report) -> int:
    S = _load_space(args.space, report)
    ring = _ring(args)
    bound = args.bound or S.injectivity_bound
    bases = BasisDirectory(args.basis_dir) if args.basis_dir else _SingleSpace(S)
    recovered = 0
    instances = divided_congruence.planted_instances(S, args.p, args.m, args.count, args.seed, bound)
    for inst in instances:
        found = divided_congruence.strip_level_search(inst.planted, S.level, args.cmax, bound, bases, ring)
        ok = found is not None and found.form.values[:bound] == tuple(
            ring(c) for c in inst.source.cusp_coefficients(bound)
        )
        recovered += ok
        report.record("planted", source=inst.source.label, weight=inst.weight, recovered=ok, found_weight=found.weight if found else "none")
    report.record("roundtrip", seed=args.seed, count=len(instances), recovered=recovered, bound=bound)
    return 0 if recovered == len(instances) else 1


def cmd_divide(args, report: Report) -> int:
    forms = [_load_form(spec, report) for spec in args.form]
    basis = _load_space(args.basis, report) if args.basis else None
    witness = divided_congruence.divide_congruence(forms, args.pi, args.m, basis)
    report.record(
        "divided-congruence",
        forms=args.form,
        pi=args.pi,
        m=args.m,
        truncation=witness.truncation,
        quotient=_values_text(witness.quotient.cusp_coefficients()),
    )
    if witness.coordinates is not None:
        report.record("coordinates", basis=basis.describe(), coordinates=witness.coordinates.coordinate_text())
    return 0


def cmd_equalize(args, report: Report) -> int:
    forms = [_load_form(spec, report) for spec in args.form]
    result = divided_congruence.equalize_weights(forms, args.p, args.m)
    for spec, f, k in zip(args.form, result.forms, result.powers):
        report.record("equalized", form=spec, weight=result.weight, eisenstein_power=k, truncation=result.truncation, expansion=_values_text(f.cusp_coefficients()))
    return 0


def cmd_weights(args, report: Report) -> int:
    forms = [_load_form(spec, report) for spec in args.form]
    check = divided_congruence.variant_congruence_check if args.variant else divided_congruence.weight_congruence_check
    verdict = check(forms, args.p, args.m, args.h, args.away_from)
    report.record(
        "weight-congruence",
        weights=list(verdict.weights),
        h=verdict.h,
        modulus=verdict.modulus,
        consistent=verdict.consistent,
        violations=[f"{a}~{b}" for a, b in verdict.violations],
    )
    return 0 if verdict.consistent else 1


def cmd_obstruct(args, report: Report) -> int:
    chi = DirichletCharacter.parse(args.character)
    if args.level % chi.modulus:
        raise PreconditionError(f"character modulus {chi.modulus} does not divide level {args.level}")
    chi = chi.lift(args.level)
    d = nebentypus.decompose_character(chi, args.p)
    verdict = nebentypus.obstruction_check(d, args.m)
    report.record("decomposition", character=chi.spec(), psi=d.psi.spec(), i=d.i, eta=d.eta.spec(), s=d.s)
    report.record(
        "obstruction",
        m=args.m,
        ring=verdict.ring,
        ring_size=verdict.ring_size,
        base_image_size=verdict.base_image_size,
        verdict=verdict.verdict,
        eta_order_mod_pm=nebentypus.eta_order_mod(d, args.m),
    )
    return 0


def cmd_decompose(args, report: Report) -> int:
    d = nebentypus.decompose_character(DirichletCharacter.parse(args.character), args.p)
    report.record("decomposition", character=d.character.spec(), psi=d.psi.spec(), i=d.i, eta=d.eta.spec(), s=d.s)
    return 0


def cmd_eisenstein(args, report: Report) -> int:
    E = divided_congruence.eisenstein_series(args.p, args.bound)
    ring = ModRing.integers_mod(args.p, args.m)
    power = divided_congruence.eisenstein_power(args.p, args.m, args.bound, ring)
    report.record(
        "eisenstein",
        weight=args.p - 1,
        factor=divided_congruence.eisenstein_factor(args.p - 1),
        coefficients=_values_text(E.coefficients, 6),
        power_weight=(args.p - 1) * args.p ** (args.m - 1),
        power_congruent_to_one=power[0] == 1 and all(c == 0 for c in power.coefficients[1:]),
        truncation=args.bound,
    )
    return 0


COMMANDS = {
    "sturm": cmd_sturm,
    "hecke-matrix": cmd_hecke_matrix,
    "classify": cmd_classify,
    "halfsum": cmd_halfsum,
    "strip-level": cmd_strip_level,
    "roundtrip": cmd_roundtrip,
    "divide": cmd_divide,
    "equalize": cmd_equalize,
    "weights": cmd_weights,
    "obstruct": cmd_obstruct,
    "decompose": cmd_decompose,
    "eisenstein": cmd_eisenstein,
}


def run(argv: Sequence[str]) -> tuple[int, Report, argparse.Namespace | None]:
    """Parse and dispatch; never raises for user errors."""
    report = Report(command=" ".join(argv))
    try:
        args = build_parser().parse_args(list(argv))
    except ParseError as exc:
        report.warn(str(exc))
        report.exit_code = 2
        return 2, report, None
    configure_logging(args.verbose)
    tracing = enable_tracing(args.trace)
    try:
        with span(f"cli.{args.command}", command=args.command):
            code = COMMANDS[args.command](args, report)
    except HeckePmError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        report.warn(f"{type(exc).__name__}: {exc}")
        code = exc.exit_code
    except OSError as exc:
        logger.error("%s", exc)
        report.warn(str(exc))
        code = 2
    finally:
        if tracing:
            shutdown_tracing()
    report.exit_code = code
    return code, report, args


def main(argv: Optional[Sequence[str]] = None) -> None:
    argv = sys.argv[1:] if argv is None else argv
    code, report, args = run(argv)
    as_json = args.json if args is not None else "--json" in argv
    sys.stdout.write(report.render_json() if as_json else report.render_text())
    sys.exit(code)


if __name__ == "__main__":
    main()
