"""Command line front end: ``dgatiyah COMMAND MANIFEST [flags]``.

Reports are JSON with sorted keys.  Exit codes: 0 all checks pass, 1 some
check fails, 2 the input is unusable (schema, parse or precondition error).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from itertools import combinations_with_replacement

from . import cohomology as coh
from .algebra import ParseError
from .char_classes import FormContext, scalar_atiyah, todd
from .connections import (JACOBIATOR_SIGN, Connection, DegreeError, antisymmetrization_check,
                          atiyah_bundle, atiyah_tangent, complex_differential,
                          connection_difference, is_torsion_free, jacobiator_check,
                          lemma_dog_check, symmetrize, tangent_bundle, torsion, velociraptor)
from .manifest import Manifest, ManifestError, load
from .pbw import TransferredBrackets, default_generators, linfty_check, pbw_roundtrip_check
from .report import CheckReport
from .vector_fields import VectorField, lie_derivative, validate_homological

FORM_SLOT_CONVENTION = "phi(X,s) = (-1)^{p(|X|+1)} (i_X omega)(s)"


class InputError(ValueError):
    """Mathematical precondition not met by the input (exit code 2)."""


def _tensor_dict(t, m: Manifest, bundle: bool = False):
    names = list(m.bundle.names) if bundle else None
    return t.to_dict(names) if names else t.to_dict()


def _require_torsion_free(nabla: Connection, what: str):
    if not is_torsion_free(nabla):
        raise InputError(f"{what} requires a torsion-free connection; run 'symmetrize' first")


def cmd_validate(m: Manifest, args) -> list:
    if m.lie_algebra is not None:
        checks = [coh.validate_lie(m.lie_algebra)]
    else:
        checks = [validate_homological(m.manifold)]
    if m.bundle is not None:
        checks.append(m.bundle.validate())
    return checks


def cmd_atiyah(m: Manifest, args) -> list:
    M, nabla = m.manifold, m.connection
    E = tangent_bundle(M)
    at = atiyah_tangent(M, nabla)
    rep = CheckReport("atiyah-cocycle")
    if not complex_differential(at, E).is_zero():
        rep.fail({"differential": complex_differential(at, E).to_dict()})
    rep.data["atiyah"] = at.to_dict()
    rep.data["connection"] = nabla.to_dict()
    agree = CheckReport("tangent-equals-bundle-route")
    if atiyah_bundle(E, nabla) != at:
        agree.fail({"bundle_route": atiyah_bundle(E, nabla).to_dict()})
    trivial = Connection.trivial(M.ctx)
    vr = CheckReport("velociraptor")
    if atiyah_tangent(M, trivial) != velociraptor(M):
        vr.fail({"velociraptor": velociraptor(M).to_dict()})
    indep = CheckReport("connection-independence")
    if at - atiyah_tangent(M, trivial) != complex_differential(connection_difference(nabla, trivial), E):
        indep.fail({"connection": nabla.to_dict()})
    checks = [rep, agree, vr, indep]
    if m.bundle is not None:
        ab = atiyah_bundle(m.bundle, m.bundle_connection)
        brep = CheckReport("bundle-atiyah-cocycle")
        if not complex_differential(ab, m.bundle).is_zero():
            brep.fail({"differential": _tensor_dict(complex_differential(ab, m.bundle), m, True)})
        brep.data["atiyah"] = _tensor_dict(ab, m, True)
        checks.append(brep)
    return checks


def cmd_torsion(m: Manifest, args) -> list:
    rep = CheckReport("torsion")
    rep.data["torsion"] = torsion(m.connection).to_dict()
    rep.data["torsion_free"] = is_torsion_free(m.connection)
    return [rep, antisymmetrization_check(m.manifold, m.connection)]


def cmd_symmetrize(m: Manifest, args) -> list:
    sym = symmetrize(m.connection)
    rep = CheckReport("symmetrize")
    rep.data["connection"] = sym.to_dict()
    if not is_torsion_free(sym):
        rep.fail({"torsion": torsion(sym).to_dict()})
    return [rep, antisymmetrization_check(m.manifold, sym)]


def cmd_brackets(m: Manifest, args) -> list:
    M, nabla = m.manifold, m.connection
    _require_torsion_free(nabla, "brackets")
    br = TransferredBrackets(M, nabla)
    ctx = M.ctx
    fields = [VectorField.coordinate(ctx, i) for i in range(len(ctx))]
    table = {}
    for k in range(1, args.max_arity + 1):
        row = {}
        for tup in combinations_with_replacement(range(len(ctx)), k):
            v = br([fields[i] for i in tup])
            if v:
                row[",".join(ctx.names[i] for i in tup)] = v.to_dict()
        table[str(k)] = row
    rep = CheckReport("brackets")
    rep.data["brackets"] = table
    low = CheckReport("lambda1-lambda2")
    at = atiyah_tangent(M, nabla)
    for i, X in enumerate(fields):
        if br([X]) != lie_derivative(M, X):
            low.fail({"lambda1": ctx.names[i]})
        for j, Y in enumerate(fields):
            if args.max_arity >= 2 and br([X, Y]) != at.evaluate_fields(X, Y):
                low.fail({"lambda2": [ctx.names[i], ctx.names[j]]})
    return [rep, low]


def cmd_linfty(m: Manifest, args) -> list:
    M, nabla = m.manifold, m.connection
    _require_torsion_free(nabla, "linfty-check")
    gens = default_generators(M.ctx, max_length=args.gen_degree)
    rep = linfty_check(M, nabla, args.max_arity, generators=gens,
                       max_tuples=None if args.exhaustive else args.max_tuples)
    jac = jacobiator_check(M, nabla)
    return [rep, jac]


def cmd_pbw(m: Manifest, args) -> list:
    _require_torsion_free(m.connection, "pbw")
    return [pbw_roundtrip_check(m.connection, args.order)]


def _closure(M, forms: dict, name: str) -> CheckReport:
    rep = CheckReport(name)
    LQ = FormContext(M.ctx).lie_derivative(M)
    for key, w in forms.items():
        if LQ.apply(w):
            rep.fail({"not_closed": key, "L_Q": str(LQ.apply(w))})
    return rep


def _bundle_args(m: Manifest, args):
    if getattr(args, "bundle", False):
        if m.bundle is None:
            raise InputError("manifest has no bundle")
        return m.bundle, m.bundle_connection
    return None, m.connection


def cmd_todd(m: Manifest, args) -> list:
    M = m.manifold
    E, nabla = _bundle_args(m, args)
    K = args.max_degree if args.max_degree is not None else len(M.ctx)
    td = todd(M, nabla, K, E)
    fctx = FormContext(M.ctx)
    parts = {str(k): fctx.wedge_component(td, k) for k in range(K + 1)}
    rep = _closure(M, parts, "todd")
    rep.data.update({"max_degree": K, "todd": str(td),
                     "components": {k: str(v) for k, v in parts.items() if v}})
    return [rep]


def cmd_chern(m: Manifest, args) -> list:
    M = m.manifold
    E, nabla = _bundle_args(m, args)
    classes = {str(k): scalar_atiyah(M, nabla, k, E) for k in range(1, args.k + 1)}
    rep = _closure(M, {k: c.form for k, c in classes.items()}, "scalar-atiyah")
    rep.data["classes"] = {k: c.to_dict() for k, c in classes.items()}
    return [rep]


def cmd_cohomology(m: Manifest, args) -> list:
    M = m.manifold
    try:
        space = coh.space_for(M, args.space)
    except (coh.UnboundedSliceError, ValueError) as e:
        raise InputError(str(e)) from None
    here = coh.assemble_slice(M, space, args.degree)
    before = coh.assemble_slice(M, space, args.degree - 1)
    rep = CheckReport("cohomology")
    dim = len(here.basis) - here.rank - before.rank
    rep.data.update({"space": args.space, "degree": args.degree, "dimension": dim,
                     "slice_dimension": len(here.basis), "rank_out": here.rank,
                     "rank_in": before.rank})
    if m.lie_algebra is not None:
        g = m.lie_algebra
        if args.space.startswith("omega:") and int(args.space[6:]) == args.degree:
            rep.data["invariants_oracle"] = coh.invariants_dim(g, args.degree)
            if rep.data["invariants_oracle"] != dim:
                rep.fail({"oracle": rep.data["invariants_oracle"], "dimension": dim})
        if args.space == "tensor":
            rep.data["ce_oracle"] = coh.ce_cohomology_dim(g, args.degree - 1)
            if rep.data["ce_oracle"] != dim:
                rep.fail({"oracle": rep.data["ce_oracle"], "dimension": dim})
    return [rep]


def cmd_duflo(m: Manifest, args) -> list:
    if m.lie_algebra is None:
        raise InputError("duflo needs a manifest with a lie_algebra block")
    return [coh.duflo_compare(m.lie_algebra, args.order),
            coh.bracket_class_check(m.lie_algebra)]


def cmd_lemma_dog(m: Manifest, args) -> list:
    rep = CheckReport("lemma-dog")
    only_trivial = lemma_dog_check(m.manifold.ctx)
    rep.data["only_trivial_connection"] = only_trivial
    rep.data["degrees"] = list(m.manifold.ctx.degrees)
    return [rep]


COMMANDS = {
    "validate": cmd_validate,
    "atiyah": cmd_atiyah,
    "torsion": cmd_torsion,
    "symmetrize": cmd_symmetrize,
    "brackets": cmd_brackets,
    "linfty-check": cmd_linfty,
    "pbw": cmd_pbw,
    "todd": cmd_todd,
    "chern": cmd_chern,
    "cohomology": cmd_cohomology,
    "duflo": cmd_duflo,
    "lemma-dog": cmd_lemma_dog,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgatiyah", description=__doc__.splitlines()[0])
    p.add_argument("--timing", action="store_true", help="print wall time to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("manifest", help="path to a JSON manifest or the name of a shipped one")
        return sp

    add("validate", "check degrees and [Q,Q] = 0")
    add("atiyah", "Atiyah cocycle with cocycle and consistency checks")
    add("torsion", "torsion of the connection and Alt(At) = L_Q T")
    add("symmetrize", "torsion-free symmetrization of the connection")
    sp = add("brackets", "transferred brackets on coordinate fields")
    sp.add_argument("--max-arity", type=int, default=4)
    sp = add("linfty-check", "generalized Jacobi identities of the transferred brackets")
    sp.add_argument("--max-arity", type=int, default=4)
    sp.add_argument("--gen-degree", type=int, default=2)
    sp.add_argument("--max-tuples", type=int, default=400)
    sp.add_argument("--exhaustive", action="store_true")
    sp = add("pbw", "PBW round trip")
    sp.add_argument("--order", type=int, default=4)
    sp = add("todd", "Todd class")
    sp.add_argument("--max-degree", type=int, default=None)
    sp.add_argument("--bundle", action="store_true", help="use the manifest bundle")
    sp = add("chern", "scalar Atiyah classes str(alpha^k)/k!")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--bundle", action="store_true", help="use the manifest bundle")
    sp = add("cohomology", "dimension of a cohomology slice")
    sp.add_argument("--space", default="tensor", help="functions, omega:K or tensor")
    sp.add_argument("--degree", type=int, required=True)
    sp = add("duflo", "Todd class of g[1] against the adjoint det-series")
    sp.add_argument("--order", type=int, default=2)
    add("lemma-dog", "decide whether only the trivial connection exists")
    return p


def run(argv=None) -> tuple:
    """Return (exit_code, report_dict_or_None, error_message_or_None)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        m = load(args.manifest)
        checks = COMMANDS[args.command](m, args)
    except (ManifestError, InputError, DegreeError, ParseError, coh.JacobiError) as e:
        return 2, None, str(e)
    options = {k: v for k, v in sorted(vars(args).items())
               if k not in ("command", "manifest", "timing")}
    passed = all(c.passed for c in checks)
    report = {
        "command": args.command,
        "manifest": m.name,
        "options": options,
        "passed": passed,
        "checks": [c.to_dict() for c in checks],
        "conventions": {
            "sigma": coh.SIGMA,
            "jacobiator_sign": JACOBIATOR_SIGN,
            "form_slot": FORM_SLOT_CONVENTION,
            "supertrace": "str(m) = sum_a (-1)^{|e_a|} m_aa",
        },
    }
    return (0 if passed else 1), report, None


def main(argv=None) -> int:
    start = time.perf_counter()
    code, report, err = run(argv)
    if err is not None:
        print(json.dumps({"error": err}, sort_keys=True), file=sys.stderr)
    else:
        print(json.dumps(report, sort_keys=True, indent=2, default=str))
    if "--timing" in (argv if argv is not None else sys.argv[1:]):
        print(f"wall time: {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
