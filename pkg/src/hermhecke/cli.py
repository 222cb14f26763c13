"""Command line: Cartan/orbit invariants, Hecke products, freeness certificates.

Exit codes: 0 pass, 1 invalid input, 2 enumeration budget exceeded,
3 verification (or certification) failure.  Errors are printed to stdout
as a JSON object with an "error" key.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import weights as W
from .field import FieldConfig
from .filtered import (
    EliminationStall,
    FreenessCertificate,
    build_model,
    certify_graded_freeness,
    check_filtration_compatibility,
    graded_leading_model,
    lift_freeness,
    verify_certificate,
)
from .hecke import DEFAULT_BUDGET, BudgetExceeded, HeckeContext, leading_decomposition, table_csv_rows
from .hermitian import HermitianForm, NotHermitianError, congruence_diagonalize, orbit_invariant, validity_report
from .lattice import MatrixE, NotUnimodularError, cartan_coordinate

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_FAILED = 0, 1, 2, 3


class CommandError(Exception):
    def __init__(self, code: int, payload: dict):
        super().__init__(payload.get("error"))
        self.code = code
        self.payload = payload


@dataclass(frozen=True)
class RunConfig:
    q: int = 3
    n: int = 2
    radius: int = 1
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    out: str | None = None
    witness: bool = False
    format: str = "json"
    workers: int = 1

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        self.field_config  # validates q and n

    @property
    def field_config(self) -> FieldConfig:
        return FieldConfig(q=self.q, n=self.n)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            q=args.q,
            n=args.n,
            radius=args.radius,
            budget=args.budget,
            seed=args.seed,
            out=args.out,
            witness=args.witness,
            format=args.format,
            workers=args.workers,
        )


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise CommandError(EXIT_INVALID, {"error": "unreadable-input", "detail": str(exc)})


def _load_matrix(cfg: RunConfig, path: str) -> MatrixE:
    obj = _load_json(path)
    try:
        return MatrixE.from_json(cfg.field_config.local_field, obj)
    except (ValueError, KeyError, TypeError, IndexError, ZeroDivisionError) as exc:
        raise CommandError(EXIT_INVALID, {"error": "malformed-matrix", "detail": str(exc)})


def _weight_arg(text: str, n: int) -> tuple:
    try:
        lam = W.parse_weight(text)
        if len(lam) != n:
            raise ValueError(f"expected {n} entries")
        return W.chamber_coords(lam)
    except (ValueError, ZeroDivisionError) as exc:
        raise CommandError(EXIT_INVALID, {"error": "invalid-weight", "weight": text, "detail": str(exc)})


def _wj(d) -> list:
    return W.weight_to_json(W.from_chamber(d))


# ---------------------------------------------------------------------------


def cmd_cartan(cfg: RunConfig, path: str) -> dict:
    g = _load_matrix(cfg, path)
    try:
        res = cartan_coordinate(g, witness=cfg.witness)
    except NotUnimodularError:
        raise CommandError(EXIT_INVALID, {"error": "not-unimodular", "det": g.det().to_json()})
    if not cfg.witness:
        return {"cartan": list(res)}
    return {"cartan": list(res.coordinate), "k1": res.k1.to_json(), "k2": res.k2.to_json()}


def cmd_orbit(cfg: RunConfig, path: str) -> dict:
    m = _load_matrix(cfg, path)
    try:
        x = HermitianForm(m)
    except NotHermitianError as exc:
        raise CommandError(EXIT_INVALID, {"error": "not-hermitian", "index": list(exc.index)})
    except NotUnimodularError:
        raise CommandError(EXIT_INVALID, {"error": "not-unimodular", "det": m.det().to_json()})
    out = {"orbit": list(orbit_invariant(x))}
    if cfg.witness:
        dg = congruence_diagonalize(x)
        out.update({"k": dg.k.to_json(), "diagonal": dg.d.to_json(), "exact": dg.exact, "precision": dg.precision})
    return out


def cmd_check_form(cfg: RunConfig, path: str) -> dict:
    m = _load_matrix(cfg, path)
    report = validity_report(m)
    if report is not None:
        raise CommandError(EXIT_INVALID, report)
    return {"valid": True}


def _product(cfg: RunConfig, kind: str, lam_s: str, mu_s: str):
    lam, mu = _weight_arg(lam_s, cfg.n), _weight_arg(mu_s, cfg.n)
    ctx = HeckeContext(cfg.field_config, cfg.budget)
    try:
        elem = ctx.act_basis(lam, mu) if kind == "act" else ctx.convolve_basis(lam, mu)
    except BudgetExceeded as exc:
        raise CommandError(EXIT_BUDGET, {"error": "budget-exceeded", "weight": _wj(exc.chamber), "size": exc.size, "budget": exc.budget})
    top = W.add(W.phi_chamber(lam), mu) if kind == "act" else W.add(lam, mu)
    return lam, mu, top, elem


def cmd_product(cfg: RunConfig, kind: str, lam_s: str, mu_s: str):
    lam, mu, top, elem = _product(cfg, kind, lam_s, mu_s)
    if cfg.format == "csv":
        return table_csv_rows([(lam, mu, nu, c) for nu, c in elem.items()])
    dec = leading_decomposition(elem, top)
    terms = elem.to_json()
    for t, (nu, _) in zip(terms, elem.items()):
        t["leading"] = nu == top
    return {
        "kind": kind,
        "lambda": _wj(lam),
        "mu": _wj(mu),
        "top": _wj(top),
        "leading": str(dec.coefficient),
        "certified": dec.certified and dec.coefficient > 0,
        "violations": [_wj(v) for v in dec.violations],
        "terms": terms,
    }


def cmd_table(cfg: RunConfig, kind: str):
    ctx = HeckeContext(cfg.field_config, cfg.budget)
    box = W.dominant_box(cfg.n, cfg.radius)
    try:
        rows = ctx.table(kind, box, workers=cfg.workers)
    except BudgetExceeded as exc:
        raise CommandError(EXIT_BUDGET, {"error": "budget-exceeded", "weight": _wj(exc.chamber), "size": exc.size, "budget": exc.budget})
    if cfg.format == "csv":
        return table_csv_rows(rows)
    return [{"lambda": _wj(a), "mu": _wj(b), "nu": _wj(c), "count": int(k)} for a, b, c, k in rows]


def _model(cfg: RunConfig):
    try:
        return build_model(cfg.field_config, cfg.radius, cfg.budget, cfg.workers)
    except BudgetExceeded as exc:
        raise CommandError(EXIT_BUDGET, {"error": "budget-exceeded", "weight": _wj(exc.chamber), "size": exc.size, "budget": exc.budget})


def cmd_certify(cfg: RunConfig) -> dict:
    model = _model(cfg)
    compat = check_filtration_compatibility(model)
    if not compat.ok:
        raise CommandError(EXIT_FAILED, {"error": "filtration-incompatible", "violation": [_wj(d) for d in compat.violation], "reason": compat.reason})
    basis = W.residue_classes(cfg.n)
    graded = certify_graded_freeness(graded_leading_model(model), basis)
    if not graded.ok:
        raise CommandError(EXIT_FAILED, {"error": "graded-freeness-failed", "witness": repr(graded)})
    try:
        cert = lift_freeness(model, basis)
    except EliminationStall as exc:
        raise CommandError(EXIT_FAILED, {"error": "elimination-stall", "nu": _wj(exc.nu), "missing": _wj(exc.missing), "suggested_radius": exc.suggested_radius})
    text = cert.dumps()
    if cfg.out:
        Path(cfg.out).write_text(text)
        return {"certificate": cfg.out, "rank": cert.rank, "basis": [_wj(b) for b in cert.basis], "size": len(cert.entries), "digest": cert.digest}
    return cert.to_json()


def cmd_verify(cfg: RunConfig, path: str) -> dict:
    obj = _load_json(path)
    try:
        cert = FreenessCertificate.from_json(obj)
        q = cert.q if cert.q is not None else cfg.q
        radius = cert.radius if cert.radius is not None else cfg.radius
        run = RunConfig(q=q, n=cert.n, radius=radius, budget=cfg.budget, workers=cfg.workers)
    except (ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
        raise CommandError(EXIT_INVALID, {"error": "malformed-certificate", "detail": str(exc)})
    model = _model(run)
    report = verify_certificate(cert, model, workers=cfg.workers)
    if not report.ok:
        bad = _wj(report.first_bad) if report.first_bad is not None else None
        raise CommandError(EXIT_FAILED, {"error": "verification-failed", "first_bad": bad, "reason": report.reason})
    return {"verified": True, "rank": cert.rank, "size": len(cert.entries), "digest": cert.digest}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=int, default=3, help="residue field size (odd prime power)")
    common.add_argument("--n", type=int, default=2, help="matrix size")
    common.add_argument("--radius", type=int, default=1, help="dominant box radius")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max Hermite candidates per coset family")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--witness", action="store_true", help="include transformation witnesses")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="hermhecke", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("cartan", "Cartan coordinate of a det-1 matrix"), ("orbit", "K_0-orbit invariant of a Hermitian form"), ("check-form", "which form invariant fails")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("file", help="matrix JSON ('-' for stdin)")
    for name in ("convolve", "act"):
        p = sub.add_parser(name, parents=[common], help=f"{name} two basis elements")
        p.add_argument("lam", help="dominant weight, e.g. 1,-1 or 1/2,-1/2")
        p.add_argument("mu")
    p = sub.add_parser("table", parents=[common], help="structure constants over the radius box")
    p.add_argument("--kind", choices=("act", "convolve"), default="act")
    sub.add_parser("certify", parents=[common], help="freeness certificate on the radius box")
    p = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    p.add_argument("file")
    return parser


def _emit(result, cfg: RunConfig, stream) -> None:
    if isinstance(result, list) and result and isinstance(result[0], list):
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(result)
        text = buf.getvalue()
    else:
        text = _dumps(result)
    if cfg.out and not (isinstance(result, dict) and result.get("certificate") == cfg.out):
        Path(cfg.out).write_text(text)
    else:
        stream.write(text)


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
    except ValueError as exc:
        stream.write(_dumps({"error": "invalid-config", "detail": str(exc)}))
        return EXIT_INVALID
    try:
        if args.command == "cartan":
            result = cmd_cartan(cfg, args.file)
        elif args.command == "orbit":
            result = cmd_orbit(cfg, args.file)
        elif args.command == "check-form":
            result = cmd_check_form(cfg, args.file)
        elif args.command in ("convolve", "act"):
            result = cmd_product(cfg, "act" if args.command == "act" else "conv", args.lam, args.mu)
        elif args.command == "table":
            result = cmd_table(cfg, "act" if args.kind == "act" else "conv")
        elif args.command == "certify":
            result = cmd_certify(cfg)
        else:
            result = cmd_verify(cfg, args.file)
    except CommandError as exc:
        stream.write(_dumps(exc.payload))
        return exc.code
    _emit(result, cfg, stream)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
