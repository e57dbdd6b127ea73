"""Command-line front end.

One command per process; every command echoes its configuration and seed into
a JSON report (or a CSV trajectory for `simulate`) so runs are reproducible
byte for byte. Rational flags accept integers and p/q literals only; floats
belong to the numeric commands.

Exit codes: 0 success, 2 validation error, 3 domain error in numeric commands.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .darboux import (
    PENCIL_SAMPLING_NOTE,
    CofactorTemplate,
    DarbouxCert,
    analyze,
    combination_log_terms,
    combine_cofactors,
    lie_derivative_log_combination,
    search_darboux_fixed,
    search_darboux_pencil,
    search_exp_factors,
    verify_cofactor,
    verify_exp_factor,
    verify_exp_factor_rational,
)
from .fieldspec import (
    FieldDef,
    HsaParams,
    ParseError,
    build_hsa,
    hsa_params_of,
    parse_expression,
    parse_field,
)
from .numerics import (
    ConstraintError,
    DomainError,
    IntegralSpec,
    StepMode,
    drift,
    f2_time_derivative_residual,
    integrate,
    step_halving_study,
)
from .polyring import Cofactor, Poly

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/[1-9]\d*)?$")

F2_WINNER_TOLERANCE = 1e-6
F2_LOSER_THRESHOLD = 1e-3


def rational_flag(text: str) -> Fraction:
    if not _RATIONAL_RE.match(text.strip()):
        raise argparse.ArgumentTypeError(
            f"expected an integer or p/q rational literal, got {text!r}"
        )
    return Fraction(text.strip())


def x0_flag(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated floats, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad x0 component: {exc}")


@dataclass
class RunConfig:
    command: str
    args: argparse.Namespace

    def echo(self) -> dict:
        # --out names where the report lands, not what it computes; keeping it
        # out of the echo lets identical runs to different paths stay
        # byte-identical
        skip = {"func", "command", "out"}
        out = {}
        for key in sorted(vars(self.args)):
            if key in skip:
                continue
            val = getattr(self.args, key)
            if val is None:
                continue
            if isinstance(val, Fraction):
                out[key] = str(val)
            elif isinstance(val, tuple):
                out[key] = list(val)
            else:
                out[key] = val
        return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darboux3",
        description=(
            "Search for Darboux polynomials, exponential factors and Darboux first "
            "integrals of 3-D polynomial vector fields, and measure conservation "
            "drift of closed-form integrals along numerically integrated trajectories."
        ),
    )
    parser.add_argument("--version", action="version", version=f"darboux3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "model",
            nargs="?",
            choices=["hsa"],
            help="built-in dynamo model (alternative to --field)",
        )
        p.add_argument("--field", metavar="PATH", help="field definition file")
        p.add_argument("--alpha", type=rational_flag, default=None)
        p.add_argument("--beta", type=rational_flag, default=None)
        p.add_argument("--kappa", type=rational_flag, default=None)
        p.add_argument("--lambda", dest="lam", type=rational_flag, default=None)
        p.add_argument(
            "--param",
            action="append",
            default=None,
            metavar="NAME=VALUE",
            help="extra rational binding for field-file parsing (repeatable)",
        )
        p.add_argument("--seed", type=int, default=0, help="seed for randomized minor sampling")
        p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    p_analyze = sub.add_parser("analyze", help="full search pipeline and integrability verdict")
    add_model_args(p_analyze)
    p_analyze.add_argument("--degree", type=int, default=4)
    p_analyze.set_defaults(func=cmd_analyze)

    p_sd = sub.add_parser("search-darboux", help="Darboux polynomial search")
    add_model_args(p_sd)
    p_sd.add_argument("--degree", type=int, default=4)
    p_sd.add_argument(
        "--cofactor",
        metavar="EXPR",
        help="fully pinned cofactor (degree <= 1 expression); omit for the pencil search",
    )
    p_sd.add_argument(
        "--template-json",
        metavar="JSON",
        help=(
            'pencil template, e.g. {"fixed": {"b1": "0", "b3": "0"}, "eigen": "b0", '
            '"enumerate": {"b2": ["-2", "-1", "0", "1", "2"]}}'
        ),
    )
    p_sd.set_defaults(func=cmd_search_darboux)

    p_se = sub.add_parser("search-expfactors", help="exponential factor search")
    add_model_args(p_se)
    p_se.add_argument("--degree", type=int, default=4)
    p_se.set_defaults(func=cmd_search_expfactors)

    p_comb = sub.add_parser("combine", help="solve the cofactor combination condition")
    p_comb.add_argument("--from", dest="from_report", required=True, metavar="REPORT.json")
    p_comb.add_argument("--seed", type=int, default=0)
    p_comb.add_argument("--out", metavar="PATH")
    p_comb.set_defaults(func=cmd_combine)

    p_verify = sub.add_parser("verify", help="verify a cofactor relation exactly")
    add_model_args(p_verify)
    p_verify.add_argument("--poly", metavar="EXPR", help="Darboux polynomial candidate h")
    p_verify.add_argument("--exp-g", metavar="EXPR", help="exponential-factor exponent g")
    p_verify.add_argument(
        "--exp-den", metavar="EXPR", help="denominator h for a rational exponent g/h"
    )
    p_verify.add_argument("--cofactor", metavar="EXPR", required=True)
    p_verify.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="integrate a trajectory and write CSV")
    add_model_args(p_sim)
    p_sim.add_argument("--x0", type=x0_flag, required=True, metavar="X,Y,Z")
    p_sim.add_argument("--t-end", type=float, default=10.0)
    p_sim.add_argument("--h", type=float, default=None, help="fixed step size")
    p_sim.add_argument("--tolerance", type=float, default=None, help="adaptive per-step tolerance")
    p_sim.set_defaults(func=cmd_simulate)

    p_drift = sub.add_parser("drift", help="conservation drift of an integral along a trajectory")
    add_model_args(p_drift)
    p_drift.add_argument(
        "--integral",
        required=True,
        choices=["F1", "F2_paper", "F2_corrected", "F3", "F4"],
    )
    p_drift.add_argument("--x0", type=x0_flag, required=True, metavar="X,Y,Z")
    p_drift.add_argument("--t-end", type=float, default=10.0)
    p_drift.add_argument("--h", type=float, default=1e-3)
    p_drift.add_argument(
        "--study-h",
        type=float,
        default=None,
        help="also run a step-halving study at this step size",
    )
    p_drift.set_defaults(func=cmd_drift)

    p_f2 = sub.add_parser(
        "f2-experiment",
        help="decide empirically which F2 exponent variant is conserved",
    )
    add_model_args(p_f2)
    p_f2.add_argument("--x0", type=x0_flag, required=True, metavar="X,Y,Z")
    p_f2.add_argument("--t-end", type=float, default=10.0)
    p_f2.add_argument("--h", type=float, default=1e-3)
    p_f2.set_defaults(func=cmd_f2_experiment)

    return parser


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


class CliError(ValueError):
    pass


def _resolve_model(args) -> FieldDef:
    has_hsa = args.model == "hsa"
    has_file = args.field is not None
    if has_hsa == has_file:
        raise CliError("exactly one model source required: positional 'hsa' or --field PATH")
    if has_hsa:
        vals = {}
        for name in ("alpha", "beta", "kappa", "lam"):
            v = getattr(args, name)
            if v is None:
                flag = "--lambda" if name == "lam" else f"--{name}"
                raise CliError(f"builtin hsa model needs {flag}")
            vals[name] = v
        return build_hsa(HsaParams(**vals))
    bindings = {}
    for item in args.param or []:
        if "=" not in item:
            raise CliError(f"--param expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        if not _RATIONAL_RE.match(value.strip()):
            raise CliError(f"--param {name}: expected a rational literal, got {value!r}")
        bindings[name.strip()] = Fraction(value.strip())
    path = Path(args.field)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"--field: cannot read {path}: {exc}")
    return parse_field(text, bindings, label=str(path))


def _model_block(f: FieldDef) -> dict:
    return {
        "label": f.label,
        "dx": str(f.fx),
        "dy": str(f.fy),
        "dz": str(f.fz),
        "params": {k: str(v) for k, v in sorted(f.params.items())},
    }


def _poly_block(p: Poly) -> dict:
    return {"text": str(p), "coefficients": p.coefficient_map()}


def _cert_block(c: DarbouxCert) -> dict:
    return {
        "kind": c.kind,
        "body": _poly_block(c.body),
        "cofactor": _poly_block(c.cofactor.as_poly()),
        "degree": c.body.degree,
        "degree_bound_used": c.degree_bound_used,
        "primitive": c.primitive,
    }


def _base_report(command: str, cfg: RunConfig, f: FieldDef | None) -> dict:
    report = {
        "schema": 1,
        "tool": "darboux3",
        "version": __version__,
        "command": command,
        "seed": getattr(cfg.args, "seed", 0),
        "config": cfg.echo(),
    }
    if f is not None:
        report["model"] = _model_block(f)
    return report


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, report: dict) -> None:
    _emit(args, json.dumps(report, indent=2) + "\n")


def _require_degree(degree: int) -> None:
    if degree < 1:
        raise CliError("--degree must be >= 1")
    if degree > 6:
        raise CliError("--degree is capped at 6 (exact pencils grow too fast beyond that)")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg = RunConfig("analyze", args)
    f = _resolve_model(args)
    _require_degree(args.degree)
    verdict = analyze(f, args.degree, rng=random.Random(args.seed))
    combo_certs = verdict.combination_certs()
    report = _base_report("analyze", cfg, f)
    report.update(
        {
            "degree_bound": verdict.degree_bound,
            "darboux_polynomials": [_cert_block(c) for c in verdict.darboux_polys],
            "exp_factors": [_cert_block(c) for c in verdict.exp_factors],
            "combinations": [
                {
                    "weights": [str(w) for w in combo.weights],
                    "trivial": combo.trivial,
                    "terms": [
                        {"kind": c.kind, "body": str(c.body), "weight": str(w)}
                        for c, w in zip(combo_certs, combo.weights)
                    ],
                }
                for combo in verdict.combinations
            ],
            "conclusion": verdict.conclusion,
            "notes": verdict.notes.split("\n") if verdict.notes else [],
        }
    )
    _emit_json(args, report)
    return EXIT_OK


def _template_from_json(text: str) -> CofactorTemplate:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"--template-json: {exc}")
    try:
        fixed = tuple((k, Fraction(v)) for k, v in raw.get("fixed", {}).items())
        enumerated = tuple(
            (k, tuple(Fraction(x) for x in vals)) for k, vals in raw.get("enumerate", {}).items()
        )
        return CofactorTemplate(fixed=fixed, eigen=raw.get("eigen"), enumerated=enumerated)
    except (ValueError, TypeError) as exc:
        raise CliError(f"--template-json: {exc}")


def cmd_search_darboux(args) -> int:
    cfg = RunConfig("search-darboux", args)
    f = _resolve_model(args)
    _require_degree(args.degree)
    report = _base_report("search-darboux", cfg, f)
    if args.cofactor is not None:
        k = Cofactor.from_poly(parse_expression(args.cofactor, dict(f.params)))
        basis = search_darboux_fixed(f, k, args.degree)
        report.update(
            {
                "mode": "fixed-cofactor",
                "cofactor": _poly_block(k.as_poly()),
                "degree_bound": args.degree,
                "kernel_basis": [_poly_block(p) for p in basis],
            }
        )
    else:
        template = (
            _template_from_json(args.template_json)
            if args.template_json
            else CofactorTemplate.default(args.degree)
        )
        certs, notes = search_darboux_pencil(f, template, args.degree, rng=random.Random(args.seed))
        report.update(
            {
                "mode": "pencil",
                "template": {
                    "fixed": {k: str(v) for k, v in template.fixed},
                    "eigen": template.eigen,
                    "enumerate": {k: [str(v) for v in vals] for k, vals in template.enumerated},
                },
                "degree_bound": args.degree,
                "certificates": [_cert_block(c) for c in certs],
                "notes": [PENCIL_SAMPLING_NOTE] + notes,
            }
        )
    _emit_json(args, report)
    return EXIT_OK


def cmd_search_expfactors(args) -> int:
    cfg = RunConfig("search-expfactors", args)
    f = _resolve_model(args)
    _require_degree(args.degree)
    certs = search_exp_factors(f, args.degree)
    report = _base_report("search-expfactors", cfg, f)
    report.update(
        {
            "degree_bound": args.degree,
            "certificates": [_cert_block(c) for c in certs],
        }
    )
    _emit_json(args, report)
    return EXIT_OK


def cmd_combine(args) -> int:
    cfg = RunConfig("combine", args)
    try:
        source = json.loads(Path(args.from_report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"--from: cannot load report: {exc}")
    model = source.get("model")
    if not model:
        raise CliError("--from: report has no model block")
    f = parse_field(
        f"dx = {model['dx']}\ndy = {model['dy']}\ndz = {model['dz']}\n",
        label=model.get("label", "from-report"),
    )
    cert_blocks = source.get("certificates")
    if cert_blocks is None:
        cert_blocks = source.get("darboux_polynomials", []) + source.get("exp_factors", [])
    certs = []
    for blk in cert_blocks:
        body = parse_expression(blk["body"]["text"])
        cof = Cofactor.from_poly(parse_expression(blk["cofactor"]["text"]))
        certs.append(
            DarbouxCert(blk["kind"], body, cof, blk.get("degree_bound_used", 0), blk["primitive"])
        )
    if not certs:
        raise CliError("--from: report carries no certificates")
    primitive = [c for c in certs if c.primitive]
    use = primitive if primitive else certs
    combos = combine_cofactors(use, f)
    report = _base_report("combine", cfg, f)
    report.update(
        {
            "certificates": [_cert_block(c) for c in use],
            "combinations": [
                {
                    "weights": [str(w) for w in combo.weights],
                    "trivial": combo.trivial,
                    "log_derivative_numerator": (
                        None
                        if combo.trivial
                        else str(
                            lie_derivative_log_combination(
                                f, combination_log_terms(use, combo.weights)
                            )
                        )
                    ),
                }
                for combo in combos
            ],
        }
    )
    _emit_json(args, report)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = RunConfig("verify", args)
    f = _resolve_model(args)
    k = Cofactor.from_poly(parse_expression(args.cofactor, dict(f.params)))
    report = _base_report("verify", cfg, f)
    if (args.poly is None) == (args.exp_g is None):
        raise CliError("verify needs exactly one of --poly or --exp-g")
    if args.poly is not None:
        h = parse_expression(args.poly, dict(f.params))
        if h.is_zero():
            raise CliError("--poly: the zero polynomial is not a Darboux polynomial")
        ok = verify_cofactor(f, h, k)
        report.update({"relation": "X(h) = K*h", "h": _poly_block(h)})
    else:
        g = parse_expression(args.exp_g, dict(f.params))
        if args.exp_den is not None:
            den = parse_expression(args.exp_den, dict(f.params))
            if den.is_zero():
                raise CliError("--exp-den: denominator must be nonzero")
            ok = verify_exp_factor_rational(f, g, den, k)
            report.update(
                {
                    "relation": "X(g/h) = L",
                    "g": _poly_block(g),
                    "denominator": _poly_block(den),
                }
            )
        else:
            ok = verify_exp_factor(f, g, k)
            report.update({"relation": "X(g) = L", "g": _poly_block(g)})
    report.update({"cofactor": _poly_block(k.as_poly()), "verified": bool(ok)})
    _emit_json(args, report)
    return EXIT_OK


def _step_mode(args) -> StepMode:
    if (args.h is None) == (args.tolerance is None):
        raise CliError("simulate needs exactly one of --h or --tolerance")
    if args.h is not None:
        return StepMode.fixed(args.h)
    return StepMode.adaptive(args.tolerance)


def cmd_simulate(args) -> int:
    f = _resolve_model(args)
    mode = _step_mode(args)
    traj = integrate(f, args.x0, args.t_end, mode)
    lines = ["t,x,y,z"]
    for t, (x, y, z) in zip(traj.times, traj.states):
        lines.append(f"{t!r},{x!r},{y!r},{z!r}")
    if traj.truncated_at is not None:
        print(
            f"warning: trajectory truncated at t={traj.truncated_at}: {traj.truncation_reason}",
            file=sys.stderr,
        )
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _drift_block(report_obj) -> dict:
    return {
        "initial_value": report_obj.initial_value,
        "max_abs_drift": report_obj.max_abs_drift,
        "relative_drift": report_obj.relative_drift,
        "window": list(report_obj.window),
        "domain_violation": (
            None
            if report_obj.domain_violation is None
            else {"time": report_obj.domain_violation[0], "reason": report_obj.domain_violation[1]}
        ),
    }


def _require_hsa_model(f: FieldDef) -> HsaParams:
    p = hsa_params_of(f)
    if p is None:
        raise CliError("this command needs the built-in dynamo model (or a field equal to it)")
    return p


def cmd_drift(args) -> int:
    cfg = RunConfig("drift", args)
    f = _resolve_model(args)
    p = _require_hsa_model(f)
    spec = IntegralSpec(args.integral, p)
    traj = integrate(f, args.x0, args.t_end, StepMode.fixed(args.h))
    rep = drift(traj, spec)
    report = _base_report("drift", cfg, f)
    report.update({"integral": args.integral, "drift": _drift_block(rep)})
    if args.study_h is not None:
        study = step_halving_study(f, args.x0, spec, args.study_h, args.t_end)
        report["step_halving"] = {
            "h": args.study_h,
            "drift_h": study.drift_h,
            "drift_half": study.drift_half,
            "ratio": study.ratio,
        }
    _emit_json(args, report)
    return EXIT_OK


def cmd_f2_experiment(args) -> int:
    cfg = RunConfig("f2-experiment", args)
    f = _resolve_model(args)
    p = _require_hsa_model(f)
    traj = integrate(f, args.x0, args.t_end, StepMode.fixed(args.h))
    report = _base_report("f2-experiment", cfg, f)
    results = {}
    for which in ("F2_paper", "F2_corrected"):
        spec = IntegralSpec(which, p)
        rep = drift(traj, spec)
        num, den = f2_time_derivative_residual(p, "paper" if which == "F2_paper" else "corrected")
        results[which] = {
            "drift": _drift_block(rep),
            "symbolic_ddt_numerator": str(num),
            "symbolic_ddt_denominator": str(den),
            "symbolically_conserved": num.is_zero(),
        }
    rp = results["F2_paper"]["drift"]["relative_drift"]
    rc = results["F2_corrected"]["drift"]["relative_drift"]
    winner = None
    if rc <= F2_WINNER_TOLERANCE and rp > F2_LOSER_THRESHOLD:
        winner = "F2_corrected"
    elif rp <= F2_WINNER_TOLERANCE and rc > F2_LOSER_THRESHOLD:
        winner = "F2_paper"
    report.update(
        {
            "variants": results,
            "winner_tolerance": F2_WINNER_TOLERANCE,
            "loser_threshold": F2_LOSER_THRESHOLD,
            "conserved_variant": winner if winner else "inconclusive",
        }
    )
    _emit_json(args, report)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (CliError, ParseError, ConstraintError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
