"""qtomo command line.

A thin client over the service handlers: every subcommand parses its inputs
into the same request schemas the HTTP API uses, calls the handler in
process, and prints the response.

Exit codes: 0 success, 1 verified mathematical failure (numeric/formula
mismatch, rank-deficient reconstruction), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .errors import ContractViolation, QtomoError, UnderdeterminedSystemError
from .generators import (
    ArithmeticStep,
    GeometricRatio,
    SpectrumModel,
    arithmetic_model,
    geometric_model,
)
from .service import handlers
from .service.schemas import (
    ArithmeticStructurePayload,
    BuildRequest,
    EtaRequest,
    GenericStructurePayload,
    GeometricStructurePayload,
    MatrixPayload,
    ReconstructRequest,
    ReplayRequest,
    SpectrumModelPayload,
    SpectrumRequest,
    TrialInstancePayload,
    VerifyRequest,
    load_problem_file,
)

RECOVERY_THRESHOLD = 1e-6


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump_json(payload) -> str:
    return json.dumps(payload.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag} expects a comma-separated integer list") from exc


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag} expects a comma-separated number list") from exc


def _model_payload(model: SpectrumModel, rates=None) -> SpectrumModelPayload:
    s = model.structure
    if isinstance(s, GeometricRatio):
        structure = GeometricStructurePayload(ratio=(s.ratio.real, s.ratio.imag))
    elif isinstance(s, ArithmeticStep):
        structure = ArithmeticStructurePayload(step=s.step, u=s.u, parity=s.parity)
    else:
        structure = GenericStructurePayload()
    return SpectrumModelPayload(
        alphas=[(v.real, v.imag) for v in model.values],
        mults=list(model.multiplicities),
        structure=structure,
        rates=None if rates is None else [float(g) for g in rates],
    )


def _problem_kwargs(args) -> dict:
    """Assemble generator/spectrum_model request fields from --input/--mults,
    applying --theta/--step/--rates overrides."""
    rates = _parse_float_list(args.rates, "--rates") if getattr(args, "rates", None) else None

    if args.input:
        kwargs = load_problem_file(_read_json(args.input))
    elif getattr(args, "mults", None):
        mults = _parse_int_list(args.mults, "--mults")
        if args.theta is not None:
            model = geometric_model(args.theta, mults)
        elif args.step is not None:
            model = arithmetic_model(args.step, mults)
        else:
            raise UsageError("--mults needs --theta (geometric) or --step (arithmetic)")
        return {"spectrum_model": _model_payload(model, rates), "rates": rates}
    else:
        raise UsageError("provide --input FILE or --mults N,N,...")

    payload = kwargs.get("spectrum_model")
    if payload is not None and (args.theta is not None or args.step is not None):
        if args.theta is not None:
            model = geometric_model(args.theta, payload.mults)
        else:
            model = arithmetic_model(args.step, payload.mults)
        kwargs["spectrum_model"] = _model_payload(model, rates or payload.rates)
    if rates is not None:
        kwargs["rates"] = rates
    return kwargs


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_build(args) -> int:
    req = BuildRequest(**_problem_kwargs(args), seed=args.seed)
    resp = handlers.handle_build(req)
    if args.format == "csv":
        raise UsageError("build emits matrices; use --format json")
    _emit(_dump_json(resp), args.output)
    return 0


def cmd_spectrum(args) -> int:
    req = SpectrumRequest(**_problem_kwargs(args), seed=args.seed,
                          tau_clust=args.tol_clust, tau_rank=args.tol_rank)
    resp = handlers.handle_spectrum(req)
    if args.format == "csv":
        lines = ["value_re,value_im,alg,geo"]
        for c in resp.clusters:
            lines.append(f"{c.value[0]!r},{c.value[1]!r},{c.alg},{c.geo}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(_dump_json(resp), args.output)
    return 0


def cmd_eta(args) -> int:
    req = EtaRequest(**_problem_kwargs(args), seed=args.seed,
                     tau_clust=args.tol_clust, tau_rank=args.tol_rank)
    resp = handlers.handle_eta(req)
    if args.format == "csv":
        agree = "" if resp.agree is None else str(resp.agree).lower()
        text = ("eta,method,agree,mu\n"
                f"{resp.eta},{resp.method},{agree},{resp.numeric.mu}\n")
        _emit(text, args.output)
    else:
        _emit(_dump_json(resp), args.output)
    if resp.method == "mismatch":
        print(
            f"mismatch: numeric eta {resp.numeric.eta} != formula eta "
            f"{resp.formula.eta} ({resp.formula.method})",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_verify(args) -> int:
    if args.replay:
        payload = TrialInstancePayload.model_validate(_read_json(args.replay))
        result = handlers.handle_replay(ReplayRequest(instance=payload))
        _emit(_dump_json(result), args.output)
        return 0 if result.eta_match else 1

    req = VerifyRequest(theorem=args.theorem, trials=args.trials, seed=args.seed,
                        dim_min=args.dim_min, dim_max=args.dim_max)
    resp = handlers.handle_verify(req)

    lines = []
    for case in resp.cases:
        status = "PASS" if case.failed == 0 else "FAIL"
        lines.append(
            f"{status} {case.kind}: {case.passed}/{case.total} eta matches, "
            f"{case.spectrum_mismatches} spectrum mismatches"
        )
    print("\n".join(lines))

    replay_dir = Path(args.failure_dir)
    dumped = []
    for case in resp.cases:
        for i, failure in enumerate(case.failures):
            path = replay_dir / f"qtomo-replay-{case.kind}-{i}.json"
            path.write_text(json.dumps(failure.model_dump(mode="json"),
                                       indent=2, sort_keys=True) + "\n")
            dumped.append(str(path))
    if dumped:
        print("replay files: " + ", ".join(dumped), file=sys.stderr)
    if args.output:
        _emit(_dump_json(resp), args.output)
    return 0 if resp.all_passed else 1


def cmd_reconstruct(args) -> int:
    rho0 = None
    if args.rho0:
        rho0 = MatrixPayload.model_validate(_read_json(args.rho0))
    req = ReconstructRequest(
        **_problem_kwargs(args),
        seed=args.seed,
        rho0=rho0,
        observables=args.observables,
        horizon=args.horizon,
        noise_sigma=args.noise_sigma,
    )
    try:
        resp = handlers.handle_reconstruct(req)
    except UnderdeterminedSystemError as exc:
        print(f"underdetermined: rank {exc.rank} < {exc.required}", file=sys.stderr)
        return 1
    if args.format == "csv":
        lines = ["observable," + ",".join(repr(t) for t in resp.times)]
        for i, row in enumerate(resp.measurements):
            lines.append(f"Q{i + 1}," + ",".join(repr(v) for v in row))
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(_dump_json(resp), args.output)
    if resp.recovery_error >= RECOVERY_THRESHOLD:
        print(
            f"reconstruction error {resp.recovery_error:.3e} exceeds "
            f"{RECOVERY_THRESHOLD:.0e}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_sweep(args) -> int:
    kwargs = _problem_kwargs(args)
    payload = kwargs.get("spectrum_model")
    if payload is None:
        raise UsageError("sweep needs a spectrum model (--input model file or --mults)")
    mults = payload.mults
    r = len(mults)
    if r < 2:
        raise UsageError("sweep needs at least two distinct eigenvalues")
    rates = kwargs.get("rates") or payload.rates

    geometric = isinstance(payload.structure, GeometricStructurePayload)
    if geometric:
        grid = [f * math.pi / (r - 1) for f in np.linspace(0.15, 0.95, args.trials)]
        param = "theta"
    else:
        grid = list(np.linspace(0.3, 1.5, args.trials))
        param = "step"

    rows = []
    all_agree = True
    for value in grid:
        model = geometric_model(value, mults) if geometric else arithmetic_model(value, mults)
        req = EtaRequest(spectrum_model=_model_payload(model, rates), rates=rates,
                         seed=args.seed)
        resp = handlers.handle_eta(req)
        agree = bool(resp.agree)
        all_agree = all_agree and agree
        rows.append((value, resp.numeric.eta,
                     None if resp.formula is None else resp.formula.eta, agree))

    if args.format == "csv":
        lines = [f"{param},eta_numeric,eta_formula,agree"]
        for value, e_num, e_form, agree in rows:
            lines.append(f"{value!r},{e_num},{'' if e_form is None else e_form},"
                         f"{str(agree).lower()}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        body = [
            {"param": param, "value": value, "eta_numeric": e_num,
             "eta_formula": e_form, "agree": agree}
            for value, e_num, e_form, agree in rows
        ]
        _emit(json.dumps(body, indent=2, sort_keys=True) + "\n", args.output)
    return 0 if all_agree else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_problem_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", help="generator spec or spectrum model JSON file")
    p.add_argument("--mults", help="comma-separated multiplicities (with --theta/--step)")
    p.add_argument("--theta", type=float, help="geometric-sequence angle")
    p.add_argument("--step", type=float, help="arithmetic-sequence step")
    p.add_argument("--rates", help="comma-separated power-model rates")
    p.add_argument("--seed", type=int, default=0)


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_tolerance_flags(p: argparse.ArgumentParser):
    p.add_argument("--tol-clust", type=float, default=None,
                   help="absolute eigenvalue clustering tolerance")
    p.add_argument("--tol-rank", type=float, default=None,
                   help="absolute singular-value rank threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtomo",
        description="Evolution generators, index of cyclicity, stroboscopic tomography",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build the superoperator matrix")
    _add_problem_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("spectrum", help="clustered generator spectrum")
    _add_problem_flags(p)
    _add_output_flags(p)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("eta", help="index of cyclicity, numeric and closed-form")
    _add_problem_flags(p)
    _add_output_flags(p)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("verify", help="randomized numeric-vs-formula sweeps")
    p.add_argument("--theorem", choices=("2", "3.1", "3.2", "3.3", "all"), default="all")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim-min", type=int, default=2)
    p.add_argument("--dim-max", type=int, default=5)
    p.add_argument("--replay", help="rerun one dumped trial instance")
    p.add_argument("--failure-dir", default=".",
                   help="where mismatch replay files are written")
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reconstruct", help="simulate measurements and recover the state")
    _add_problem_flags(p)
    _add_output_flags(p)
    p.add_argument("--rho0", help="initial density matrix JSON file (default: seeded random)")
    p.add_argument("--observables", type=int, default=None,
                   help="observable count (default: the index of cyclicity)")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep", help="eta across a theta/step grid")
    _add_problem_flags(p)
    _add_output_flags(p)
    p.add_argument("--trials", type=int, default=10, help="number of grid points")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QTOMO_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except ContractViolation as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 2
    except UnderdeterminedSystemError as exc:
        print(f"underdetermined: rank {exc.rank} < {exc.required}", file=sys.stderr)
        return 1
    except QtomoError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
