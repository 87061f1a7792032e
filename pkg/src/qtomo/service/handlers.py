"""Request handlers shared by the HTTP routes and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cyclicity import (
    closed_form_spectrum,
    detect_arithmetic,
    detect_geometric,
    formula_eta,
    index_of_cyclicity,
)
from ..errors import ContractViolation, FormulaHypothesisError
from ..generators import (
    ArithmeticStep,
    GeometricRatio,
    SpectrumModel,
    build_generator,
    build_power_model,
    build_unitary_conjugation,
    generator_scale,
    hermitian_from_spectrum,
    realize_unitary,
)
from ..linalg import as_rng, eig_clustered, is_hermitian, random_density_matrix
from ..sweeps import power_model_scale, random_trials, run_trial, summarize
from ..tomography import design_experiment, observability_rank, reconstruct, synthesize
from .schemas import (
    BuildRequest,
    BuildResponse,
    CyclicityReportPayload,
    EtaRequest,
    EtaResponse,
    FormulaEtaPayload,
    MatrixPayload,
    ReconstructRequest,
    ReconstructResponse,
    ReplayRequest,
    SpectrumRequest,
    SpectrumResponse,
    TrialInstancePayload,
    TrialResultPayload,
    VerifyCasePayload,
    VerifyRequest,
    VerifyResponse,
    _ProblemInput,
    clusters_payload,
)


@dataclass
class _Problem:
    L: np.ndarray
    scale: float
    n: int
    model: SpectrumModel | None  # base-operator spectrum, when known/detected
    evolution: str | None        # closed-form family, when one applies
    rates: tuple[float, ...] | None
    note: str | None = None


def _infer_evolution(model: SpectrumModel, rates) -> str:
    if isinstance(model.structure, GeometricRatio):
        return "unitary_conjugation"
    if isinstance(model.structure, ArithmeticStep):
        return "power_model"
    if rates is not None:
        return "power_model"
    if model.r == 1 and abs(abs(model.values[0]) - 1.0) < 1e-9:
        return "unitary_conjugation"
    raise ContractViolation(
        "cannot infer the evolution family from a generic spectrum; "
        "set 'evolution' (and rates for a power model)"
    )


def _resolve(req: _ProblemInput) -> _Problem:
    if req.spectrum_model is not None:
        model = req.spectrum_model.to_model()
        rates = req.rates if req.rates is not None else req.spectrum_model.rates
        rates = None if rates is None else tuple(float(g) for g in rates)
        evolution = req.evolution or _infer_evolution(model, rates)
        if evolution == "unitary_conjugation":
            F = realize_unitary(model, [req.seed, 3])
            L = build_unitary_conjugation(F)
            return _Problem(L=L, scale=4.0, n=model.dim, model=model,
                            evolution=evolution, rates=rates)
        if rates is None:
            raise ContractViolation("a power-model spectrum needs rates")
        if len(rates) != model.dim:
            raise ContractViolation(
                f"need {model.dim} rates (one per power), got {len(rates)}"
            )
        alphas = [v.real for v in model.values]
        if any(abs(v.imag) > 0 for v in model.values):
            raise ContractViolation("power-model spectra must be real")
        F = hermitian_from_spectrum(alphas, model.multiplicities, [req.seed, 3])
        L = build_power_model(F, rates)
        return _Problem(L=L, scale=power_model_scale(alphas, rates), n=model.dim,
                        model=model, evolution="power_model", rates=rates)

    spec = req.generator.to_spec()
    L = build_generator(spec)
    scale = generator_scale(spec)
    n = spec.dim
    model = None
    evolution = None
    rates = spec.rates
    note = None
    if spec.model == "unitary_conjugation":
        model = detect_geometric(eig_clustered(spec.base_operator))
        if model is not None:
            evolution = "unitary_conjugation"
        else:
            note = ("base spectrum is not a collision-free geometric sequence; "
                    "no closed form applies, numeric route only")
    elif spec.model == "power_model":
        base_spectrum = eig_clustered(spec.base_operator)
        model = detect_arithmetic(base_spectrum)
        if model is None:
            model = SpectrumModel(
                values=tuple(complex(v.real) for v in base_spectrum.values),
                multiplicities=base_spectrum.alg_mults,
            )
        evolution = "power_model"
    return _Problem(L=L, scale=scale, n=n, model=model, evolution=evolution,
                    rates=rates, note=note)


def handle_build(req: BuildRequest) -> BuildResponse:
    p = _resolve(req)
    return BuildResponse(
        matrix=MatrixPayload.from_array(p.L),
        dim=p.n,
        hermitian=is_hermitian(p.L),
    )


def handle_spectrum(req: SpectrumRequest) -> SpectrumResponse:
    if req.spectrum_model is not None:
        p = _resolve(req)
        spectrum = closed_form_spectrum(p.model, p.evolution, p.rates)
        return SpectrumResponse(clusters=clusters_payload(spectrum),
                                dim=spectrum.dim, source="closed_form")
    p = _resolve(req)
    spectrum = eig_clustered(p.L, tau_clust=req.tau_clust, tau_rank=req.tau_rank,
                             scale=p.scale)
    return SpectrumResponse(clusters=clusters_payload(spectrum),
                            dim=spectrum.dim, source="numeric")


def handle_eta(req: EtaRequest) -> EtaResponse:
    p = _resolve(req)
    numeric = index_of_cyclicity(p.L, tau_clust=req.tau_clust, tau_rank=req.tau_rank,
                                 scale=p.scale)
    formula = None
    note = p.note
    if p.model is not None and p.evolution is not None:
        try:
            eta_f, method_f = formula_eta(p.model, p.evolution, p.rates)
            formula = FormulaEtaPayload(eta=eta_f, method=method_f)
        except FormulaHypothesisError as exc:
            note = str(exc)
    if formula is None:
        method, agree = "numeric", None
    elif formula.eta == numeric.eta:
        method, agree = "both-agree", True
    else:
        method, agree = "mismatch", False
    return EtaResponse(
        eta=numeric.eta,
        method=method,
        agree=agree,
        note=note,
        numeric=CyclicityReportPayload.from_report(numeric),
        formula=formula,
    )


def handle_verify(req: VerifyRequest) -> VerifyResponse:
    dims = range(req.dim_min, req.dim_max + 1)
    cases = []
    for kind in req.kinds:
        results = random_trials(kind, req.trials, req.seed, dims)
        s = summarize(results)
        cases.append(
            VerifyCasePayload(
                kind=kind,
                total=s["total"],
                passed=s["passed"],
                failed=s["failed"],
                spectrum_mismatches=s["spectrum_mismatches"],
                failures=[TrialInstancePayload.model_validate(f) for f in s["failures"]],
            )
        )
    return VerifyResponse(cases=cases, all_passed=all(c.failed == 0 for c in cases))


def handle_replay(req: ReplayRequest) -> TrialResultPayload:
    return TrialResultPayload.from_result(run_trial(req.instance.to_instance()))


def handle_reconstruct(req: ReconstructRequest) -> ReconstructResponse:
    p = _resolve(req)
    numeric = index_of_cyclicity(p.L, scale=p.scale)
    count = req.observables if req.observables is not None else numeric.eta
    plan = design_experiment(p.L, count, horizon=req.horizon, seed=[req.seed, 7],
                             scale=p.scale)
    if req.rho0 is not None:
        rho0 = req.rho0.to_array()
    else:
        rho0 = random_density_matrix(p.n, as_rng([req.seed, 11]))
    record = synthesize(plan, rho0, noise_sigma=req.noise_sigma, seed=[req.seed, 13])
    rank = observability_rank(p.L, plan.observables, scale=p.scale)
    rho_hat = reconstruct(plan, record, scale=p.scale)
    error = float(np.linalg.norm(rho_hat - rho0))
    return ReconstructResponse(
        eta=numeric.eta,
        mu=numeric.min_poly_degree,
        rank=rank,
        required_rank=p.n * p.n,
        observables_used=count,
        recovery_error=error,
        times=[float(t) for t in plan.times],
        measurements=[[float(v) for v in row] for row in record.values],
        recovered=MatrixPayload.from_array(rho_hat),
        actual=MatrixPayload.from_array(rho0),
    )
