"""Request/response schemas for the service and the CLI file formats.

Complex scalars travel as ``[re, im]`` pairs.  Matrices travel as
``{"rows": n, "cols": m, "data": [[re, im], ...]}`` with ``data`` in
row-major order.  Unknown keys are rejected everywhere.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..cyclicity import CyclicityReport
from ..errors import ContractViolation
from ..generators import (
    ArithmeticStep,
    GeneratorSpec,
    GenericStructure,
    GeometricRatio,
    SpectrumModel,
)
from ..linalg import Spectrum
from ..sweeps import TrialInstance, TrialResult

ComplexPair = tuple[float, float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


class MatrixPayload(StrictModel):
    """Dense complex matrix: row-major list of [re, im] entries."""

    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    data: list[ComplexPair]

    @model_validator(mode="after")
    def _check_size(self):
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f"data has {len(self.data)} entries, expected rows*cols = "
                f"{self.rows * self.cols}"
            )
        return self

    def to_array(self) -> np.ndarray:
        flat = np.array([complex(re, im) for re, im in self.data], dtype=complex)
        return flat.reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, M) -> "MatrixPayload":
        A = np.atleast_2d(np.asarray(M, dtype=complex))
        return cls(
            rows=A.shape[0],
            cols=A.shape[1],
            data=[_pair(z) for z in A.reshape(-1)],
        )


class LindbladTermPayload(StrictModel):
    V: MatrixPayload
    gamma: float = Field(ge=0)


class GeneratorSpecPayload(StrictModel):
    """Declarative evolution model; mirrors :class:`GeneratorSpec`."""

    model: Literal["gksl", "unitary_conjugation", "power_model", "gaussian", "von_neumann"]
    H: Optional[MatrixPayload] = None
    F: Optional[MatrixPayload] = None
    lindblad: Optional[list[LindbladTermPayload]] = None
    rates: Optional[list[float]] = None

    def to_spec(self) -> GeneratorSpec:
        return GeneratorSpec(
            model=self.model,
            hamiltonian=None if self.H is None else self.H.to_array(),
            lindblad_ops=tuple(
                (term.V.to_array(), float(term.gamma)) for term in (self.lindblad or [])
            ),
            base_operator=None if self.F is None else self.F.to_array(),
            rates=None if self.rates is None else tuple(float(g) for g in self.rates),
        )


class GenericStructurePayload(StrictModel):
    type: Literal["generic"] = "generic"


class GeometricStructurePayload(StrictModel):
    type: Literal["geometric"] = "geometric"
    ratio: Optional[ComplexPair] = None
    theta: Optional[float] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.ratio is None) == (self.theta is None):
            raise ValueError("geometric structure needs exactly one of 'ratio' or 'theta'")
        return self


class ArithmeticStructurePayload(StrictModel):
    type: Literal["arithmetic"] = "arithmetic"
    step: float
    u: Optional[int] = None
    parity: Optional[Literal["odd", "even"]] = None


StructurePayload = Annotated[
    Union[GenericStructurePayload, GeometricStructurePayload, ArithmeticStructurePayload],
    Field(discriminator="type"),
]


class SpectrumModelPayload(StrictModel):
    """Operator spectrum with structure; mirrors :class:`SpectrumModel`.

    ``rates`` may ride along for power-model requests.
    """

    alphas: list[ComplexPair]
    mults: list[int]
    structure: StructurePayload = Field(default_factory=GenericStructurePayload)
    rates: Optional[list[float]] = None

    def to_model(self) -> SpectrumModel:
        values = tuple(complex(re, im) for re, im in self.alphas)
        mults = tuple(int(n) for n in self.mults)
        s = self.structure
        if isinstance(s, GenericStructurePayload):
            structure = GenericStructure()
        elif isinstance(s, GeometricStructurePayload):
            if s.theta is not None:
                structure = GeometricRatio(complex(np.cos(s.theta), np.sin(s.theta)))
            else:
                structure = GeometricRatio(complex(s.ratio[0], s.ratio[1]))
        else:
            r = len(mults)
            parity = s.parity or ("odd" if r % 2 == 1 else "even")
            u = s.u if s.u is not None else ((r - 1) // 2 if parity == "odd" else r // 2)
            structure = ArithmeticStep(step=float(s.step), u=int(u), parity=parity)
        return SpectrumModel(values=values, multiplicities=mults, structure=structure)


class ClusterPayload(StrictModel):
    value: ComplexPair
    alg: int
    geo: int


def clusters_payload(spectrum: Spectrum) -> list[ClusterPayload]:
    return [
        ClusterPayload(value=_pair(c.value), alg=c.alg_mult, geo=c.geo_mult)
        for c in spectrum.clusters
    ]


class CyclicityReportPayload(StrictModel):
    eta: int
    method: str
    mu: int
    attaining: list[ComplexPair]
    spectrum: list[ClusterPayload]
    warnings: list[str] = []

    @classmethod
    def from_report(cls, report: CyclicityReport) -> "CyclicityReportPayload":
        return cls(
            eta=report.eta,
            method=report.method,
            mu=report.min_poly_degree,
            attaining=[_pair(v) for v in report.attaining],
            spectrum=clusters_payload(report.spectrum),
            warnings=list(report.warnings),
        )


# ---------------------------------------------------------------------------
# Endpoint payloads
# ---------------------------------------------------------------------------

class _ProblemInput(StrictModel):
    """Either a concrete generator spec or a spectrum model to realize."""

    generator: Optional[GeneratorSpecPayload] = None
    spectrum_model: Optional[SpectrumModelPayload] = None
    evolution: Optional[Literal["unitary_conjugation", "power_model"]] = None
    rates: Optional[list[float]] = None
    seed: int = 0

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.generator is None) == (self.spectrum_model is None):
            raise ValueError("provide exactly one of 'generator' or 'spectrum_model'")
        return self


class BuildRequest(_ProblemInput):
    pass


class BuildResponse(StrictModel):
    matrix: MatrixPayload
    dim: int
    hermitian: bool


class SpectrumRequest(_ProblemInput):
    tau_clust: Optional[float] = None
    tau_rank: Optional[float] = None


class SpectrumResponse(StrictModel):
    clusters: list[ClusterPayload]
    dim: int
    source: Literal["numeric", "closed_form"]


class EtaRequest(_ProblemInput):
    tau_clust: Optional[float] = None
    tau_rank: Optional[float] = None


class FormulaEtaPayload(StrictModel):
    eta: int
    method: str


class EtaResponse(StrictModel):
    eta: int
    method: str  # numeric | both-agree | mismatch
    agree: Optional[bool] = None
    note: Optional[str] = None
    numeric: CyclicityReportPayload
    formula: Optional[FormulaEtaPayload] = None


_THEOREM_KINDS = {
    "2": ["theorem2"],
    "3.1": ["theorem3_case1"],
    "3.2": ["theorem3_case2"],
    "3.3": ["theorem3_case3"],
    "all": ["theorem2", "theorem3_case1", "theorem3_case2", "theorem3_case3"],
}


class VerifyRequest(StrictModel):
    theorem: Literal["2", "3.1", "3.2", "3.3", "all"] = "all"
    trials: int = Field(default=20, ge=1)
    seed: int = 0
    dim_min: int = Field(default=2, ge=2)
    dim_max: int = Field(default=5, ge=2)

    @model_validator(mode="after")
    def _range_ok(self):
        if self.dim_max < self.dim_min:
            raise ValueError("dim_max must be >= dim_min")
        return self

    @property
    def kinds(self) -> list[str]:
        return _THEOREM_KINDS[self.theorem]


class TrialInstancePayload(StrictModel):
    kind: Literal["theorem2", "theorem3_case1", "theorem3_case2", "theorem3_case3"]
    mults: list[int]
    basis_seed: int
    theta: Optional[float] = None
    alphas: Optional[list[float]] = None
    step: Optional[float] = None
    rates: Optional[list[float]] = None

    def to_instance(self) -> TrialInstance:
        return TrialInstance.from_dict(self.model_dump())

    @classmethod
    def from_instance(cls, inst: TrialInstance) -> "TrialInstancePayload":
        return cls.model_validate(inst.to_dict())


class TrialResultPayload(StrictModel):
    instance: TrialInstancePayload
    eta_numeric: int
    eta_formula: int
    eta_match: bool
    spectrum_match: bool
    max_value_error: float
    hermiticity_residual: float
    geo_equals_alg: bool
    mu: int

    @classmethod
    def from_result(cls, result: TrialResult) -> "TrialResultPayload":
        return cls(
            instance=TrialInstancePayload.from_instance(result.instance),
            eta_numeric=result.eta_numeric,
            eta_formula=result.eta_formula,
            eta_match=result.eta_match,
            spectrum_match=result.spectrum_match,
            max_value_error=result.max_value_error,
            hermiticity_residual=result.hermiticity_residual,
            geo_equals_alg=result.geo_equals_alg,
            mu=result.mu,
        )


class VerifyCasePayload(StrictModel):
    kind: str
    total: int
    passed: int
    failed: int
    spectrum_mismatches: int
    failures: list[TrialInstancePayload]


class VerifyResponse(StrictModel):
    cases: list[VerifyCasePayload]
    all_passed: bool


class ReplayRequest(StrictModel):
    instance: TrialInstancePayload


class ReconstructRequest(_ProblemInput):
    rho0: Optional[MatrixPayload] = None
    observables: Optional[int] = Field(default=None, ge=1)
    horizon: float = Field(default=1.0, gt=0)
    noise_sigma: float = Field(default=0.0, ge=0)


class ReconstructResponse(StrictModel):
    eta: int
    mu: int
    rank: int
    required_rank: int
    observables_used: int
    recovery_error: float
    times: list[float]
    measurements: list[list[float]]
    recovered: MatrixPayload
    actual: MatrixPayload


def load_problem_file(obj: dict) -> dict:
    """Classify a CLI input file as a generator spec or a spectrum model.

    Returns kwargs for a :class:`_ProblemInput`.  Spectrum-model files are
    recognized by their ``alphas`` key, generator specs by ``model``.
    """
    if not isinstance(obj, dict):
        raise ContractViolation("input file must contain a JSON object")
    if "alphas" in obj:
        return {"spectrum_model": SpectrumModelPayload.model_validate(obj)}
    if "model" in obj:
        return {"generator": GeneratorSpecPayload.model_validate(obj)}
    raise ContractViolation(
        "input file is neither a generator spec (needs 'model') nor a "
        "spectrum model (needs 'alphas')"
    )
