"""Stroboscopic measurement simulation and state reconstruction.

The physical content of the index of cyclicity: expectation values
``m_i(t_j) = Tr(Q_i rho(t_j))`` of eta generic observables at mu distinct
times determine the initial state; fewer observables leave the linear
system structurally rank deficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ContractViolation, UnderdeterminedSystemError
from .linalg import (
    as_rng,
    as_square,
    devectorize,
    is_hermitian,
    min_poly_degree,
    numerical_rank,
    random_hermitian,
    vectorize,
)

_TRACE_ATOL = 1e-8
_PSD_FLOOR = -1e-10
_IMAG_RESIDUE_ATOL = 1e-8


def _check_density(rho) -> np.ndarray:
    rho = as_square(rho, "rho")
    if not is_hermitian(rho):
        raise ContractViolation("density matrix must be Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > _TRACE_ATOL:
        raise ContractViolation(f"density matrix trace {tr} is not 1")
    lo = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0).min())
    if lo < _PSD_FLOOR:
        raise ContractViolation(f"density matrix has eigenvalue {lo} < {_PSD_FLOOR}")
    return rho


def evolve(L, rho0, t: float, validate: bool = True) -> np.ndarray:
    """Propagate a density matrix: ``rho(t) = devec(expm(t L) vec(rho0))``."""
    L = as_square(L, "L")
    rho0 = _check_density(rho0) if validate else as_square(rho0, "rho0")
    n = rho0.shape[0]
    if L.shape[0] != n * n:
        raise ContractViolation(
            f"generator is {L.shape[0]}x{L.shape[0]}, expected {n * n}x{n * n}"
        )
    if t < 0:
        raise ContractViolation("evolution time must be nonnegative")
    return devectorize(expm(t * L) @ vectorize(rho0), n)


def measure(Q, rho) -> float:
    """Expectation value ``Tr(Q rho)`` of a Hermitian observable."""
    Q = as_square(Q, "Q")
    rho = as_square(rho, "rho")
    if Q.shape != rho.shape:
        raise ContractViolation("observable and state dimensions differ")
    if not is_hermitian(Q):
        raise ContractViolation("observable must be Hermitian")
    if not is_hermitian(rho):
        raise ContractViolation("state must be Hermitian")
    value = complex(np.trace(Q @ rho))
    if abs(value.imag) > _IMAG_RESIDUE_ATOL:
        raise ContractViolation(
            f"imaginary residue {value.imag:.3e} in a measurement of Hermitian operators"
        )
    return float(value.real)


@dataclass(frozen=True, eq=False)
class ExperimentPlan:
    """Observables, measurement times, and the generator they probe."""

    observables: tuple[np.ndarray, ...]
    times: tuple[float, ...]
    generator: np.ndarray

    def __post_init__(self):
        L = as_square(self.generator, "generator")
        if not self.observables:
            raise ContractViolation("plan needs at least one observable")
        n = as_square(self.observables[0], "Q[0]").shape[0]
        if L.shape[0] != n * n:
            raise ContractViolation("generator dimension does not match observables")
        for i, Q in enumerate(self.observables):
            Qm = as_square(Q, f"Q[{i}]")
            if Qm.shape[0] != n:
                raise ContractViolation("observables must share one dimension")
            if not is_hermitian(Qm):
                raise ContractViolation(f"observable Q[{i}] is not Hermitian")
        if not self.times:
            raise ContractViolation("plan needs at least one time instant")
        ts = list(self.times)
        if any(t < 0 for t in ts):
            raise ContractViolation("times must be nonnegative")
        if sorted(set(ts)) != ts:
            raise ContractViolation("times must be strictly increasing and distinct")

    @property
    def dim(self) -> int:
        return self.observables[0].shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Matrix of real measurement results, values[i][j] = m_i(t_j)."""

    values: np.ndarray
    plan: ExperimentPlan

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        expected = (len(self.plan.observables), len(self.plan.times))
        if v.shape != expected:
            raise ContractViolation(f"record shape {v.shape} does not match plan {expected}")
        object.__setattr__(self, "values", v)

    def to_csv(self) -> str:
        """CSV with a header row of times, one row per observable."""
        lines = ["observable," + ",".join(repr(t) for t in self.plan.times)]
        for i, row in enumerate(self.values):
            lines.append(f"Q{i + 1}," + ",".join(repr(v) for v in row))
        return "\n".join(lines) + "\n"


def observability_rank(L, observables, tau_rank: float | None = None,
                       scale: float | None = None) -> int:
    """Dimension of the span the measurements can see.

    Stacks the Heisenberg-picture Krylov vectors ``(L^dagger)^k vec(Q_i)``
    for ``k = 0 .. mu-1`` (mu the minimal-polynomial degree of L) and
    returns their numerical rank.  Reconstruction from these observables is
    well posed iff the rank is N^2.
    """
    L = as_square(L, "L")
    dim = L.shape[0]
    mu = min_poly_degree(L, scale=scale)
    sigma = float(np.linalg.norm(L, 2))
    norm = max(sigma, 0.0 if scale is None else float(scale))
    Ld = L.conj().T / norm if norm > 0 else L.conj().T
    columns = []
    for Q in observables:
        v = vectorize(as_square(Q, "Q"))
        if v.size != dim:
            raise ContractViolation("observable dimension does not match generator")
        for _ in range(mu):
            columns.append(v)
            v = Ld @ v
    return numerical_rank(np.column_stack(columns), tol=tau_rank)


def design_experiment(L, count: int, horizon: float = 1.0, seed=0,
                      scale: float | None = None) -> ExperimentPlan:
    """Seeded experiment plan: the identity plus ``count`` random observables,
    measured at mu time instants.

    ``Q_1 = I`` comes for free (trace recovery) on top of ``count`` Gaussian
    Hermitian observables normalized to unit Frobenius norm.  The identity
    cannot stand in for a generic observable: it lies entirely in the
    zero-eigenvalue subspace of the generator, so ``count`` must reach the
    index of cyclicity for the plan to determine the state.  Times are
    equally spaced in ``(0, horizon]`` measured in units of the inverse
    spectral norm of L, so the propagators stay numerically alive.
    """
    L = as_square(L, "L")
    if count < 0:
        raise ContractViolation("need a nonnegative observable count")
    if horizon <= 0:
        raise ContractViolation("horizon must be positive")
    n = int(round(np.sqrt(L.shape[0])))
    rng = as_rng(seed)
    observables = [np.eye(n, dtype=complex)]
    for _ in range(count):
        observables.append(random_hermitian(n, rng, unit_norm=True))
    mu = min_poly_degree(L, scale=scale)
    sigma = float(np.linalg.norm(L, 2))
    floor = 1e-12 * max(1.0, 0.0 if scale is None else float(scale))
    span = horizon / sigma if sigma > floor else horizon
    times = tuple(span * (j + 1) / mu for j in range(mu))
    return ExperimentPlan(observables=tuple(observables), times=times, generator=L)


def synthesize(plan: ExperimentPlan, rho0, noise_sigma: float = 0.0,
               seed=None) -> MeasurementRecord:
    """Fill the measurement table ``m[i][j] = Tr(Q_i rho(t_j))``.

    ``noise_sigma`` adds i.i.d. Gaussian noise to every entry (off by
    default; the reconstruction itself stays a plain least-squares solve).
    """
    rho0 = _check_density(rho0)
    states = [evolve(plan.generator, rho0, t, validate=False) for t in plan.times]
    values = np.array(
        [[measure(Q, state) for state in states] for Q in plan.observables]
    )
    if noise_sigma > 0.0:
        rng = as_rng(seed)
        values = values + noise_sigma * rng.standard_normal(values.shape)
    return MeasurementRecord(values=values, plan=plan)


def reconstruct(plan: ExperimentPlan, record: MeasurementRecord,
                tau_rank: float | None = None, scale: float | None = None) -> np.ndarray:
    """Recover the initial state from a measurement record by least squares.

    Solves the stacked system with rows ``vec(Q_i)^dagger expm(t_j L)``,
    augmented with the unit-trace constraint, then projects the solution
    back onto Hermitian matrices.  Positivity is not enforced; a violation
    beyond tolerance signals a rank problem and should surface.

    Raises :class:`UnderdeterminedSystemError` (carrying the achieved rank)
    when the observables cannot span the state space.
    """
    if record.values.shape != (len(plan.observables), len(plan.times)):
        raise ContractViolation("record shape does not match the plan")
    L = plan.generator
    n = plan.dim
    required = n * n
    rank = observability_rank(L, plan.observables, tau_rank=tau_rank, scale=scale)
    if rank < required:
        raise UnderdeterminedSystemError(rank=rank, required=required)

    rows = []
    rhs = []
    for j, t in enumerate(plan.times):
        P = expm(t * L)
        for i, Q in enumerate(plan.observables):
            rows.append(vectorize(Q).conj() @ P)
            rhs.append(record.values[i, j])
    rows.append(vectorize(np.eye(n)).conj())
    rhs.append(1.0)
    A = np.array(rows)
    b = np.array(rhs, dtype=complex)

    a_rank = numerical_rank(A, tol=tau_rank)
    if a_rank < required:
        raise UnderdeterminedSystemError(rank=a_rank, required=required)

    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    rho = devectorize(x, n)
    return (rho + rho.conj().T) / 2.0
