"""Randomized and exhaustive verification sweeps.

Each trial realizes a generator from a spectrum model in a seeded random
eigenbasis, computes the index of cyclicity numerically (eigendecomposition
plus kernel dimensions), evaluates the matching closed-form integer formula,
and compares the two exactly.  Trials are fully determined by their
:class:`TrialInstance`, so any failure can be serialized and replayed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Iterator

import numpy as np

from .cyclicity import (
    METHOD_THEOREM2,
    closed_form_spectrum,
    eta_theorem2,
    eta_theorem3,
    index_of_cyclicity,
)
from .errors import ContractViolation
from .generators import (
    SpectrumModel,
    arithmetic_model,
    build_power_model,
    build_unitary_conjugation,
    geometric_model,
    hermitian_from_spectrum,
    realize_hermitian,
    realize_unitary,
)
from .linalg import Spectrum, hermiticity_residual

KINDS = ("theorem2", "theorem3_case1", "theorem3_case2", "theorem3_case3")

# Sampling windows, bounded away from degenerate values (near-zero angles,
# steps, or rates would let distinct eigenvalue clusters collide).
_THETA_WINDOW = (0.15, 0.90)     # fraction of pi/(r-1)
_STEP_WINDOW = (0.3, 1.5)
_RATE_WINDOW = (0.1, 1.0)
_MAGNITUDE_WINDOW = (0.2, 2.0)
_MAGNITUDE_GAP = 0.05


@dataclass(frozen=True)
class TrialInstance:
    """Everything needed to rerun one verification trial."""

    kind: str
    mults: tuple[int, ...]
    basis_seed: int
    theta: float | None = None                 # theorem2
    alphas: tuple[float, ...] | None = None    # theorem3_case1 generic spectrum
    step: float | None = None                  # theorem3 arithmetic cases
    rates: tuple[float, ...] | None = None     # theorem3 kinds

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown trial kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return sum(self.mults)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "TrialInstance":
        known = {"kind", "mults", "basis_seed", "theta", "alphas", "step", "rates"}
        extra = set(d) - known
        if extra:
            raise ContractViolation(f"unknown trial-instance keys: {sorted(extra)}")
        return cls(
            kind=d["kind"],
            mults=tuple(int(n) for n in d["mults"]),
            basis_seed=int(d["basis_seed"]),
            theta=None if d.get("theta") is None else float(d["theta"]),
            alphas=None if d.get("alphas") is None else tuple(float(a) for a in d["alphas"]),
            step=None if d.get("step") is None else float(d["step"]),
            rates=None if d.get("rates") is None else tuple(float(g) for g in d["rates"]),
        )


@dataclass(frozen=True)
class TrialResult:
    instance: TrialInstance
    eta_numeric: int
    eta_formula: int
    eta_match: bool
    spectrum_match: bool
    max_value_error: float
    hermiticity_residual: float
    geo_equals_alg: bool
    mu: int


def compositions(n: int, r: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of r positive integers summing to n, lexicographic."""
    if r == 1:
        yield (n,)
        return
    for first in range(1, n - r + 2):
        for rest in compositions(n - first, r - 1):
            yield (first,) + rest


def all_compositions(n: int) -> Iterator[tuple[int, ...]]:
    for r in range(1, n + 1):
        yield from compositions(n, r)


def power_model_scale(alphas, rates) -> float:
    """Norm bound used as the numerical floor for power-model generators."""
    a = max(abs(float(x)) for x in alphas)
    return sum(4.0 * float(g) * a ** (2 * k) for k, g in enumerate(rates, start=1))


def spectra_match(closed: Spectrum, numeric: Spectrum, value_tol: float
                  ) -> tuple[bool, float]:
    """Cluster-by-cluster comparison: integer multiplicities exactly, values
    within ``value_tol``.  Returns (match, worst value error)."""
    if len(closed.clusters) != len(numeric.clusters) or closed.dim != numeric.dim:
        return False, float("inf")
    worst = 0.0
    for c, m in zip(closed.clusters, numeric.clusters):
        if c.alg_mult != m.alg_mult:
            return False, float("inf")
        worst = max(worst, abs(c.value - m.value))
    return worst <= value_tol, worst


def _build_trial(instance: TrialInstance):
    """Realize the generator and formula side of a trial.

    Returns (L, closed_spectrum, eta_formula, scale).
    """
    kind = instance.kind
    mults = instance.mults
    if kind == "theorem2":
        if len(mults) == 1:
            model = SpectrumModel(values=(1.0 + 0.0j,), multiplicities=mults)
        else:
            if instance.theta is None:
                raise ContractViolation("theorem2 trials need theta")
            model = geometric_model(instance.theta, mults)
        F = realize_unitary(model, instance.basis_seed)
        L = build_unitary_conjugation(F)
        closed = closed_form_spectrum(model, "unitary_conjugation")
        return L, closed, eta_theorem2(mults), 4.0

    if instance.rates is None:
        raise ContractViolation(f"{kind} trials need rates")
    rates = instance.rates
    if kind == "theorem3_case1":
        if instance.alphas is None:
            raise ContractViolation("theorem3_case1 trials need alphas")
        alphas = instance.alphas
        model = SpectrumModel(values=tuple(complex(a) for a in alphas),
                              multiplicities=mults)
        F = hermitian_from_spectrum(alphas, mults, instance.basis_seed)
        structure = None
    else:
        if instance.step is None:
            raise ContractViolation(f"{kind} trials need step")
        model = arithmetic_model(instance.step, mults)
        alphas = tuple(v.real for v in model.values)
        F = realize_hermitian(model, instance.basis_seed)
        structure = model.structure
    L = build_power_model(F, rates)
    closed = closed_form_spectrum(model, "power_model", rates)
    eta_f, case = eta_theorem3(mults, rates, structure)
    expected_case = {
        "theorem3_case1": "theorem3_case1",
        "theorem3_case2": "theorem3_case2",
        "theorem3_case3": "theorem3_case3",
    }[kind]
    if case != expected_case:
        raise ContractViolation(
            f"instance of kind {kind} selected formula case {case}; "
            "the rates pattern does not match the declared kind"
        )
    return L, closed, eta_f, power_model_scale(alphas, rates)


def run_trial(instance: TrialInstance) -> TrialResult:
    L, closed, eta_formula, scale = _build_trial(instance)
    report = index_of_cyclicity(L, scale=scale)
    max_closed = max(abs(c.value) for c in closed.clusters)
    value_tol = 1e-8 * max(max_closed, 0.01 * scale)
    s_match, worst = spectra_match(closed, report.spectrum, value_tol)
    return TrialResult(
        instance=instance,
        eta_numeric=report.eta,
        eta_formula=eta_formula,
        eta_match=report.eta == eta_formula,
        spectrum_match=s_match,
        max_value_error=worst,
        hermiticity_residual=hermiticity_residual(L),
        geo_equals_alg=all(c.geo_mult == c.alg_mult for c in report.spectrum.clusters),
        mu=report.min_poly_degree,
    )


# ---------------------------------------------------------------------------
# Instance sampling
# ---------------------------------------------------------------------------

def _sample_composition(rng: np.random.Generator, n: int, r: int) -> tuple[int, ...]:
    if r == 1:
        return (n,)
    cuts = np.sort(rng.choice(np.arange(1, n), size=r - 1, replace=False))
    parts = np.diff(np.concatenate([[0], cuts, [n]]))
    return tuple(int(p) for p in parts)


def _sample_theta(rng: np.random.Generator, r: int) -> float | None:
    if r == 1:
        return None
    lo, hi = _THETA_WINDOW
    return float(rng.uniform(lo, hi) * np.pi / (r - 1))


def _sample_distinct_magnitude_reals(rng: np.random.Generator, r: int) -> tuple[float, ...]:
    lo, hi = _MAGNITUDE_WINDOW
    for _ in range(1000):
        mags = np.sort(rng.uniform(lo, hi, size=r))
        if r == 1 or np.min(np.diff(mags)) > _MAGNITUDE_GAP:
            signs = rng.choice([-1.0, 1.0], size=r)
            return tuple(float(s * m) for s, m in zip(signs, mags))
    raise ContractViolation(f"could not sample {r} real values with distinct magnitudes")


def _sample_rates(rng: np.random.Generator, n: int, parity: str) -> tuple[float, ...]:
    """Random nonnegative rates; ``parity`` selects which power indices may
    be active ("odd" guarantees at least one odd power, "even" allows only
    and at least one even power)."""
    lo, hi = _RATE_WINDOW
    allowed = [k for k in range(1, n + 1)
               if (parity == "odd") or k % 2 == 0]
    active = [k for k in allowed if rng.random() < 0.5]
    if parity == "odd":
        odd_allowed = [k for k in allowed if k % 2 == 1]
        if not any(k % 2 == 1 for k in active):
            active.append(int(rng.choice(odd_allowed)))
    elif not active:
        active.append(int(rng.choice(allowed)))
    rates = [0.0] * n
    for k in active:
        rates[k - 1] = float(rng.uniform(lo, hi))
    return tuple(rates)


def _trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([int(master_seed)] + [int(k) for k in key])


def sample_instance(kind: str, rng: np.random.Generator, dim: int) -> TrialInstance:
    """Draw one random instance of the given kind at Hilbert dimension dim."""
    basis_seed = int(rng.integers(2 ** 31))
    if kind == "theorem2":
        r = int(rng.integers(1, dim + 1))
        mults = _sample_composition(rng, dim, r)
        return TrialInstance(kind=kind, mults=mults, basis_seed=basis_seed,
                             theta=_sample_theta(rng, r))
    if kind == "theorem3_case1":
        r = int(rng.integers(1, dim + 1))
        mults = _sample_composition(rng, dim, r)
        alphas = _sample_distinct_magnitude_reals(rng, r)
        return TrialInstance(kind=kind, mults=mults, basis_seed=basis_seed,
                             alphas=alphas, rates=_sample_rates(rng, dim, "odd"))
    if kind == "theorem3_case2":
        choices = [r for r in range(1, dim + 1, 2)]
    elif kind == "theorem3_case3":
        choices = [r for r in range(2, dim + 1, 2)]
    else:
        raise ContractViolation(f"unknown trial kind {kind!r}")
    if not choices:
        raise ContractViolation(f"dimension {dim} admits no {kind} spectra")
    r = int(rng.choice(choices))
    mults = _sample_composition(rng, dim, r)
    return TrialInstance(kind=kind, mults=mults, basis_seed=basis_seed,
                         step=float(rng.uniform(*_STEP_WINDOW)),
                         rates=_sample_rates(rng, dim, "even"))


def random_trials(kind: str, trials: int, master_seed: int,
                  dims: Iterable[int]) -> list[TrialResult]:
    """Run ``trials`` random instances of one kind across the given dims."""
    dims = list(dims)
    results = []
    for t in range(trials):
        rng = _trial_rng(master_seed, t)
        dim = int(rng.choice(dims))
        results.append(run_trial(sample_instance(kind, rng, dim)))
    return results


# ---------------------------------------------------------------------------
# Exhaustive grids (one trial per composition per seed index)
# ---------------------------------------------------------------------------

def grid_theorem2(dims: Iterable[int], seeds_per_case: int,
                  master_seed: int = 20240501) -> list[TrialResult]:
    """Every multiplicity composition of every dim, seeds_per_case draws each."""
    results = []
    for n in dims:
        for mults in all_compositions(n):
            for s in range(seeds_per_case):
                rng = _trial_rng(master_seed, n, *mults, s)
                inst = TrialInstance(
                    kind="theorem2", mults=mults,
                    basis_seed=int(rng.integers(2 ** 31)),
                    theta=_sample_theta(rng, len(mults)),
                )
                results.append(run_trial(inst))
    return results


def grid_theorem3_arithmetic(dims: Iterable[int], seeds_per_case: int,
                             odd_r_max: int = 5, even_r_max: int = 4,
                             master_seed: int = 20240502) -> list[TrialResult]:
    """All compositions with odd r <= odd_r_max or even r <= even_r_max,
    arithmetic spectra, even-power rates only."""
    results = []
    for n in dims:
        for r in range(2, min(n, max(odd_r_max, even_r_max)) + 1):
            if r % 2 == 1 and r > odd_r_max:
                continue
            if r % 2 == 0 and r > even_r_max:
                continue
            kind = "theorem3_case2" if r % 2 == 1 else "theorem3_case3"
            for mults in compositions(n, r):
                for s in range(seeds_per_case):
                    rng = _trial_rng(master_seed, n, *mults, s)
                    inst = TrialInstance(
                        kind=kind, mults=mults,
                        basis_seed=int(rng.integers(2 ** 31)),
                        step=float(rng.uniform(*_STEP_WINDOW)),
                        rates=_sample_rates(rng, n, "even"),
                    )
                    results.append(run_trial(inst))
    return results


def summarize(results: list[TrialResult]) -> dict:
    """Pass/fail counts plus the replayable instances of any failures."""
    failures = [r for r in results if not r.eta_match]
    spectrum_failures = [r for r in results if not r.spectrum_match]
    return {
        "total": len(results),
        "passed": len(results) - len(failures),
        "failed": len(failures),
        "spectrum_mismatches": len(spectrum_failures),
        "failures": [r.instance.to_dict() for r in failures],
    }
