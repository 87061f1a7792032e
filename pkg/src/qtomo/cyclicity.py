"""Index of cyclicity: numeric spectral route and closed-form routes.

The index of cyclicity of an evolution generator L is the maximum over its
eigenvalues of the kernel dimension of ``L - lambda I``; it equals the
minimal number of observables needed for stroboscopic state reconstruction.
The numeric route computes it from a clustered eigendecomposition; the
closed-form routes evaluate the exact integer formulas that hold for
unitary-conjugation generators with geometric spectra and for power-sum
double-commutator generators (generic or arithmetic spectra).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, FormulaHypothesisError
from .generators import (
    ArithmeticStep,
    GenericStructure,
    GeometricRatio,
    SpectrumModel,
    arithmetic_values,
)
from .linalg import (
    CLUSTER_RTOL,
    EigenCluster,
    Spectrum,
    as_square,
    eig_clustered,
    min_poly_degree,
)

METHOD_NUMERIC = "numeric"
METHOD_THEOREM2 = "theorem2"
METHOD_THEOREM3_CASE1 = "theorem3_case1"
METHOD_THEOREM3_CASE2 = "theorem3_case2"
METHOD_THEOREM3_CASE3 = "theorem3_case3"


@dataclass(frozen=True)
class CyclicityReport:
    """Result of a numeric index-of-cyclicity computation."""

    eta: int
    attaining: tuple[complex, ...]
    spectrum: Spectrum
    min_poly_degree: int
    method: str = METHOD_NUMERIC
    warnings: tuple[str, ...] = ()


def index_of_cyclicity(L, tau_clust: float | None = None, tau_rank: float | None = None,
                       scale: float | None = None) -> CyclicityReport:
    """Numeric index of cyclicity of a superoperator matrix.

    ``L`` must be square with dimension a perfect square N^2.  Returns the
    maximum kernel dimension over eigenvalue clusters, the clusters that
    attain it, the clustered spectrum, and the minimal-polynomial degree
    (the number of distinct measurement times the reconstruction needs).
    """
    A = as_square(L, "L")
    dim = A.shape[0]
    n = math.isqrt(dim)
    if n * n != dim:
        raise ContractViolation(f"superoperator dimension {dim} is not a perfect square")

    spectrum = eig_clustered(A, tau_clust=tau_clust, tau_rank=tau_rank, scale=scale)
    eta = spectrum.max_geometric_multiplicity()
    attaining = tuple(c.value for c in spectrum.clusters if c.geo_mult == eta)
    mu = min_poly_degree(A, scale=scale)

    warnings = []
    values = np.array(spectrum.values)
    if values.size >= 2:
        scale_eff = float(np.max(np.abs(values))) if scale is None else float(scale)
        tol = CLUSTER_RTOL * scale_eff if tau_clust is None else float(tau_clust)
        gaps = np.abs(values[:, None] - values[None, :])
        np.fill_diagonal(gaps, np.inf)
        if float(gaps.min()) < 10.0 * tol:
            warnings.append(
                f"two eigenvalue clusters lie within 10x the clustering tolerance "
                f"({float(gaps.min()):.3e} < {10.0 * tol:.3e}); multiplicities may be unreliable"
            )

    return CyclicityReport(eta=eta, attaining=attaining, spectrum=spectrum,
                           min_poly_degree=mu, method=METHOD_NUMERIC,
                           warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Closed-form integer formulas
# ---------------------------------------------------------------------------

def _check_mults(mults) -> tuple[int, ...]:
    mults = tuple(int(n) for n in mults)
    if not mults or any(n < 1 for n in mults):
        raise ContractViolation("multiplicities must be a nonempty list of positive integers")
    return mults


def delta_k(mults, k: int) -> int:
    """Total multiplicity 2 sum_i n_i n_{i+k} carried by the k-th off-diagonals
    of the hop-count eigenvalue table of a geometric-spectrum generator."""
    mults = _check_mults(mults)
    r = len(mults)
    if not 1 <= k <= r - 1:
        raise ContractViolation(f"k={k} out of range [1, {r - 1}]")
    return 2 * sum(mults[i] * mults[i + k] for i in range(r - k))


def eta_theorem2(mults) -> int:
    """Index of cyclicity of a unitary-conjugation generator whose base
    operator has a geometric spectrum with these multiplicities:
    ``max(sum n_i^2, delta_1, ..., delta_p)`` with p = (r-1)//2 for odd r
    and (r-2)//2 for even r."""
    mults = _check_mults(mults)
    r = len(mults)
    base = sum(n * n for n in mults)
    p = (r - 1) // 2 if r % 2 == 1 else (r - 2) // 2
    candidates = [base] + [delta_k(mults, k) for k in range(1, p + 1)]
    return max(candidates)


class Theorem3Result(NamedTuple):
    eta: int
    case: str  # one of the METHOD_THEOREM3_* constants


def eta_theorem3(mults, rates, structure: ArithmeticStep | None = None) -> Theorem3Result:
    """Index of cyclicity of a power-sum double-commutator generator.

    Case 1 (some odd-power rate nonzero): ``sum n_i^2`` for any real spectrum.
    With even-power rates only, the base operator spectrum must be the
    symmetric arithmetic ladder (``structure``); the zero eigenvalue then
    also collects the mirror pairs:
    ``sum n_i^2 + 2 sum_{i<=u} n_i n_{r+1-i}``.

    Raises when the rates are all zero, or when only even rates are active
    but no arithmetic structure is declared.
    """
    mults = _check_mults(mults)
    rates = [float(g) for g in rates]
    if len(rates) != sum(mults):
        raise ContractViolation(
            f"need one rate per power, i.e. {sum(mults)}, got {len(rates)}"
        )
    if any(g < 0 for g in rates):
        raise ContractViolation("rates must be nonnegative")
    if all(g == 0 for g in rates):
        raise FormulaHypothesisError(
            "all rates are zero: the generator vanishes and the closed forms "
            "do not apply (the numeric index is N^2)"
        )
    base = sum(n * n for n in mults)
    # rates[k-1] multiplies the k-th power; odd powers sit at even 0-based slots
    if any(g != 0 for g in rates[0::2]):
        return Theorem3Result(eta=base, case=METHOD_THEOREM3_CASE1)

    if not isinstance(structure, ArithmeticStep):
        raise FormulaHypothesisError(
            "only even-power rates are active but the spectrum has no declared "
            "arithmetic structure; no closed form applies"
        )
    r = len(mults)
    expected_r = 2 * structure.u + 1 if structure.parity == "odd" else 2 * structure.u
    if r != expected_r:
        raise ContractViolation(
            f"{structure.parity} arithmetic structure with u={structure.u} "
            f"expects r={expected_r} distinct eigenvalues, got {r}"
        )
    mirror = 2 * sum(mults[j] * mults[r - 1 - j] for j in range(r // 2))
    case = METHOD_THEOREM3_CASE2 if structure.parity == "odd" else METHOD_THEOREM3_CASE3
    return Theorem3Result(eta=base + mirror, case=case)


def formula_eta(model: SpectrumModel, evolution: str, rates=None) -> tuple[int, str]:
    """Route a spectrum model to the closed-form formula for its evolution."""
    if evolution == "unitary_conjugation":
        if model.r > 1 and not isinstance(model.structure, GeometricRatio):
            raise FormulaHypothesisError(
                "the unitary-conjugation closed form needs a geometric spectrum"
            )
        return eta_theorem2(model.multiplicities), METHOD_THEOREM2
    if evolution == "power_model":
        if rates is None:
            raise ContractViolation("power-model formula needs the rates")
        structure = model.structure if isinstance(model.structure, ArithmeticStep) else None
        result = eta_theorem3(model.multiplicities, rates, structure)
        return result.eta, result.case
    raise ContractViolation(f"unknown evolution {evolution!r}")


# ---------------------------------------------------------------------------
# Closed-form spectra
# ---------------------------------------------------------------------------

def _exact_cluster(pairs) -> list[tuple[complex, int]]:
    """Group (value, multiplicity) pairs by exact value equality."""
    acc: dict[complex, int] = {}
    for value, mult in pairs:
        acc[value] = acc.get(value, 0) + mult
    return sorted(acc.items(), key=lambda vm: (vm[0].real, vm[0].imag))


def _spectrum_from_pairs(pairs, dim: int) -> Spectrum:
    clusters = tuple(
        EigenCluster(value=v, alg_mult=m, geo_mult=m) for v, m in _exact_cluster(pairs)
    )
    return Spectrum(clusters=clusters, dim=dim)


def closed_form_spectrum(model: SpectrumModel, evolution: str, rates=None) -> Spectrum:
    """Enumerate the generator spectrum predicted from the base spectrum.

    For ``evolution="unitary_conjugation"`` (unit-circle geometric model):
    values ``2 cos(k*theta) - 2`` keyed by the hop count ``k = |i-j|``, with
    multiplicities ``sum n_i^2`` (k=0) and ``delta_k``.

    For ``evolution="power_model"`` (real spectrum plus rates): values
    ``-sum_k gamma_k (a_i^k - a_j^k)^2`` with multiplicities ``n_i n_j``,
    clustered by exact equality of the evaluated expressions (mirror pairs
    cancel exactly in floating point, so no tolerance is involved).

    Geometric multiplicities equal algebraic ones: these generators are
    Hermitian.
    """
    n_total = model.dim
    dim = n_total * n_total
    mults = model.multiplicities
    r = model.r

    if evolution == "unitary_conjugation":
        if np.any(np.abs(np.abs(np.array(model.values)) - 1.0) > 1e-9):
            raise ContractViolation(
                "unitary-conjugation spectra need unit-modulus base eigenvalues"
            )
        if r == 1:
            return _spectrum_from_pairs([(0j, dim)], dim)
        if not isinstance(model.structure, GeometricRatio):
            raise ContractViolation(
                "the closed-form conjugation spectrum needs a geometric model"
            )
        q = model.structure.ratio
        theta = math.atan2(q.imag, q.real)
        pairs = [(0j, sum(n * n for n in mults))]
        for k in range(1, r):
            value = complex(2.0 * math.cos(k * theta) - 2.0, 0.0)
            pairs.append((value, delta_k(mults, k)))
        return _spectrum_from_pairs(pairs, dim)

    if evolution == "power_model":
        values = np.array(model.values)
        if np.any(np.abs(values.imag) > 0):
            raise ContractViolation("power-model spectra need real base eigenvalues")
        if rates is None:
            raise ContractViolation("power-model spectra need the rates")
        rates = [float(g) for g in rates]
        if len(rates) != n_total:
            raise ContractViolation(f"need {n_total} rates, got {len(rates)}")
        alphas = [float(v.real) for v in model.values]
        # Iterated products keep the sign structure exact: powers of -x are
        # exactly +/- the powers of x, so mirror pairs cancel to exact zeros.
        powers = [[1.0] for _ in alphas]
        for a, table in zip(alphas, powers):
            for _ in range(n_total):
                table.append(table[-1] * a)
        pairs = []
        for i in range(r):
            for j in range(r):
                lam = -sum(
                    g * (powers[i][k] - powers[j][k]) ** 2
                    for k, g in enumerate(rates, start=1)
                )
                pairs.append((complex(lam, 0.0), mults[i] * mults[j]))
        return _spectrum_from_pairs(pairs, dim)

    raise ContractViolation(f"unknown evolution {evolution!r}")


def ratio_spectrum(model: SpectrumModel) -> Spectrum:
    """Spectrum of ``F kron F^{-1}``: the eigenvalue ratios ``a_i / a_j``
    with multiplicities ``n_i n_j`` (the intermediary the conjugation
    spectrum is built from)."""
    if any(v == 0 for v in model.values):
        raise ContractViolation("ratio spectrum needs an invertible base operator")
    mults = model.multiplicities
    r = model.r
    dim = model.dim * model.dim
    if isinstance(model.structure, GeometricRatio):
        q = model.structure.ratio
        theta = math.atan2(q.imag, q.real)
        pairs = []
        for d in range(-(r - 1), r):
            mult = sum(
                mults[i] * mults[i - d] for i in range(r) if 0 <= i - d < r
            )
            value = complex(math.cos(d * theta), math.sin(d * theta))
            pairs.append((value, mult))
        return _spectrum_from_pairs(pairs, dim)
    pairs = [
        (complex(model.values[i] / model.values[j]), mults[i] * mults[j])
        for i in range(r)
        for j in range(r)
    ]
    return _spectrum_from_pairs(pairs, dim)


# ---------------------------------------------------------------------------
# Structure detection (lets a realized operator feed the closed forms)
# ---------------------------------------------------------------------------

def detect_geometric(spectrum: Spectrum, atol: float = 1e-8) -> SpectrumModel | None:
    """Recover a unit-circle geometric model from a clustered operator
    spectrum, or None if it does not fit (off-circle values, uneven angular
    steps, or a step outside the collision-free range)."""
    values = np.array(spectrum.values)
    mults = list(spectrum.alg_mults)
    r = values.size
    if np.any(np.abs(np.abs(values) - 1.0) > atol):
        return None
    if r == 1:
        return SpectrumModel(values=(complex(values[0]),), multiplicities=(mults[0],))
    angles = np.angle(values)
    order = np.argsort(angles)
    sorted_angles = angles[order]
    # Circular gaps; the sequence starts right after the largest gap.
    gaps = np.diff(np.concatenate([sorted_angles, [sorted_angles[0] + 2 * math.pi]]))
    start = (int(np.argmax(gaps)) + 1) % r
    seq = [(start + i) % r for i in range(r)]
    seq_angles = np.array(
        [sorted_angles[k] + (2 * math.pi if start + i >= r else 0.0)
         for i, k in enumerate(seq)]
    )
    steps = np.diff(seq_angles)
    theta = float(np.mean(steps))
    if np.max(np.abs(steps - theta)) > atol:
        return None
    if not (0.0 < theta <= math.pi / (r - 1) + atol):
        return None
    ordered = [int(order[k]) for k in seq]
    return SpectrumModel(
        values=tuple(complex(values[k]) for k in ordered),
        multiplicities=tuple(mults[k] for k in ordered),
        structure=GeometricRatio(complex(math.cos(theta), math.sin(theta))),
    )


def detect_arithmetic(spectrum: Spectrum, atol: float = 1e-8) -> SpectrumModel | None:
    """Recover a symmetric arithmetic ladder from a clustered real spectrum,
    or None if the values do not form one."""
    values = np.array(spectrum.values)
    if np.any(np.abs(values.imag) > atol):
        return None
    reals = values.real
    order = np.argsort(-reals)
    a = reals[order]
    mults = [int(spectrum.alg_mults[k]) for k in order]
    r = a.size
    if r < 2:
        return None
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return None
    tol = atol * max(scale, 1.0)
    if np.max(np.abs(a + a[::-1])) > tol:  # symmetric about zero
        return None
    if r % 2 == 1:
        u = (r - 1) // 2
        parity = "odd"
    else:
        u = r // 2
        parity = "even"
    c = a[0] / u
    if c <= 0:
        return None
    expected = np.array(arithmetic_values(float(c), r))
    if np.max(np.abs(a - expected)) > tol:
        return None
    return SpectrumModel(
        values=tuple(complex(v) for v in a),
        multiplicities=tuple(mults),
        structure=ArithmeticStep(step=float(c), u=u, parity=parity),
    )
