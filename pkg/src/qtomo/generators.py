"""Builders for evolution generators of N-level open quantum systems.

Each builder returns the explicit N^2 x N^2 matrix of a superoperator acting
on column-stacked density matrices: ``d/dt vec(rho) = L vec(rho)``.  Under
column stacking ``vec(A rho B) = (B^T kron A) vec(rho)``, so left
multiplication is ``I kron A`` and right multiplication is ``B^T kron I``.

The module also carries the declarative descriptions used to drive the
builders: :class:`GeneratorSpec` (which evolution model, which operators)
and :class:`SpectrumModel` (an operator spectrum with structure, from which
a concrete operator can be realized in a seeded random eigenbasis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .linalg import (
    as_rng,
    as_square,
    is_hermitian,
    is_unitary,
    kron,
    random_unitary,
)

MODELS = ("gksl", "unitary_conjugation", "power_model", "gaussian", "von_neumann")

# Tolerance for checking that declared spectrum values obey their declared
# structure (geometric ratio / arithmetic step).
_STRUCTURE_RTOL = 1e-9


# ---------------------------------------------------------------------------
# Spectrum models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenericStructure:
    """No structural assumption on the eigenvalues."""


@dataclass(frozen=True)
class GeometricRatio:
    """Consecutive eigenvalues form a geometric sequence with this ratio."""

    ratio: complex


@dataclass(frozen=True)
class ArithmeticStep:
    """Eigenvalues form the symmetric arithmetic ladder with step ``step``.

    ``parity`` is "odd" for r = 2u+1 distinct values (ladder through zero)
    and "even" for r = 2u (zero excluded, center gap of two steps).
    """

    step: float
    u: int
    parity: str

    def __post_init__(self):
        if self.parity not in ("odd", "even"):
            raise ContractViolation(f"parity must be 'odd' or 'even', got {self.parity!r}")
        if self.step == 0:
            raise ContractViolation("arithmetic step must be nonzero")
        if self.u < 0 or (self.parity == "even" and self.u < 1):
            raise ContractViolation(f"invalid u={self.u} for parity {self.parity!r}")


Structure = GenericStructure | GeometricRatio | ArithmeticStep


def arithmetic_values(step: float, r: int) -> tuple[float, ...]:
    """The symmetric arithmetic ladder with r rungs and given step.

    Odd r = 2u+1: u*step, (u-1)*step, ..., 0, ..., -u*step.
    Even r = 2u:  u*step, ..., step, -step, ..., -u*step (zero skipped).
    """
    if r < 1:
        raise ContractViolation("need at least one eigenvalue")
    if r % 2 == 1:
        u = (r - 1) // 2
        return tuple(float((u - i) * step) for i in range(r))
    u = r // 2
    head = [float((u - i) * step) for i in range(u)]
    tail = [float((u - i) * step) for i in range(u + 1, r + 1)]
    return tuple(head + tail)


@dataclass(frozen=True)
class SpectrumModel:
    """Distinct eigenvalues with multiplicities, plus a structure tag."""

    values: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    structure: Structure = field(default_factory=GenericStructure)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        object.__setattr__(self, "multiplicities", tuple(int(n) for n in self.multiplicities))
        r = len(self.values)
        if r == 0:
            raise ContractViolation("spectrum model needs at least one eigenvalue")
        if len(self.multiplicities) != r:
            raise ContractViolation(
                f"{r} eigenvalues but {len(self.multiplicities)} multiplicities"
            )
        if any(n < 1 for n in self.multiplicities):
            raise ContractViolation("multiplicities must be positive")
        if len(set(self.values)) != r:
            raise ContractViolation("declared eigenvalues must be distinct")
        self._check_structure()

    def _check_structure(self):
        r = len(self.values)
        s = self.structure
        if isinstance(s, GeometricRatio):
            scale = max(abs(v) for v in self.values)
            for a, b in zip(self.values, self.values[1:]):
                if abs(b - s.ratio * a) > _STRUCTURE_RTOL * scale:
                    raise ContractViolation(
                        "values do not follow the declared geometric ratio"
                    )
        elif isinstance(s, ArithmeticStep):
            expected_r = 2 * s.u + 1 if s.parity == "odd" else 2 * s.u
            if r != expected_r:
                raise ContractViolation(
                    f"{s.parity} arithmetic structure with u={s.u} needs "
                    f"r={expected_r} distinct values, got {r}"
                )
            expected = arithmetic_values(s.step, r)
            scale = max(1.0, max(abs(v) for v in expected))
            for v, e in zip(self.values, expected):
                if abs(v - e) > _STRUCTURE_RTOL * scale:
                    raise ContractViolation(
                        "values do not follow the declared arithmetic ladder"
                    )

    @property
    def r(self) -> int:
        return len(self.values)

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)


def geometric_model(theta: float, multiplicities, enforce_theta_range: bool = True
                    ) -> SpectrumModel:
    """Unit-circle geometric spectrum: alpha_i = exp(i*theta*(i-1)).

    ``theta`` must lie in (0, pi/(r-1)] so that the distinct hop counts of
    the conjugation generator stay spectrally distinct; pass
    ``enforce_theta_range=False`` to explore collisions.
    """
    mults = tuple(int(n) for n in multiplicities)
    r = len(mults)
    if r >= 2 and enforce_theta_range and not (0.0 < theta <= math.pi / (r - 1)):
        raise ContractViolation(
            f"theta={theta} outside (0, {math.pi / (r - 1):.6g}] for r={r}; "
            "distinct hop counts would collide"
        )
    values = tuple(complex(math.cos(k * theta), math.sin(k * theta)) for k in range(r))
    return SpectrumModel(values=values, multiplicities=mults,
                         structure=GeometricRatio(complex(math.cos(theta), math.sin(theta))))


def arithmetic_model(step: float, multiplicities) -> SpectrumModel:
    """Symmetric arithmetic spectrum for the power-evolution theorems."""
    mults = tuple(int(n) for n in multiplicities)
    r = len(mults)
    parity = "odd" if r % 2 == 1 else "even"
    u = (r - 1) // 2 if parity == "odd" else r // 2
    values = arithmetic_values(step, r)
    return SpectrumModel(values=tuple(complex(v) for v in values), multiplicities=mults,
                         structure=ArithmeticStep(step=float(step), u=u, parity=parity))


def _repeated_diagonal(model: SpectrumModel) -> np.ndarray:
    return np.array(
        [v for v, n in zip(model.values, model.multiplicities) for _ in range(n)],
        dtype=complex,
    )


def unitary_from_spectrum(values, multiplicities, basis_seed) -> np.ndarray:
    """U diag(values) U* for a seeded random unitary U; values must be unimodular."""
    model = SpectrumModel(tuple(values), tuple(multiplicities))
    d = _repeated_diagonal(model)
    if np.any(np.abs(np.abs(d) - 1.0) > 1e-10):
        raise ContractViolation("unitary realization needs unit-modulus eigenvalues")
    U = random_unitary(model.dim, as_rng(basis_seed))
    return (U * d) @ U.conj().T


def hermitian_from_spectrum(values, multiplicities, basis_seed) -> np.ndarray:
    """U diag(values) U* for a seeded random unitary U; values must be real."""
    model = SpectrumModel(tuple(values), tuple(multiplicities))
    d = _repeated_diagonal(model)
    if np.any(np.abs(d.imag) > 0):
        raise ContractViolation("hermitian realization needs real eigenvalues")
    U = random_unitary(model.dim, as_rng(basis_seed))
    F = (U * d.real) @ U.conj().T
    return (F + F.conj().T) / 2.0


def realize_unitary(model: SpectrumModel, basis_seed,
                    enforce_theta_range: bool = True) -> np.ndarray:
    """Realize a geometric-ratio spectrum model as a unitary operator."""
    if not isinstance(model.structure, GeometricRatio) and model.r > 1:
        raise ContractViolation("realize_unitary needs a geometric-ratio model")
    if isinstance(model.structure, GeometricRatio):
        q = model.structure.ratio
        if abs(abs(q) - 1.0) > 1e-10:
            raise ContractViolation(f"|ratio| = {abs(q)} is not 1: not realizable unitarily")
        theta = math.atan2(q.imag, q.real)
        if model.r >= 2 and enforce_theta_range:
            if not (0.0 < theta <= math.pi / (model.r - 1)):
                raise ContractViolation(
                    f"ratio angle {theta:.6g} outside (0, {math.pi / (model.r - 1):.6g}] "
                    f"for r={model.r}"
                )
    return unitary_from_spectrum(model.values, model.multiplicities, basis_seed)


def realize_hermitian(model: SpectrumModel, basis_seed) -> np.ndarray:
    """Realize an arithmetic-ladder spectrum model as a Hermitian operator."""
    if not isinstance(model.structure, ArithmeticStep):
        raise ContractViolation("realize_hermitian needs an arithmetic-step model")
    return hermitian_from_spectrum(model.values, model.multiplicities, basis_seed)


# ---------------------------------------------------------------------------
# Superoperator builders
# ---------------------------------------------------------------------------

def _sandwich(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of rho -> A rho B."""
    return kron(B.T, A)


def _left(A: np.ndarray) -> np.ndarray:
    """Matrix of rho -> A rho."""
    return kron(np.eye(A.shape[0]), A)


def _right(B: np.ndarray) -> np.ndarray:
    """Matrix of rho -> rho B."""
    return kron(B.T, np.eye(B.shape[0]))


def _commutator_super(H: np.ndarray) -> np.ndarray:
    return _left(H) - _right(H)


def _require_hermitian(M: np.ndarray, name: str) -> np.ndarray:
    M = as_square(M, name)
    if not is_hermitian(M):
        raise ContractViolation(f"{name} must be Hermitian")
    # Canonicalize away rounding-level skew so the built superoperator is
    # exactly Hermitian where the theory says it is.
    return (M + M.conj().T) / 2.0


def build_von_neumann(H) -> np.ndarray:
    """Matrix of rho -> -i [H, rho] for Hermitian H."""
    H = _require_hermitian(H, "H")
    return -1j * _commutator_super(H)


def build_gaussian(H) -> np.ndarray:
    """Matrix of the double commutator rho -> -1/2 [H, [H, rho]]."""
    H = _require_hermitian(H, "H")
    H2 = H @ H
    return -0.5 * (_right(H2) - 2.0 * _sandwich(H, H) + _left(H2))


def build_gksl(H, ops) -> np.ndarray:
    """Matrix of the general Markovian generator.

    ``rho -> -i[H, rho] + sum_i gamma_i (V_i rho V_i* - 1/2 {V_i* V_i, rho})``,
    which is the commutator form ``1/2 gamma_i ([V_i rho, V_i*] + [V_i, rho V_i*])``
    expanded.  ``ops`` is a sequence of ``(V_i, gamma_i)`` pairs; the V_i need
    not be Hermitian.

    Raises on non-Hermitian H, negative rates, or dimension mismatches.
    """
    H = _require_hermitian(H, "H")
    n = H.shape[0]
    L = -1j * _commutator_super(H)
    for idx, (V, gamma) in enumerate(ops):
        V = as_square(V, f"V[{idx}]")
        if V.shape[0] != n:
            raise ContractViolation(
                f"V[{idx}] is {V.shape[0]}x{V.shape[0]} but H is {n}x{n}"
            )
        gamma = float(gamma)
        if gamma < 0:
            raise ContractViolation(f"rate gamma[{idx}] = {gamma} is negative")
        VdV = V.conj().T @ V
        L = L + gamma * (_sandwich(V, V.conj().T)
                         - 0.5 * _left(VdV) - 0.5 * _right(VdV))
    return L


def build_unitary_conjugation(F) -> np.ndarray:
    """Matrix of rho -> F rho F* + F* rho F - 2 rho for unitary F.

    Equals ``(F^-1)^T kron F + F^T kron F^-1 - 2 I kron I`` and is Hermitian.
    """
    F = as_square(F, "F")
    if not is_unitary(F):
        raise ContractViolation("F must be unitary")
    n = F.shape[0]
    Finv = F.conj().T
    return (kron(Finv.T, F) + kron(F.T, Finv)
            - 2.0 * np.eye(n * n, dtype=complex))


def build_power_model(F, rates) -> np.ndarray:
    """Matrix of rho -> -sum_k gamma_k [F^k, [F^k, rho]] for Hermitian F.

    ``rates`` must have one entry per power, k = 1..N where N = dim F.
    The result is Hermitian and negative semidefinite, with spectrum
    ``-sum_k gamma_k (a_i^k - a_j^k)^2`` over eigenvalue pairs of F.
    """
    F = _require_hermitian(F, "F")
    n = F.shape[0]
    rates = [float(g) for g in rates]
    if len(rates) != n:
        raise ContractViolation(f"need {n} rates (one per power), got {len(rates)}")
    if any(g < 0 for g in rates):
        raise ContractViolation("rates must be nonnegative")
    L = np.zeros((n * n, n * n), dtype=complex)
    Fk = np.eye(n, dtype=complex)
    for gamma in rates:
        # Symmetrize each power: F^k is Hermitian in exact arithmetic, and
        # keeping it exactly so keeps the assembled generator exactly so.
        Fk = Fk @ F
        Fk = (Fk + Fk.conj().T) / 2.0
        if gamma == 0.0:
            continue
        F2k = Fk @ Fk
        F2k = (F2k + F2k.conj().T) / 2.0
        L = L - gamma * (_right(F2k) - 2.0 * _sandwich(Fk, Fk) + _left(F2k))
    return L


def generator_scale(spec: "GeneratorSpec") -> float:
    """Upper-bound estimate of the generator's spectral norm.

    Used as the numerical floor when the built matrix cancels down to
    rounding noise (e.g. a power model whose even powers are proportional
    to the identity).
    """
    model = spec.model
    if model == "von_neumann":
        return 2.0 * float(np.linalg.norm(spec.hamiltonian, 2))
    if model == "gaussian":
        return 2.0 * float(np.linalg.norm(spec.hamiltonian, 2)) ** 2
    if model == "unitary_conjugation":
        return 4.0
    if model == "power_model":
        a = float(np.linalg.norm(spec.base_operator, 2))
        return sum(4.0 * g * a ** (2 * (k + 1)) for k, g in enumerate(spec.rates))
    # gksl
    s = 0.0
    if spec.hamiltonian is not None:
        s += 2.0 * float(np.linalg.norm(spec.hamiltonian, 2))
    for V, gamma in spec.lindblad_ops:
        s += 2.0 * gamma * float(np.linalg.norm(V, 2)) ** 2
    return s


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Declarative description of an evolution model.

    Exactly the operators the chosen ``model`` needs must be present:
    ``gksl`` takes ``hamiltonian`` and/or ``lindblad_ops``;
    ``unitary_conjugation`` and ``power_model`` take ``base_operator``
    (the latter also ``rates``); ``gaussian`` and ``von_neumann`` take
    ``hamiltonian``.
    """

    model: str
    hamiltonian: np.ndarray | None = None
    lindblad_ops: tuple[tuple[np.ndarray, float], ...] = ()
    base_operator: np.ndarray | None = None
    rates: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ContractViolation(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.model in ("gaussian", "von_neumann"):
            if self.hamiltonian is None:
                raise ContractViolation(f"model {self.model!r} requires a Hamiltonian")
        if self.model == "gksl":
            if self.hamiltonian is None and not self.lindblad_ops:
                raise ContractViolation("gksl requires a Hamiltonian or Lindblad operators")
        if self.model in ("unitary_conjugation", "power_model"):
            if self.base_operator is None:
                raise ContractViolation(f"model {self.model!r} requires a base operator")
        if self.model == "power_model" and self.rates is None:
            raise ContractViolation("power_model requires rates")
        for _, gamma in self.lindblad_ops:
            if gamma < 0:
                raise ContractViolation("Lindblad rates must be nonnegative")

    @property
    def dim(self) -> int:
        for M in (self.hamiltonian, self.base_operator):
            if M is not None:
                return as_square(M).shape[0]
        return as_square(self.lindblad_ops[0][0]).shape[0]


def build_generator(spec: GeneratorSpec) -> np.ndarray:
    """Dispatch a :class:`GeneratorSpec` to the matching builder."""
    if spec.model == "gksl":
        n = spec.dim
        H = spec.hamiltonian if spec.hamiltonian is not None else np.zeros((n, n))
        return build_gksl(H, spec.lindblad_ops)
    if spec.model == "unitary_conjugation":
        return build_unitary_conjugation(spec.base_operator)
    if spec.model == "power_model":
        return build_power_model(spec.base_operator, spec.rates)
    if spec.model == "gaussian":
        return build_gaussian(spec.hamiltonian)
    return build_von_neumann(spec.hamiltonian)
