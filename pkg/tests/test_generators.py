import numpy as np
import pytest

from qtomo.errors import ContractViolation
from qtomo.generators import (
    ArithmeticStep,
    GeneratorSpec,
    GeometricRatio,
    SpectrumModel,
    arithmetic_model,
    arithmetic_values,
    build_gaussian,
    build_generator,
    build_gksl,
    build_power_model,
    build_unitary_conjugation,
    build_von_neumann,
    generator_scale,
    geometric_model,
    hermitian_from_spectrum,
    realize_hermitian,
    realize_unitary,
    unitary_from_spectrum,
)
from qtomo.linalg import (
    devectorize,
    eig_clustered,
    hermiticity_residual,
    random_density_matrix,
    random_hermitian,
    vectorize,
)

SZ = np.diag([1.0, -1.0])


def _comm(A, B):
    return A @ B - B @ A


def apply_gksl(H, ops, rho):
    """Direct dense evaluation of the generator: the oracle the matrix
    builders are checked against."""
    out = -1j * _comm(H, rho)
    for V, gamma in ops:
        Vd = V.conj().T
        out = out + 0.5 * gamma * (_comm(V @ rho, Vd) + _comm(V, rho @ Vd))
    return out


def apply_power(F, rates, rho):
    out = np.zeros_like(rho)
    Fk = np.eye(F.shape[0], dtype=complex)
    for gamma in rates:
        Fk = Fk @ F
        out = out - gamma * _comm(Fk, _comm(Fk, rho))
    return out


# ---------------------------------------------------------------------------
# GKSL builder
# ---------------------------------------------------------------------------

def test_gksl_identity_dissipator_vanishes():
    L = build_gksl(np.zeros((2, 2)), [(np.eye(2), 1.0)])
    assert np.max(np.abs(L)) < 1e-14


def test_gksl_sigma_z_dephasing(assert_clusters):
    # L rho = sz rho sz - rho: eigenvalues 0 on populations, -2 on coherences.
    L = build_gksl(np.zeros((2, 2)), [(SZ, 1.0)])
    expected = {}
    for unit in np.eye(4):
        rho = devectorize(unit, 2)
        lam = round(float(np.real(np.trace(rho.conj().T @ (SZ @ rho @ SZ - rho)))), 12)
        expected[lam] = expected.get(lam, 0) + 1
    assert expected == {0.0: 2, -2.0: 2}
    assert_clusters(eig_clustered(L), [(0.0, 2), (-2.0, 2)])


def test_gksl_pure_hamiltonian(assert_clusters):
    # -i[H, .] on matrix units gives -i(h_i - h_j).
    L = build_gksl(SZ, [])
    assert_clusters(eig_clustered(L), [(0.0, 2), (-2j, 1), (2j, 1)])


def test_gksl_matches_direct_application(rng):
    H = random_hermitian(3, rng)
    V1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    V2 = random_hermitian(3, rng)
    ops = [(V1, 0.7), (V2, 0.3)]
    L = build_gksl(H, ops)
    for _ in range(5):
        rho = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        direct = apply_gksl(H, ops, rho)
        via_matrix = devectorize(L @ vectorize(rho), 3)
        assert np.max(np.abs(direct - via_matrix)) < 1e-12


def test_gksl_rejects_bad_inputs(rng):
    with pytest.raises(ContractViolation):
        build_gksl(np.array([[0.0, 1.0], [0.0, 0.0]]), [])  # non-Hermitian H
    with pytest.raises(ContractViolation):
        build_gksl(np.zeros((2, 2)), [(np.eye(2), -0.5)])  # negative rate
    with pytest.raises(ContractViolation):
        build_gksl(np.zeros((2, 2)), [(np.eye(3), 1.0)])  # dimension mismatch


# ---------------------------------------------------------------------------
# Unitary conjugation builder
# ---------------------------------------------------------------------------

def test_conjugation_identity_vanishes():
    assert np.max(np.abs(build_unitary_conjugation(np.eye(3)))) < 1e-14


def test_conjugation_qubit_spectrum(assert_clusters):
    theta = 0.7
    F = np.diag([1.0, np.exp(1j * theta)])
    val = 2 * np.cos(theta) - 2
    assert_clusters(eig_clustered(build_unitary_conjugation(F)),
                    [(0.0, 2), (val, 2)])


def test_conjugation_qutrit_multiplicities(assert_clusters):
    theta = 0.7
    F = np.diag([1.0, np.exp(1j * theta), np.exp(2j * theta)])
    assert_clusters(
        eig_clustered(build_unitary_conjugation(F)),
        [(0.0, 3), (2 * np.cos(theta) - 2, 4), (2 * np.cos(2 * theta) - 2, 2)],
    )


def test_conjugation_equals_gksl_with_unit_rates(rng):
    # F rho F* + F* rho F - 2 rho is the two-Lindblad-operator generator
    # with unit rates for V in {F, F*}.
    F = unitary_from_spectrum([1.0, np.exp(0.9j)], [2, 1], rng)
    L = build_unitary_conjugation(F)
    L2 = build_gksl(np.zeros((3, 3)), [(F, 1.0), (F.conj().T, 1.0)])
    assert np.max(np.abs(L - L2)) < 1e-10


def test_conjugation_hermitian_exactly(rng):
    F = unitary_from_spectrum([1.0, 1j], [2, 2], rng)
    assert hermiticity_residual(build_unitary_conjugation(F)) == 0.0


def test_conjugation_rejects_nonunitary():
    with pytest.raises(ContractViolation):
        build_unitary_conjugation(np.diag([1.0, 2.0]))


# ---------------------------------------------------------------------------
# Power-sum double-commutator builder
# ---------------------------------------------------------------------------

def test_power_all_zero_rates(rng):
    F = random_hermitian(3, rng)
    assert np.max(np.abs(build_power_model(F, [0.0, 0.0, 0.0]))) == 0.0


def test_power_involution_even_rate_vanishes():
    # F = diag(1, -1): F^2 = I commutes with everything.
    L = build_power_model(SZ, [0.0, 1.0])
    assert np.max(np.abs(L)) < 1e-14


def test_power_zero_pattern(assert_clusters):
    # F = diag(1, 0, -1), only gamma_2: lambda = -(a_i^2 - a_j^2)^2 vanishes
    # on the five pairs with equal squares.
    F = np.diag([1.0, 0.0, -1.0])
    expected = {}
    for ai in (1.0, 0.0, -1.0):
        for aj in (1.0, 0.0, -1.0):
            lam = -((ai ** 2 - aj ** 2) ** 2)
            expected[lam] = expected.get(lam, 0) + 1
    assert expected == {0.0: 5, -1.0: 4}
    assert_clusters(eig_clustered(build_power_model(F, [0.0, 1.0, 0.0])),
                    [(0.0, 5), (-1.0, 4)])


def test_power_matches_direct_application(rng):
    # Complex Hermitian eigenbasis: exercises the transpose placement.
    F = hermitian_from_spectrum([1.3, 0.4, -0.8], [1, 1, 1], rng)
    rates = [0.6, 0.2, 0.9]
    L = build_power_model(F, rates)
    for _ in range(5):
        rho = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        direct = apply_power(F, rates, rho)
        via_matrix = devectorize(L @ vectorize(rho), 3)
        assert np.max(np.abs(direct - via_matrix)) < 1e-12


def test_power_hermitian_negative_semidefinite(rng):
    F = hermitian_from_spectrum([1.0, 0.5, -0.5, -1.0], [1, 1, 1, 1], rng)
    L = build_power_model(F, [0.4, 0.3, 0.2, 0.1])
    assert hermiticity_residual(L) == 0.0
    assert np.linalg.eigvalsh(L).max() < 1e-10


def test_power_even_rate_zero_mult_exceeds_base(rng):
    # Spectrum symmetric about zero with only an even rate active: the zero
    # eigenvalue collects the mirror pairs on top of sum n_i^2.
    model = arithmetic_model(1.0, (1, 1, 1))
    F = realize_hermitian(model, rng)
    L = build_power_model(F, [0.0, 1.0, 0.0])
    spectrum = eig_clustered(L, scale=4.0)
    zero = [c for c in spectrum.clusters if abs(c.value) < 1e-8]
    assert zero and zero[0].alg_mult == 5 > 3


def test_power_rejects_bad_inputs(rng):
    F = random_hermitian(3, rng)
    with pytest.raises(ContractViolation):
        build_power_model(F, [1.0, 1.0])  # wrong length
    with pytest.raises(ContractViolation):
        build_power_model(F, [1.0, -1.0, 0.0])  # negative rate
    with pytest.raises(ContractViolation):
        build_power_model(np.array([[0.0, 1.0], [0.0, 0.0]]), [1.0, 1.0])


# ---------------------------------------------------------------------------
# Gaussian and von Neumann builders
# ---------------------------------------------------------------------------

def test_gaussian_identity_vanishes():
    assert np.max(np.abs(build_gaussian(np.eye(2)))) == 0.0


def test_gaussian_qubit(assert_clusters):
    assert_clusters(eig_clustered(build_gaussian(SZ)), [(0.0, 2), (-2.0, 2)])


def test_gaussian_three_level_zero_mult(assert_clusters):
    # -(1/2)(h_i - h_j)^2 vanishes only on equal pairs: multiplicity 3,
    # unlike the power model with gamma_2 where the squares also match.
    H = np.diag([1.0, 0.0, -1.0])
    expected = {}
    for hi in (1.0, 0.0, -1.0):
        for hj in (1.0, 0.0, -1.0):
            lam = -0.5 * (hi - hj) ** 2
            expected[lam] = expected.get(lam, 0) + 1
    assert expected == {0.0: 3, -0.5: 4, -2.0: 2}
    assert_clusters(eig_clustered(build_gaussian(H)),
                    [(0.0, 3), (-0.5, 4), (-2.0, 2)])


def test_gaussian_matches_double_commutator(rng):
    H = random_hermitian(3, rng)
    L = build_gaussian(H)
    rho = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    direct = -0.5 * _comm(H, _comm(H, rho))
    assert np.max(np.abs(direct - devectorize(L @ vectorize(rho), 3))) < 1e-12


def test_von_neumann_identity_vanishes():
    assert np.max(np.abs(build_von_neumann(np.eye(3)))) == 0.0


def test_von_neumann_qubit(assert_clusters):
    assert_clusters(eig_clustered(build_von_neumann(SZ)),
                    [(0.0, 2), (2j, 1), (-2j, 1)])


def test_von_neumann_equally_spaced(assert_clusters):
    H = np.diag([2.0, 1.0, 0.0])
    assert_clusters(
        eig_clustered(build_von_neumann(H)),
        [(0.0, 3), (-1j, 2), (1j, 2), (-2j, 1), (2j, 1)],
    )


# ---------------------------------------------------------------------------
# Trace annihilation across every builder family
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family", ["gksl", "unitary_conjugation", "power_model",
                                    "gaussian", "von_neumann"])
def test_builders_annihilate_trace(family, rng):
    if family == "gksl":
        V = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        L = build_gksl(random_hermitian(3, rng), [(V, 0.8)])
    elif family == "unitary_conjugation":
        L = build_unitary_conjugation(unitary_from_spectrum(
            [1.0, np.exp(0.5j), np.exp(1.0j)], [1, 1, 1], rng))
    elif family == "power_model":
        L = build_power_model(
            hermitian_from_spectrum([1.0, 0.0, -1.0], [1, 1, 1], rng),
            [0.5, 0.5, 0.2])
    elif family == "gaussian":
        L = build_gaussian(random_hermitian(3, rng))
    else:
        L = build_von_neumann(random_hermitian(3, rng))
    for _ in range(3):
        rho = random_density_matrix(3, rng)
        drho = devectorize(L @ vectorize(rho), 3)
        assert abs(np.trace(drho)) < 1e-10


# ---------------------------------------------------------------------------
# Spectrum models and realizations
# ---------------------------------------------------------------------------

def test_arithmetic_values_odd():
    assert arithmetic_values(1.0, 3) == (1.0, 0.0, -1.0)
    assert arithmetic_values(0.5, 5) == (1.0, 0.5, 0.0, -0.5, -1.0)


def test_arithmetic_values_even():
    assert arithmetic_values(1.0, 2) == (1.0, -1.0)
    assert arithmetic_values(1.0, 4) == (2.0, 1.0, -1.0, -2.0)


def test_geometric_model_construction():
    m = geometric_model(np.pi / 2, (1, 1))
    assert m.r == 2 and m.dim == 2
    assert abs(m.values[0] - 1.0) < 1e-15
    assert abs(m.values[1] - 1j) < 1e-15
    assert isinstance(m.structure, GeometricRatio)


def test_geometric_model_rejects_out_of_range_theta():
    with pytest.raises(ContractViolation):
        geometric_model(2.0, (1, 1, 1))  # theta > pi/2 for r = 3
    # ... unless collisions are explicitly being explored
    m = geometric_model(2.0, (1, 1, 1), enforce_theta_range=False)
    assert m.r == 3


def test_spectrum_model_validation():
    with pytest.raises(ContractViolation):
        SpectrumModel(values=(1.0, 2.0), multiplicities=(1,))
    with pytest.raises(ContractViolation):
        SpectrumModel(values=(1.0, 1.0), multiplicities=(1, 1))
    with pytest.raises(ContractViolation):
        SpectrumModel(values=(1.0, 2.0), multiplicities=(1, 0))
    with pytest.raises(ContractViolation):
        SpectrumModel(values=(1.0, 2.0), multiplicities=(1, 1),
                      structure=GeometricRatio(3.0 + 0j))
    with pytest.raises(ContractViolation):
        ArithmeticStep(step=0.0, u=1, parity="odd")
    with pytest.raises(ContractViolation):
        ArithmeticStep(step=1.0, u=1, parity="sideways")


def test_realize_unitary_roundtrip(assert_clusters):
    model = geometric_model(0.7, (2, 1))
    F = realize_unitary(model, 11)
    spectrum = eig_clustered(F)
    assert_clusters(spectrum, [(1.0, 2, 2), (np.exp(0.7j), 1, 1)])
    assert np.array_equal(F, realize_unitary(model, 11))  # deterministic


def test_realize_unitary_eta_matches_formula():
    from qtomo.cyclicity import index_of_cyclicity

    model = geometric_model(0.7, (1, 1, 1))
    L = build_unitary_conjugation(realize_unitary(model, 3))
    assert index_of_cyclicity(L, scale=4.0).eta == 4


def test_realize_unitary_rejects_nonunit_ratio():
    model = SpectrumModel(values=(1.0, 2.0), multiplicities=(1, 1),
                          structure=GeometricRatio(2.0 + 0j))
    with pytest.raises(ContractViolation):
        realize_unitary(model, 0)


def test_realize_hermitian_spectra(assert_clusters):
    model = arithmetic_model(1.0, (1, 1, 1))
    F = realize_hermitian(model, 5)
    assert hermiticity_residual(F) == 0.0
    assert_clusters(eig_clustered(F), [(1.0, 1), (0.0, 1), (-1.0, 1)])

    even = arithmetic_model(1.0, (1, 1))
    assert even.values == (1 + 0j, -1 + 0j)
    assert even.structure == ArithmeticStep(step=1.0, u=1, parity="even")


def test_realize_hermitian_needs_arithmetic_structure():
    model = SpectrumModel(values=(1.0, -0.5), multiplicities=(1, 1))
    with pytest.raises(ContractViolation):
        realize_hermitian(model, 0)


# ---------------------------------------------------------------------------
# GeneratorSpec dispatch
# ---------------------------------------------------------------------------

def test_generator_spec_dispatch(rng):
    H = random_hermitian(2, rng)
    spec = GeneratorSpec(model="gaussian", hamiltonian=H)
    assert np.array_equal(build_generator(spec), build_gaussian(H))
    assert generator_scale(spec) > 0

    spec = GeneratorSpec(model="power_model", base_operator=SZ, rates=(0.5, 0.5))
    assert np.array_equal(build_generator(spec), build_power_model(SZ, [0.5, 0.5]))


def test_generator_spec_validation():
    with pytest.raises(ContractViolation):
        GeneratorSpec(model="nonsense")
    with pytest.raises(ContractViolation):
        GeneratorSpec(model="gaussian")  # missing H
    with pytest.raises(ContractViolation):
        GeneratorSpec(model="power_model", base_operator=SZ)  # missing rates
    with pytest.raises(ContractViolation):
        GeneratorSpec(model="gksl")  # nothing at all
