import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtomo.errors import ContractViolation
from qtomo.linalg import (
    devectorize,
    eig_clustered,
    geometric_multiplicity,
    hermitian_basis,
    is_hermitian,
    is_unitary,
    kron,
    min_poly_degree,
    numerical_rank,
    random_density_matrix,
    random_hermitian,
    random_unitary,
    vectorize,
)


def _rand(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


# ---------------------------------------------------------------------------
# Kronecker product and vectorization
# ---------------------------------------------------------------------------

def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_diagonal_blocks():
    out = kron(np.diag([1.0, 2.0]), np.eye(2))
    assert np.array_equal(out, np.diag([1.0, 1.0, 2.0, 2.0]))


def test_vectorize_column_stacking():
    M = np.array([[1.0, 3.0], [2.0, 4.0]])
    assert np.array_equal(vectorize(M), np.array([1.0, 2.0, 3.0, 4.0]))


def test_devectorize_roundtrip(rng):
    M = _rand(rng, 4)
    assert np.array_equal(devectorize(vectorize(M), 4), M)


def test_devectorize_length_mismatch():
    with pytest.raises(ContractViolation):
        devectorize(np.ones(5), 2)


def test_vec_identity_fixes_convention(rng):
    # vec(A X B) = (B^T kron A) vec(X): the identity that makes the
    # conjugation generator reproducible term by term.
    A, X, B = (_rand(rng, 3) for _ in range(3))
    lhs = vectorize(A @ X @ B)
    rhs = kron(B.T, A) @ vectorize(X)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_hilbert_schmidt_pairing(rng):
    Q = random_hermitian(4, rng)
    M = random_hermitian(4, rng)
    lhs = np.trace(Q.conj().T @ M)
    rhs = np.vdot(vectorize(Q), vectorize(M))
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_kron_bilinear_and_associative(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (_rand(rng, 2) for _ in range(3))
    a = complex(rng.standard_normal(), rng.standard_normal())
    assert np.max(np.abs(kron(A + B, C) - (kron(A, C) + kron(B, C)))) < 1e-12
    assert np.max(np.abs(kron(a * A, B) - a * kron(A, B))) < 1e-12
    assert np.max(np.abs(kron(A, kron(B, C)) - kron(kron(A, B), C))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
def test_vec_identity_property(seed, n):
    rng = np.random.default_rng(seed)
    A, X, B = (_rand(rng, n) for _ in range(3))
    assert np.max(np.abs(vectorize(A @ X @ B) - kron(B.T, A) @ vectorize(X))) < 1e-12


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

def test_hermitian_and_unitary_checks(rng):
    H = random_hermitian(3, rng)
    U = random_unitary(3, rng)
    assert is_hermitian(H)
    assert not is_hermitian(U + np.diag([1j, 0, 0]))
    assert is_unitary(U)
    assert not is_unitary(2 * U)
    assert is_hermitian(np.zeros((2, 2)))


def test_random_factories_deterministic():
    assert np.array_equal(random_unitary(4, 7), random_unitary(4, 7))
    assert np.array_equal(random_hermitian(4, 7), random_hermitian(4, 7))
    rho = random_density_matrix(3, 7)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > 0


# ---------------------------------------------------------------------------
# Rank, kernels, clustering
# ---------------------------------------------------------------------------

def test_geometric_multiplicity_full_kernel():
    assert geometric_multiplicity(np.eye(3), 1.0) == 3


def test_geometric_multiplicity_jordan_block():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert geometric_multiplicity(J, 0.0) == 1


def test_geometric_multiplicity_diagonal():
    assert geometric_multiplicity(np.diag([0.0, 0.0, 5.0]), 0.0) == 2


def test_geometric_multiplicity_not_eigenvalue():
    assert geometric_multiplicity(np.diag([1.0, 2.0]), 3.0) == 0


def test_numerical_rank_scale_floor():
    noise = 1e-16 * np.ones((3, 3))
    assert numerical_rank(noise) == 1
    assert numerical_rank(noise, scale=1.0) == 0


def test_eig_clustered_diagonal(assert_clusters):
    spectrum = eig_clustered(np.diag([1.0, 1.0, 2.0]))
    assert_clusters(spectrum, [(1.0, 2, 2), (2.0, 1, 1)])


def test_eig_clustered_defective(assert_clusters):
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert_clusters(eig_clustered(J), [(0.0, 2, 1)])


def test_eig_clustered_conjugation_example(assert_clusters):
    # Base operator diag(1, e^{0.7i}, e^{1.4i}); the generator spectrum is
    # 2cos(k*0.7) - 2 over hop counts k = |i - j|, enumerated directly.
    from qtomo.generators import build_unitary_conjugation

    theta = 0.7
    F = np.diag([1.0, np.exp(1j * theta), np.exp(2j * theta)])
    L = build_unitary_conjugation(F)

    expected = {}
    for i in range(3):
        for j in range(3):
            lam = round(2 * np.cos((i - j) * theta) - 2, 12)
            expected[lam] = expected.get(lam, 0) + 1
    assert sorted(expected.values()) == [2, 3, 4]

    spectrum = eig_clustered(L)
    assert_clusters(spectrum, [(v, m, m) for v, m in expected.items()])


def test_eig_clustered_hermitian_alg_equals_geo(rng):
    H = random_hermitian(5, rng)
    spectrum = eig_clustered(H)
    assert all(c.alg_mult == c.geo_mult for c in spectrum.clusters)
    assert sum(c.alg_mult for c in spectrum.clusters) == 5


def test_eig_clustered_geo_bounded_by_alg(rng):
    for _ in range(5):
        M = _rand(rng, 4)
        spectrum = eig_clustered(M)
        assert sum(c.alg_mult for c in spectrum.clusters) == 4
        assert all(1 <= c.geo_mult <= c.alg_mult for c in spectrum.clusters)
        assert sum(c.geo_mult for c in spectrum.clusters) <= 4


def test_eig_clustered_zero_matrix(assert_clusters):
    assert_clusters(eig_clustered(np.zeros((3, 3))), [(0.0, 3, 3)])


# ---------------------------------------------------------------------------
# Minimal polynomial degree
# ---------------------------------------------------------------------------

def test_min_poly_identity():
    assert min_poly_degree(np.eye(4)) == 1


def test_min_poly_two_distinct():
    assert min_poly_degree(np.diag([1.0, 2.0])) == 2


def test_min_poly_conjugation_example():
    from qtomo.generators import build_unitary_conjugation

    F = np.diag([1.0, np.exp(0.7j), np.exp(1.4j)])
    distinct = {round(2 * np.cos(k * 0.7) - 2, 12) for k in range(3)}
    assert len(distinct) == 3
    assert min_poly_degree(build_unitary_conjugation(F)) == 3


def test_min_poly_jordan_block():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert min_poly_degree(J) == 2


def test_min_poly_zero_matrix():
    assert min_poly_degree(np.zeros((3, 3))) == 1


def test_min_poly_matches_distinct_eigenvalues(rng):
    for _ in range(5):
        H = random_hermitian(4, rng)
        spectrum = eig_clustered(H)
        assert min_poly_degree(H) == len(spectrum.clusters)


# ---------------------------------------------------------------------------
# Hermitian basis
# ---------------------------------------------------------------------------

def test_hermitian_basis_orthonormal_complete():
    basis = hermitian_basis(3)
    assert len(basis) == 9
    G = np.array([[np.vdot(vectorize(a), vectorize(b)) for b in basis] for a in basis])
    assert np.max(np.abs(G - np.eye(9))) < 1e-12
    assert all(is_hermitian(Q) for Q in basis)
