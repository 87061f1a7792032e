"""Dense complex linear algebra primitives.

Everything in this module operates on plain ``numpy`` arrays with complex
dtype.  Matrices are treated as immutable values: no function mutates its
arguments and every result is a fresh array.

The vectorization convention is column stacking, ``vec(M)[i + n*j] = M[i, j]``,
which gives the identity ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, EigensolverError

# Relative tolerance for hermiticity / unitarity checks, scaled by ||M||_F.
HERMITICITY_RTOL = 1e-10
UNITARITY_RTOL = 1e-10
# Relative tolerance for eigenvalue clustering, scaled by the spectral scale.
CLUSTER_RTOL = 1e-8

_EPS = float(np.finfo(np.float64).eps)


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex array, rejecting anything else."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ContractViolation(f"{name} must be a 2-D matrix, got shape {A.shape}")
    return A


def as_square(M, name: str = "matrix") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {A.shape}")
    return A


def as_rng(seed) -> np.random.Generator:
    """Accept an integer seed, a seed sequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def frobenius(M) -> float:
    return float(np.linalg.norm(np.asarray(M)))


def hermiticity_residual(M) -> float:
    """``||M - M^dagger||_F``; zero for exactly Hermitian matrices."""
    A = as_square(M)
    return float(np.linalg.norm(A - A.conj().T))


def unitarity_residual(M) -> float:
    """``||M M^dagger - I||_F``; zero for exactly unitary matrices."""
    A = as_square(M)
    return float(np.linalg.norm(A @ A.conj().T - np.eye(A.shape[0])))


def is_hermitian(M, tol: float | None = None) -> bool:
    A = as_square(M)
    if tol is None:
        tol = HERMITICITY_RTOL * frobenius(A)
    return hermiticity_residual(A) <= tol


def is_unitary(M, tol: float | None = None) -> bool:
    A = as_square(M)
    if tol is None:
        tol = UNITARITY_RTOL * frobenius(A)
    return unitarity_residual(A) <= tol


def kron(A, B) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``A[i, j] * B``."""
    return np.kron(as_matrix(A, "A"), as_matrix(B, "B"))


def vectorize(M) -> np.ndarray:
    """Column-stacking vectorization: ``vectorize(M)[i + n*j] = M[i, j]``."""
    return as_matrix(M).reshape(-1, order="F")


def devectorize(v, n: int) -> np.ndarray:
    """Inverse of :func:`vectorize` for an ``n x n`` matrix."""
    vec = np.asarray(v, dtype=complex).reshape(-1)
    if vec.size != n * n:
        raise ContractViolation(f"vector of length {vec.size} is not n^2 = {n * n}")
    return vec.reshape((n, n), order="F")


def numerical_rank(A, tol: float | None = None, scale: float = 0.0) -> int:
    """Rank as the number of singular values above a threshold.

    The default threshold is ``eps * max(shape) * max(sigma_max, scale)``.
    ``scale`` lets callers that know the construction magnitude of ``A``
    treat a matrix that cancelled down to rounding noise as zero.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigensolverError(f"SVD failed: {exc}") from exc
    if s.size == 0:
        return 0
    if tol is None:
        tol = _EPS * max(A.shape) * max(float(s[0]), float(scale))
    return int(np.count_nonzero(s > tol))


def geometric_multiplicity(M, lam: complex, tol: float | None = None,
                           scale: float = 0.0) -> int:
    """Dimension of ``Ker(M - lam I)``, via the numerical rank of ``M - lam I``.

    Returns 0 when ``lam`` is not an eigenvalue.
    """
    A = as_square(M)
    n = A.shape[0]
    return n - numerical_rank(A - lam * np.eye(n), tol=tol, scale=scale)


@dataclass(frozen=True)
class EigenCluster:
    """One group of numerically coincident eigenvalues."""

    value: complex
    alg_mult: int
    geo_mult: int


@dataclass(frozen=True)
class Spectrum:
    """Clustered spectrum of a square matrix.

    Clusters are ordered by (real, imaginary) part of their representative
    value.  Algebraic multiplicities sum to the matrix dimension.
    """

    clusters: tuple[EigenCluster, ...]
    dim: int

    def __post_init__(self):
        total = sum(c.alg_mult for c in self.clusters)
        if total != self.dim:
            raise ContractViolation(
                f"algebraic multiplicities sum to {total}, expected dim={self.dim}"
            )
        for c in self.clusters:
            if not (1 <= c.geo_mult <= c.alg_mult):
                raise ContractViolation(
                    f"cluster {c.value}: geometric multiplicity {c.geo_mult} "
                    f"outside [1, {c.alg_mult}]; clustering and rank tolerances "
                    "are inconsistent for this matrix"
                )

    @property
    def values(self) -> tuple[complex, ...]:
        return tuple(c.value for c in self.clusters)

    @property
    def alg_mults(self) -> tuple[int, ...]:
        return tuple(c.alg_mult for c in self.clusters)

    @property
    def geo_mults(self) -> tuple[int, ...]:
        return tuple(c.geo_mult for c in self.clusters)

    def max_geometric_multiplicity(self) -> int:
        return max(c.geo_mult for c in self.clusters)


def _cluster_indices(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage grouping: values within ``tol`` of each other merge."""
    m = values.size
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(values[i] - values[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def eig_clustered(M, tau_clust: float | None = None, tau_rank: float | None = None,
                  scale: float | None = None) -> Spectrum:
    """Eigendecompose ``M`` and group eigenvalues into multiplicity clusters.

    Parameters
    ----------
    M : square complex matrix
    tau_clust : absolute clustering tolerance; eigenvalues closer than this
        merge into one cluster.  Defaults to ``1e-8 * scale``.
    tau_rank : absolute threshold for the rank computations that fill the
        geometric multiplicities.  Defaults to the :func:`numerical_rank`
        convention.
    scale : spectral scale of the problem.  Defaults to ``max |eigenvalue|``;
        pass the construction magnitude explicitly when ``M`` may have
        cancelled down to rounding noise (so that it clusters as zero).
    """
    A = as_square(M)
    try:
        if is_hermitian(A):
            values = np.linalg.eigvalsh(A).astype(complex)
        else:
            values = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed: {exc}") from exc

    scale_eff = float(np.max(np.abs(values))) if scale is None else float(scale)
    tol = CLUSTER_RTOL * scale_eff if tau_clust is None else float(tau_clust)

    clusters = []
    for idx in _cluster_indices(values, tol):
        rep = complex(np.mean(values[idx]))
        geo = geometric_multiplicity(A, rep, tol=tau_rank, scale=scale_eff)
        clusters.append(EigenCluster(value=rep, alg_mult=len(idx), geo_mult=geo))
    clusters.sort(key=lambda c: (c.value.real, c.value.imag))
    return Spectrum(clusters=tuple(clusters), dim=A.shape[0])


def min_poly_degree(M, tol: float | None = None, scale: float | None = None) -> int:
    """Degree of the minimal polynomial of ``M``.

    Smallest ``d`` such that ``{I, M, ..., M^d}`` are linearly dependent,
    detected from the numerical rank of their stacked vectorizations.  For
    diagonalizable ``M`` this is the number of distinct eigenvalues.
    """
    A = as_square(M)
    n = A.shape[0]
    sigma_max = float(np.linalg.norm(A, 2)) if A.size else 0.0
    norm = max(sigma_max, 0.0 if scale is None else float(scale))
    if norm == 0.0:
        return 1  # M is exactly zero: M - 0*I vanishes
    # Work with M/norm so that powers stay O(1); rescaling does not change
    # which power first becomes linearly dependent on the earlier ones.
    B = A / norm
    vecs = [vectorize(np.eye(n))]
    P = np.eye(n, dtype=complex)
    for d in range(1, n + 1):
        P = P @ B
        vecs.append(vectorize(P))
        if numerical_rank(np.column_stack(vecs), tol=tol) <= d:
            return d
    return n  # Cayley-Hamilton bound; not reachable for d < n failing


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of the n x n matrices (n^2 elements).

    Diagonal units, symmetrized off-diagonal pairs, and antisymmetrized
    off-diagonal pairs, orthonormal under the Hilbert-Schmidt inner product.
    """
    basis = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[i, j] = S[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(S)
            K = np.zeros((n, n), dtype=complex)
            K[i, j] = -1j / np.sqrt(2.0)
            K[j, i] = 1j / np.sqrt(2.0)
            basis.append(K)
    return basis


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-ish random unitary from the QR factorization of a complex
    Gaussian matrix, with the phase convention that makes it deterministic."""
    rng = as_rng(rng)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_hermitian(n: int, rng, unit_norm: bool = True) -> np.ndarray:
    """Gaussian Hermitian matrix, optionally normalized to unit Frobenius norm."""
    rng = as_rng(rng)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (G + G.conj().T) / 2.0
    if unit_norm:
        H = H / np.linalg.norm(H)
    return H


def random_density_matrix(n: int, rng) -> np.ndarray:
    """Random full-rank density matrix (Hermitian, PSD, unit trace)."""
    rng = as_rng(rng)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = G @ G.conj().T
    return rho / np.trace(rho)
