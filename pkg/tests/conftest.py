import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def assert_clusters():
    """Check a Spectrum against (value, alg_mult[, geo_mult]) expectations."""

    def check(spectrum, expected, tol=1e-8):
        exp = sorted(
            [(complex(e[0]), *e[1:]) for e in expected],
            key=lambda e: (e[0].real, e[0].imag),
        )
        assert len(spectrum.clusters) == len(exp), (
            f"{len(spectrum.clusters)} clusters, expected {len(exp)}: "
            f"{[(c.value, c.alg_mult) for c in spectrum.clusters]}"
        )
        for cluster, e in zip(spectrum.clusters, exp):
            assert abs(cluster.value - e[0]) <= tol
            assert cluster.alg_mult == e[1]
            if len(e) > 2:
                assert cluster.geo_mult == e[2]

    return check


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def complex_matrix():
    return random_complex
