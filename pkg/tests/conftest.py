import numpy as np
import pytest

from embalign import embed_view, generate_identity_cloud


@pytest.fixture(scope="session")
def small_views():
    """Two orthogonal noise-free views of one 30-identity cloud."""
    cloud = generate_identity_cloud(30, 5, 8, seed=1)
    v0 = embed_view(cloud, 32, 10, map_kind="orthogonal", model_name="m0")
    v1 = embed_view(cloud, 32, 20, map_kind="orthogonal", model_name="m1")
    return v0, v1


def random_orthogonal(dim, rng):
    """Test-local Haar rotation, independent of the library's generator."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))
