import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    derandomize=True,
)
hypothesis.settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_dense_state(dims, rng):
    """Normalized random complex vector on a product of local spaces."""
    n = int(np.prod(dims))
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


def kron_chain(site_ops, dims):
    """Dense operator from a {site: matrix} map, identity elsewhere."""
    out = np.array([[1.0 + 0.0j]])
    for k, d in enumerate(dims):
        op = np.asarray(site_ops[k], dtype=complex) if k in site_ops else np.eye(d)
        out = np.kron(out, op)
    return out
