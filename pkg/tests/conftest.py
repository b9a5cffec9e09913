import numpy as np
import pytest

from rankpath import ScalarField, VarietyDescriptor, sample_stratum


def random_unitary(k: int, rng: np.random.Generator, field: ScalarField) -> np.ndarray:
    """Haar-ish unitary from QR with the phase of R's diagonal fixed."""
    if field is ScalarField.COMPLEX:
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    else:
        g = rng.standard_normal((k, k))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_member(
    d: VarietyDescriptor, rng: np.random.Generator, rank: int | None = None
) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(1, d.t)) if d.t > 1 else 0
    if rank == 0:
        return np.zeros(d.shape, dtype=d.field.dtype)
    radius = float(rng.uniform(0.5, 2.0))
    return sample_stratum(d, rank, radius, int(rng.integers(0, 2**62)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
