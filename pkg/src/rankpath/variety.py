"""Bounded-rank matrix varieties.

A descriptor (m, n, t) names the set of m x n matrices of rank strictly
below t.  Membership is decided through singular values: the relative size
of the t-th singular value is the residual, which is zero exactly on the
variety and scale-free off it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkernel import (
    DimensionMismatch,
    ScalarField,
    as_matrix,
    numerical_rank,
    singular_values,
)

#: default membership acceptance threshold on the relative residual
DEFAULT_MEMBERSHIP_TOL = 1e-8

_EPS = float(np.finfo(np.float64).eps)


class StratumError(ValueError):
    """Requested rank stratum does not exist inside the variety."""


@dataclass(frozen=True)
class VarietyDescriptor:
    """The variety of m x n matrices over ``field`` with rank < t."""

    m: int
    n: int
    t: int
    field: ScalarField = ScalarField.COMPLEX

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("matrix dimensions must be positive")
        if not 1 <= self.t <= min(self.m, self.n):
            raise ValueError(f"t={self.t} outside 1..min({self.m},{self.n})")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def max_rank(self) -> int:
        """Largest rank attained on the variety (the top stratum)."""
        return self.t - 1


def _checked(p, d: VarietyDescriptor) -> np.ndarray:
    p = as_matrix(p, d.field)
    if p.shape != d.shape:
        raise DimensionMismatch(f"expected shape {d.shape}, got {p.shape}")
    return p


def membership_residual(p, d: VarietyDescriptor) -> float:
    """Relative size of the t-th singular value, sigma_t / max(sigma_1, eps).

    Zero on the variety (and for the zero matrix), of order one far away,
    and invariant under both rescaling and unitary conjugation.
    """
    p = _checked(p, d)
    sigma = singular_values(p)
    return float(sigma[d.t - 1] / max(sigma[0], _EPS))


def is_member(p, d: VarietyDescriptor, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    return membership_residual(p, d) <= tol


def project(p, d: VarietyDescriptor) -> np.ndarray:
    """Nearest matrix of rank <= t-1 in Frobenius norm (truncated SVD).

    Ties between equal singular values keep the first t-1 in the order the
    decomposition returns them, so the output is deterministic.
    """
    p = _checked(p, d)
    keep = d.t - 1
    if keep == 0:
        return np.zeros(d.shape, dtype=d.field.dtype)
    u, sigma, vh = np.linalg.svd(p, full_matrices=False)
    return (u[:, :keep] * sigma[:keep]) @ vh[:keep]


def sample_stratum(d: VarietyDescriptor, r: int, radius: float, seed: int) -> np.ndarray:
    """Random member of exact rank r, rescaled to Frobenius norm ``radius``.

    The sample is a product G @ H of an m x r and an r x n matrix with
    independent standard Gaussian entries (independent real and imaginary
    parts over the complex field), so the rank is exactly r.  Deterministic
    given the seed; r = 0 yields the zero matrix.
    """
    if r < 0 or r > d.max_rank:
        raise StratumError(f"rank {r} not in 0..{d.max_rank} for this variety")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if r == 0:
        return np.zeros(d.shape, dtype=d.field.dtype)
    rng = np.random.default_rng(seed)
    if d.field is ScalarField.COMPLEX:
        g = rng.standard_normal((d.m, r)) + 1j * rng.standard_normal((d.m, r))
        h = rng.standard_normal((r, d.n)) + 1j * rng.standard_normal((r, d.n))
    else:
        g = rng.standard_normal((d.m, r))
        h = rng.standard_normal((r, d.n))
    sample = g @ h
    norm = np.linalg.norm(sample)
    if norm == 0.0:
        raise StratumError("degenerate Gaussian draw; use a different seed")
    return np.asarray(sample * (radius / norm), dtype=d.field.dtype)


def rank_of(p, d: VarietyDescriptor, rel_tol: float = 1e-10) -> int:
    """Numerical rank of a point of the variety's ambient space."""
    return numerical_rank(singular_values(_checked(p, d)), rel_tol)


def codimension(d: VarietyDescriptor) -> int:
    """Codimension (m - t + 1) * (n - t + 1) of the variety in matrix space."""
    return (d.m - d.t + 1) * (d.n - d.t + 1)
