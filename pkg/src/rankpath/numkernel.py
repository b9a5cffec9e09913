"""Dense-matrix numeric kernel.

Scalar fields, Frobenius geometry, and the small-matrix factorizations
(singular values, unitary completions, dominant eigenpairs) that the path
construction is built on.  Everything here is a pure function of its
arguments; inputs are never mutated, so all routines are safe to call from
any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

_REAL_DTYPE = np.dtype(np.float64)
_COMPLEX_DTYPE = np.dtype(np.complex128)

#: unit-norm / unitarity acceptance threshold (relative to dimension)
UNITARITY_TOL = 1e-12

#: eigenpair residual acceptance threshold, relative to the Frobenius norm
EIGENPAIR_RESIDUAL_TOL = 1e-10


class ScalarField(str, Enum):
    """The scalar field a matrix lives over."""

    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> np.dtype:
        return _REAL_DTYPE if self is ScalarField.REAL else _COMPLEX_DTYPE


class Side(str, Enum):
    """Which slot of a unitary completion carries the given vector."""

    FIRST_ROW = "FirstRow"
    FIRST_COLUMN = "FirstColumn"


class DimensionMismatch(ValueError):
    """Operands disagree in shape or scalar field."""


class NormalizationError(ValueError):
    """A vector required to have unit norm does not."""


class NoUsableEigenpair(RuntimeError):
    """No admissible (real, over the real field) eigenvalue clears the floor.

    Callers treat this as a signal to take a fallback branch rather than as
    a hard failure.
    """


def as_matrix(values, field: ScalarField | None = None) -> np.ndarray:
    """Coerce ``values`` to a float64 or complex128 array.

    With ``field=None`` the field is inferred from the data; otherwise the
    array is cast to the requested field.  Casting complex data to the real
    field is rejected.
    """
    a = np.asarray(values)
    if field is None:
        field = ScalarField.COMPLEX if np.iscomplexobj(a) else ScalarField.REAL
    if field is ScalarField.REAL and np.iscomplexobj(a):
        raise DimensionMismatch("complex data cannot be coerced to the real field")
    return np.asarray(a, dtype=field.dtype)


def scalar_field_of(a: np.ndarray) -> ScalarField:
    if a.dtype == _REAL_DTYPE:
        return ScalarField.REAL
    if a.dtype == _COMPLEX_DTYPE:
        return ScalarField.COMPLEX
    raise DimensionMismatch(f"unsupported dtype {a.dtype}; use as_matrix first")


def _check_same_frame(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    if scalar_field_of(a) is not scalar_field_of(b):
        raise DimensionMismatch(f"field mismatch: {a.dtype} vs {b.dtype}")


def frobenius_inner(a, b):
    """Frobenius inner product sum_ij a_ij * conj(b_ij).

    Conjugate-symmetric; real nonnegative on the diagonal.  Returns a float
    for real operands and a complex scalar otherwise.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    _check_same_frame(a, b)
    value = np.sum(a * np.conjugate(b))
    return complex(value) if np.iscomplexobj(a) else float(value)


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def frobenius_distance(a, b) -> float:
    """Euclidean (Frobenius) distance between two same-shape arrays."""
    a = as_matrix(a)
    b = as_matrix(b)
    _check_same_frame(a, b)
    return float(np.linalg.norm(a - b))


def singular_values(a) -> np.ndarray:
    """Singular values of a 2-d array, nonincreasing, length min(m, n)."""
    a = as_matrix(a)
    if a.ndim != 2:
        raise DimensionMismatch("singular_values expects a 2-d array")
    return np.linalg.svd(a, compute_uv=False)


def numerical_rank(sigma, rel_tol: float = 1e-10) -> int:
    """Count singular values exceeding ``rel_tol`` times the largest one.

    A zero (or empty) spectrum has rank 0.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sigma > rel_tol * sigma[0]))


def unitary_completion(w, side: Side) -> np.ndarray:
    """Complete a unit vector to a k x k unitary via a Householder reflection.

    ``Side.FIRST_ROW`` returns U with U @ w = e1 (so row one of U is the
    conjugate of w); ``Side.FIRST_COLUMN`` returns a unitary whose first
    column is w.  Real input yields a real orthogonal matrix.
    """
    w = np.ravel(as_matrix(w))
    k = w.shape[0]
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > UNITARITY_TOL:
        raise NormalizationError(f"expected a unit vector, got norm {norm!r}")

    alpha = w[0] / abs(w[0]) if w[0] != 0 else w.dtype.type(1.0)
    v = w.copy()
    v[0] += alpha
    vnorm_sq = float(np.real(np.vdot(v, v)))
    if vnorm_sq < 1e-30:
        # w is already -alpha * e1; a diagonal phase suffices
        u = np.eye(k, dtype=w.dtype)
        u[0, 0] = np.conjugate(w[0])
    else:
        house = np.eye(k, dtype=w.dtype) - (2.0 / vnorm_sq) * np.outer(v, np.conjugate(v))
        house[0] *= -np.conjugate(alpha)
        u = house
    if side is Side.FIRST_ROW:
        return u
    return u.conj().T


@dataclass(frozen=True)
class UnitaryPair:
    """A pair (U, V) of unitaries acting on matrices as x -> U @ x @ V."""

    u: np.ndarray
    v: np.ndarray
    unitarity_residual: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.u @ x @ self.v

    def inverse(self) -> "UnitaryPair":
        return UnitaryPair(
            self.u.conj().T.copy(), self.v.conj().T.copy(), self.unitarity_residual
        )


def make_unitary_pair(u, v) -> UnitaryPair:
    """Package two unitaries, recording how far each is from exact unitarity.

    The residual is max over the pair of ||W @ W^H - I||_F / sqrt(dim), and
    must clear ``UNITARITY_TOL``.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    residual = 0.0
    for w in (u, v):
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch("unitary factors must be square")
        k = w.shape[0]
        defect = np.linalg.norm(w @ w.conj().T - np.eye(k)) / np.sqrt(k)
        residual = max(residual, float(defect))
    if residual > UNITARITY_TOL:
        raise NormalizationError(f"unitarity residual {residual:g} above tolerance")
    return UnitaryPair(u, v, residual)


def _real_eigenvalue_candidates(m: np.ndarray) -> np.ndarray:
    # dgeev works off the real Schur form: genuinely real eigenvalues come
    # back with imaginary part exactly zero, so this scan is exact.
    eigs = np.linalg.eigvals(m)
    return eigs[eigs.imag == 0.0].real


def leading_nonzero_eigenpair(m, min_rel_magnitude: float = 1e-12):
    """Dominant admissible eigenpair of a square matrix.

    Picks the eigenvalue of largest magnitude (over the real field, largest
    among the exactly-real ones), requiring |mu| >= min_rel_magnitude times
    ||M||_F.  Magnitude ties break by descending (real, imag); the unit
    eigenvector comes from the smallest singular direction of M - mu*I and
    has its largest component rotated to the positive real axis.

    Raises NoUsableEigenpair when nothing admissible clears the floor or
    the residual check fails.
    """
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("eigenpair extraction expects a square matrix")
    fro = frobenius_norm(m)
    if fro == 0.0:
        raise NoUsableEigenpair("zero matrix has no nonzero eigenvalue")

    real_field = scalar_field_of(m) is ScalarField.REAL
    if real_field:
        candidates = _real_eigenvalue_candidates(m)
    else:
        candidates = np.linalg.eigvals(m)
    if candidates.size == 0:
        raise NoUsableEigenpair("no real eigenvalue exists for this real matrix")

    order = sorted(
        range(candidates.size),
        key=lambda i: (-abs(candidates[i]), -candidates[i].real, -np.imag(candidates[i]), i),
    )
    mu = candidates[order[0]]
    if abs(mu) == 0.0 or abs(mu) < min_rel_magnitude * fro:
        raise NoUsableEigenpair(
            f"leading admissible eigenvalue {mu!r} below floor "
            f"{min_rel_magnitude:g} * {fro:g}"
        )

    shifted = m - mu * np.eye(m.shape[0], dtype=m.dtype)
    _, _, vh = np.linalg.svd(shifted)
    w = vh[-1].conj()
    pivot = int(np.argmax(np.abs(w)))
    phase = w[pivot] / abs(w[pivot])
    w = w / phase
    w = w / np.linalg.norm(w)

    residual = float(np.linalg.norm(m @ w - mu * w))
    if residual > EIGENPAIR_RESIDUAL_TOL * fro:
        raise NoUsableEigenpair(f"eigenpair residual {residual:g} too large")
    if real_field:
        return float(mu.real if np.iscomplexobj(mu) else mu), w.real.copy()
    return complex(mu), w
