"""Core types and scalar diagnostics for weighted min-max optimization.

The central object is the K x K positive semi-definite operator

    L_r = diag(r) (I - (1/K) 1 1^T) diag(r)

built from a strictly positive preference vector r.  Its quadratic form
J^T L_r J measures how far the weighted objectives r_k * J_k are from
being all equal, and its nullspace contains the elementwise inverse
r^{-1}.  Solvers only ever need matrix-vector products with L_r, which
cost O(K) and never materialize the dense matrix.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np


def as_model_vector(w) -> np.ndarray:
    """Validate and return a model vector as a 1-d float64 array.

    Raises ValueError if empty or not all entries are finite.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size < 1:
        raise ValueError(f"model vector must be 1-d with d >= 1, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("model vector contains non-finite entries")
    return w


def as_preference(r, min_size: int = 1) -> np.ndarray:
    """Validate preference weights: 1-d, strictly positive, finite.

    Benchmark-facing generators require K >= 2; solver-level functions
    accept a single weight so degenerate single-objective problems stay
    usable (pass ``min_size=2`` to enforce the stricter contract).
    """
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or r.size < min_size:
        raise ValueError(f"preference must be 1-d with K >= {min_size}, got shape {r.shape}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0.0):
        raise ValueError("preference weights must be strictly positive and finite")
    return r


class ObjectiveSet(ABC):
    """A collection of K positive differentiable objectives.

    Implementations must be pure functions of the model vector: repeated
    calls with the same ``w`` return identical results, and instances are
    safe to share across threads.
    """

    @property
    @abstractmethod
    def count(self) -> int:
        """Number of objectives K."""

    @abstractmethod
    def values(self, w: np.ndarray) -> np.ndarray:
        """Objective values, shape (K,)."""

    @abstractmethod
    def jacobian(self, w: np.ndarray) -> np.ndarray:
        """Gradient matrix of shape (d, K); column k is the gradient of objective k."""

    def values_and_jacobian(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate values and jacobian together.

        Subclasses whose objectives share intermediate work (e.g. a common
        distance term) should override this to evaluate both in one pass.
        """
        return self.values(w), self.jacobian(w)


def lr_apply(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-free product L_r v in O(K) arithmetic.

    Uses the identity L_r v = r * (u - mean(u)) with u = r * v, so no
    K x K matrix is ever formed.
    """
    r = np.asarray(r, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != r.shape:
        raise ValueError(f"length mismatch: r has shape {r.shape}, v has shape {v.shape}")
    u = r * v
    return r * (u - u.mean())


def lr_dense(r: np.ndarray) -> np.ndarray:
    """Explicit dense matrix diag(r) (I - (1/K) 1 1^T) diag(r).

    Test oracle only; solver loops must go through :func:`lr_apply`.
    """
    r = as_preference(r, min_size=2)
    k = r.size
    centering = np.eye(k) - np.ones((k, k)) / k
    return np.diag(r) @ centering @ np.diag(r)


def fairness_residual(r: np.ndarray, jvals: np.ndarray) -> float:
    """Quadratic form J^T L_r J, zero iff the weighted objectives are equal.

    Computed as the centered sum of squares of u = r * jvals, which is the
    same quantity in exact arithmetic but guaranteed non-negative in floats.
    """
    r = np.asarray(r, dtype=np.float64)
    jvals = np.asarray(jvals, dtype=np.float64)
    if jvals.shape != r.shape:
        raise ValueError(f"length mismatch: r has shape {r.shape}, jvals has shape {jvals.shape}")
    u = r * jvals
    centered = u - u.mean()
    return float(centered @ centered)


def minmax_value(r: np.ndarray, jvals: np.ndarray) -> float:
    """The weighted min-max objective value max_k r_k * jvals_k."""
    return float(np.max(np.asarray(r) * np.asarray(jvals)))


def finite_diff_jacobian(obj: ObjectiveSet, w: np.ndarray, h: float) -> np.ndarray:
    """Central-difference approximation of the (d, K) gradient matrix.

    Entry (j, k) is (J_k(w + h e_j) - J_k(w - h e_j)) / (2 h).  Test oracle
    for analytic jacobians.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    w = as_model_vector(w)
    jac = np.empty((w.size, obj.count))
    for j in range(w.size):
        bumped = w.copy()
        bumped[j] = w[j] + h
        plus = obj.values(bumped)
        bumped[j] = w[j] - h
        minus = obj.values(bumped)
        jac[j] = (plus - minus) / (2.0 * h)
    return jac
