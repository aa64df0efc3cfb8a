"""
core/active_regression.py | Active Linear Regression
Purpose: Incremental ordinary least squares with a maintained inverse Gram matrix and A-optimal
(trace-reduction) sample selection.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy
Abstract Spec: A = (X^T X)^-1 is kept current with Sherman-Morrison rank-one updates. The next sample
to measure is the candidate v maximizing v^T A^2 v / (1 + v^T A v), which is exactly the reduction of
Tr[A] the measurement would bring. Until X^T X is invertible, candidates with the largest norm are
measured first; if the design is still singular when a fit is needed, ridge with lambda = 1e-6 is used
and flagged.
"""
from dataclasses import dataclass, field
from typing import Hashable, List, Optional, Sequence

import numpy as np

from core.errors import DegenerateUpdateError, SingularDesignError

DENOMINATOR_FLOOR = 1e-12
RIDGE_LAMBDA = 1e-6
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class Candidate:
    vector: np.ndarray
    key: Hashable = None


def _design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


def ols_fit(X, y, condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """
    Purpose: Closed-form least squares theta = (X^T X)^-1 X^T y.
    Inputs: X (n x d rows, already bias-augmented), y (n targets)
    Outputs: theta_hat (d,)
    Role: Batch fit used at cold start and as the oracle for the incremental state.
    """
    X = _design(X)
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n != y.shape[0]:
        raise ValueError(f"[ERROR] ols_fit: {n} rows but {y.shape[0]} targets")
    if n < d:
        raise SingularDesignError(f"[ERROR] ols_fit: need at least {d} rows, got {n}")
    gram = X.T @ X
    if not np.isfinite(np.linalg.cond(gram)) or np.linalg.cond(gram) > condition_limit:
        raise SingularDesignError("[ERROR] ols_fit: X^T X is singular or ill-conditioned")
    return np.linalg.solve(gram, X.T @ y)


def ridge_fit(X, y, lam: float = RIDGE_LAMBDA) -> np.ndarray:
    X = _design(X)
    y = np.asarray(y, dtype=float).ravel()
    return np.linalg.solve(X.T @ X + lam * np.eye(X.shape[1]), X.T @ y)


def expected_param_error(sigma_sq: float, A) -> float:
    """E||theta_hat - theta*||^2 = sigma^2 Tr[A]."""
    if sigma_sq < 0:
        raise ValueError(f"[ERROR] expected_param_error: sigma_sq must be >= 0, got {sigma_sq}")
    return float(sigma_sq * np.trace(np.asarray(A, dtype=float)))


def trace_gain(A, v) -> float:
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float).ravel()
    Av = A @ v
    return float(Av @ Av / (1.0 + v @ Av))


def select_sample(A, candidates: Sequence) -> int:
    """Index of the candidate with the largest trace gain; ties go to the lowest index."""
    if len(candidates) == 0:
        raise ValueError("[ERROR] select_sample: candidate list is empty")
    best, best_gain = 0, -np.inf
    for i, cand in enumerate(candidates):
        vec = cand.vector if isinstance(cand, Candidate) else cand
        gain = trace_gain(A, vec)
        if gain > best_gain:
            best, best_gain = i, gain
    return best


def predict(theta_hat, v) -> float:
    theta_hat = np.asarray(theta_hat, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if theta_hat.shape != v.shape:
        raise ValueError(f"[ERROR] predict: dimension mismatch {theta_hat.shape} vs {v.shape}")
    return float(theta_hat @ v)


@dataclass
class DesignState:
    dim: int
    rows: List[np.ndarray] = field(default_factory=list)
    targets: List[float] = field(default_factory=list)
    A: Optional[np.ndarray] = None
    theta_hat: Optional[np.ndarray] = None
    ridge: bool = False

    @property
    def n(self) -> int:
        return len(self.rows)

    def X(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, self.dim)

    def y(self) -> np.ndarray:
        return np.array(self.targets, dtype=float)

    def add(self, v, y_new: float) -> "DesignState":
        """Append a measurement; uses Sherman-Morrison once A exists, batch inversion before that."""
        v = np.asarray(v, dtype=float).ravel()
        if v.shape[0] != self.dim:
            raise ValueError(f"[ERROR] DesignState.add: expected dimension {self.dim}, got {v.shape[0]}")
        if self.A is not None and not self.ridge:
            return rank_one_update(self, v, y_new)
        self.rows.append(v)
        self.targets.append(float(y_new))
        self.ridge = False
        self.A = None
        if self.n >= self.dim:
            gram = self.X().T @ self.X()
            cond = np.linalg.cond(gram)
            if np.isfinite(cond) and cond <= CONDITION_LIMIT:
                self.A = np.linalg.inv(gram)
                self.A = (self.A + self.A.T) / 2
                self.theta_hat = self.A @ (self.X().T @ self.y())
        return self

    def fit(self) -> np.ndarray:
        """Current coefficients; falls back to ridge (flagged) when X^T X is not invertible."""
        if self.n == 0:
            raise SingularDesignError("[ERROR] DesignState.fit: no measurements")
        if self.A is not None and not self.ridge:
            return self.theta_hat
        self.ridge = True
        self.theta_hat = ridge_fit(self.X(), self.y())
        return self.theta_hat

    def next_index(self, candidates: Sequence) -> int:
        vectors = [c.vector if isinstance(c, Candidate) else np.asarray(c, dtype=float) for c in candidates]
        if not vectors:
            raise ValueError("[ERROR] next_index: candidate list is empty")
        if self.A is None or self.ridge:
            norms = [float(np.linalg.norm(v)) for v in vectors]
            return int(np.argmax(norms))
        return select_sample(self.A, vectors)


def rank_one_update(state: DesignState, v, y_new: float) -> DesignState:
    """
    Purpose: Append row v with target y_new and update A = (X^T X)^-1 by Sherman-Morrison.
    Inputs: state (DesignState with A defined), v (d,), y_new (float)
    Outputs: the same DesignState, updated
    Role: new A = A - (A v v^T A) / (1 + v^T A v); theta_hat refreshed from the new A.
    """
    if state.A is None:
        raise SingularDesignError("[ERROR] rank_one_update: A is not defined yet")
    v = np.asarray(v, dtype=float).ravel()
    Av = state.A @ v
    denom = 1.0 + float(v @ Av)
    if denom <= DENOMINATOR_FLOOR:
        raise DegenerateUpdateError(f"[ERROR] rank_one_update: 1 + v^T A v = {denom:g} is below the floor")
    A = state.A - np.outer(Av, Av) / denom
    state.A = (A + A.T) / 2
    state.rows.append(v)
    state.targets.append(float(y_new))
    state.theta_hat = state.A @ (state.X().T @ state.y())
    return state


def estimate_noise_variance(state: DesignState) -> float:
    """Residual sum of squares / (n - d)."""
    if state.n <= state.dim:
        raise ValueError(f"[ERROR] estimate_noise_variance: need n > d, got n={state.n}, d={state.dim}")
    theta = state.fit()
    resid = state.y() - state.X() @ theta
    return float(resid @ resid / (state.n - state.dim))
