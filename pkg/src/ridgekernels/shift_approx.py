"""Approximation of shift-invariant kernels by cosine ridge kernels.

Covers spectral sampling of Gaussian profiles, the equispaced phase average
that turns products of shifted cosines into a function of x - y, and
sup-norm error measurement on compact boxes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .activations import COSINE
from .kernels import ThetaParams, cross_gram


class ShiftInvariantKernel:
    """k(x, y) = profile(x - y) for a fixed profile function."""

    def __init__(self, profile: Callable[[np.ndarray], np.ndarray], name: str = "custom"):
        self.profile = profile
        self.name = name

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.profile(np.asarray(u, dtype=float))


class GaussianKernel(ShiftInvariantKernel):
    """Gaussian profile exp(-gamma * ||u||^2); value 1 at u = 0."""

    def __init__(self, gamma: float):
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        self.gamma = float(gamma)
        super().__init__(self._profile, name=f"gaussian(gamma={gamma})")

    def _profile(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.exp(-self.gamma * np.sum(u * u, axis=-1))


@dataclass(frozen=True)
class CompactBox:
    """Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be vectors of equal length")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def grid(self, n_per_dim: int) -> np.ndarray:
        """Tensor lattice with n_per_dim points per axis, corners included."""
        if n_per_dim < 2:
            raise ValueError("grid needs at least 2 points per dimension")
        axes = [np.linspace(self.lo[i], self.hi[i], n_per_dim) for i in range(self.dim)]
        pts = np.array(list(itertools.product(*axes)))
        return pts


@dataclass(frozen=True)
class ApproxConfig:
    """Feature count, phase count, and seed for the cosine approximation."""

    n_features: int
    n_phases: int
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.n_phases < 3:
            raise ValueError("n_phases must be >= 3")


def sample_rff_theta(gamma: float, n_features: int, dim: int, seed: int) -> ThetaParams:
    """Draw cosine features whose kernel estimates exp(-gamma * ||x-y||^2).

    Frequencies are sampled from the Gaussian spectral density (componentwise
    normal with variance 2*gamma), phases uniform on [0, 2*pi), and each
    weight is 2/n_features, so the expectation of the kernel matches the
    target profile.  Deterministic given the seed.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if n_features < 1:
        raise ValueError("n_features must be >= 1")
    rng = np.random.default_rng(seed)
    w = rng.normal(scale=np.sqrt(2.0 * gamma), size=(n_features, dim))
    b = rng.uniform(0.0, 2.0 * np.pi, size=n_features)
    c = np.full(n_features, 2.0 / n_features)
    return ThetaParams(c=c, w=w, b=b, activation=COSINE, positive=True)


def phase_average(alpha: float, beta: float, n_phases: int) -> float:
    """Equispaced average (1/M) sum_k cos(alpha + t_k) cos(beta + t_k).

    With t_k = 2*pi*k/M for k = 1..M, the average equals cos(alpha - beta)/2
    exactly for every M >= 3; below 3 nodes the quadrature is not exact, so
    such inputs are rejected.
    """
    if n_phases < 3:
        raise ValueError("phase average requires at least 3 nodes")
    t = 2.0 * np.pi * np.arange(1, n_phases + 1) / n_phases
    return float(np.mean(np.cos(alpha + t) * np.cos(beta + t)))


def phase_discretize(theta: ThetaParams, n_phases: int) -> ThetaParams:
    """Expand a cosine kernel into m * n_phases terms with equispaced phases.

    Each original term (c_j, w_j, b_j) becomes n_phases terms with weight
    c_j / n_phases, phase t_k, and the same frequency; the phases b_j are
    discarded.  The resulting kernel equals sum_j (c_j / 2) cos(<w_j, x-y>)
    exactly, hence is shift invariant.
    """
    if theta.activation.name != "cos":
        raise ValueError("phase discretization is defined for cosine kernels only")
    if n_phases < 3:
        raise ValueError("phase discretization requires at least 3 phases")
    t = 2.0 * np.pi * np.arange(1, n_phases + 1) / n_phases
    c = np.repeat(theta.c / n_phases, n_phases)
    w = np.repeat(theta.w, n_phases, axis=0)
    b = np.tile(t, theta.m)
    return ThetaParams(c=c, w=w, b=b, activation=COSINE)


def sup_error(
    target: ShiftInvariantKernel,
    theta: ThetaParams,
    box: CompactBox,
    grid_per_dim: int = 17,
) -> float:
    """Max of |target(x - y) - k_theta(x, y)| over the box lattice.

    The lattice is the full tensor grid of (x, y) pairs drawn from the
    per-axis grid of the box, a desk-scale surrogate for the sup over the
    compact set.
    """
    pts = box.grid(grid_per_dim)
    approx = cross_gram(theta, pts, pts)
    diffs = pts[:, None, :] - pts[None, :, :]
    exact = target(diffs)
    return float(np.max(np.abs(exact - approx)))


class RandomCosineFeatures(BaseEstimator, TransformerMixin):
    """Transformer mapping inputs to weighted cosine ridge features.

    After fitting, ``transform(X) @ transform(Y).T`` approximates the
    Gaussian kernel exp(-gamma * ||x - y||^2).  Composes with any
    scikit-learn linear model.
    """

    def __init__(self, n_features: int = 200, gamma: float = 1.0, random_state: int = 0):
        self.n_features = n_features
        self.gamma = gamma
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        self.theta_ = sample_rff_theta(
            self.gamma, self.n_features, X.shape[1], self.random_state
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "theta_")
        X = check_array(X)
        th = self.theta_
        return np.sqrt(th.c) * th.activation(X @ th.w.T + th.b)
