"""Kernel ridge regression in representer form.

Solves (K + lambda*N*I) a = y by Householder QR, evaluates the closed-form
training loss lambda * y'(K + lambda*N*I)^{-1} y and its Neumann-series
truncation, and exposes a scikit-learn style regressor that optimizes the
kernel parameters before solving.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .kernels import ThetaParams, cross_gram, gram, theta_from_text, theta_to_text


class SingularMatrixError(ArithmeticError):
    """QR factorization met a numerically zero diagonal entry."""

    def __init__(self, pivot: int, value: float, threshold: float):
        self.pivot = pivot
        self.value = value
        self.threshold = threshold
        super().__init__(
            f"singular system: |R[{pivot},{pivot}]| = {value:.3e} "
            f"below threshold {threshold:.3e}"
        )


class NeumannDivergenceError(ArithmeticError):
    """Neumann series does not converge: lambda*N must exceed ||K||."""

    def __init__(self, spectral_norm: float, lam_n: float):
        self.spectral_norm = spectral_norm
        self.lam_n = lam_n
        super().__init__(
            f"Neumann series diverges: lambda*N = {lam_n:.6g} "
            f"must exceed ||K|| = {spectral_norm:.6g}"
        )


def _householder_factor_numpy(A: np.ndarray, b: np.ndarray):
    """Reduce A to upper-triangular R, applying the reflections to b as well."""
    n = A.shape[0]
    R = A.copy()
    qtb = b.copy()
    for j in range(n - 1):
        x = R[j:, j]
        normx = float(np.linalg.norm(x))
        if normx == 0.0:
            continue
        v = x.copy()
        v[0] += normx if v[0] >= 0 else -normx
        v /= np.linalg.norm(v)
        R[j:, j:] -= 2.0 * np.outer(v, v @ R[j:, j:])
        qtb[j:] -= 2.0 * v * (v @ qtb[j:])
    return R, qtb


def _householder_factor_loops(A, b):  # compiled when numba is present
    n = A.shape[0]
    R = A.copy()
    qtb = b.copy()
    v = np.empty(n)
    for j in range(n - 1):
        s = 0.0
        for i in range(j, n):
            s += R[i, j] * R[i, j]
        normx = np.sqrt(s)
        if normx == 0.0:
            continue
        for i in range(j, n):
            v[i] = R[i, j]
        if v[j] >= 0.0:
            v[j] += normx
        else:
            v[j] -= normx
        s = 0.0
        for i in range(j, n):
            s += v[i] * v[i]
        vn = np.sqrt(s)
        for i in range(j, n):
            v[i] /= vn
        for col in range(j, n):
            dot = 0.0
            for i in range(j, n):
                dot += v[i] * R[i, col]
            dot *= 2.0
            for i in range(j, n):
                R[i, col] -= dot * v[i]
        dot = 0.0
        for i in range(j, n):
            dot += v[i] * qtb[i]
        dot *= 2.0
        for i in range(j, n):
            qtb[i] -= dot * v[i]
    return R, qtb


def _back_substitute_loops(R, qtb):
    n = R.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        acc = qtb[i]
        for k in range(i + 1, n):
            acc -= R[i, k] * x[k]
        x[i] = acc / R[i, i]
    return x


try:  # pragma: no cover - exercised indirectly
    import numba

    _householder_factor_fast = numba.njit(cache=True)(_householder_factor_loops)
    _back_substitute_fast = numba.njit(cache=True)(_back_substitute_loops)
except ImportError:  # pragma: no cover
    _householder_factor_fast = None
    _back_substitute_fast = None


def householder_solve(A: np.ndarray, b: np.ndarray, use_fast: bool = True) -> np.ndarray:
    """Solve the square system A x = b via Householder QR with back substitution.

    Raises SingularMatrixError naming the first pivot whose magnitude falls
    below 1e-14 times the max-entry norm of A.  The factorization runs
    through a compiled kernel when numba is available (``use_fast``); the
    pure-numpy path implements the identical reflection sequence.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape[0] != n:
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    if use_fast and _householder_factor_fast is not None:
        R, qtb = _householder_factor_fast(A, b.astype(float))
    else:
        R, qtb = _householder_factor_numpy(A, b.astype(float))
    scale = float(np.max(np.abs(A))) if n else 0.0
    threshold = 1e-14 * scale
    diag = np.abs(np.diag(R))
    bad = np.nonzero(diag < threshold)[0]
    if bad.size:
        j = int(bad[0])
        raise SingularMatrixError(pivot=j, value=float(diag[j]), threshold=threshold)
    if use_fast and _back_substitute_fast is not None:
        return _back_substitute_fast(R, qtb)
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (qtb[i] - R[i, i + 1 :] @ x[i + 1 :]) / R[i, i]
    return x


@dataclass(frozen=True)
class RegularizedProblem:
    """Gram matrix, targets, and a positive ridge parameter."""

    K: np.ndarray
    y: np.ndarray
    lam: float

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"K must be square, got shape {K.shape}")
        if y.shape[0] != K.shape[0]:
            raise ValueError(f"y has length {y.shape[0]}, K is {K.shape[0]}x{K.shape[0]}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class FittedModel:
    """Representer coefficients over the training sample.

    Predictions evaluate f(x) = sum_i a_i k(x, x_i) with the stored kernel
    parameters and support points.
    """

    theta: ThetaParams
    support: np.ndarray
    a: np.ndarray
    lam: float

    def __post_init__(self):
        support = np.atleast_2d(np.asarray(self.support, dtype=float))
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if support.shape[0] != a.shape[0]:
            raise ValueError("coefficient count must match support size")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]


def fit(theta: ThetaParams, X: np.ndarray, y: np.ndarray, lam: float) -> FittedModel:
    """Solve (K + lambda*N*I) a = y by QR and return the fitted model.

    The solution is verified to satisfy the system to residual
    1e-8 * ||y||; a violation indicates a numerically hostile kernel and
    raises ArithmeticError.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if X.shape[0] < 1:
        raise ValueError("fit requires a nonempty sample")
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"{y.shape[0]} targets for {X.shape[0]} points")
    n = X.shape[0]
    K = gram(theta, X)
    A = K + lam * n * np.eye(n)
    a = householder_solve(A, y)
    # Iterative refinement: optimized kernels can be ill-conditioned enough
    # (||K|| >> lambda*N) that one QR pass leaves a residual above the
    # contract; each round shrinks it by roughly eps * cond(A).
    tol = 1e-8 * max(float(np.linalg.norm(y)), np.finfo(float).tiny)
    resid = y - A @ a
    for _ in range(3):
        if np.linalg.norm(resid) <= tol:
            break
        a = a + householder_solve(A, resid)
        resid = y - A @ a
    if np.linalg.norm(resid) > tol:
        raise ArithmeticError(
            f"solve residual {np.linalg.norm(resid):.3e} exceeds 1e-8 * ||y||"
        )
    return FittedModel(theta=theta, support=X, a=a, lam=lam)


def predict(model: FittedModel, x: np.ndarray) -> float:
    """Evaluate f(x) = sum_i a_i k(x, x_i) at a single point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.theta.d:
        raise ValueError(f"point has dimension {x.shape[0]}, expected {model.theta.d}")
    k_vec = cross_gram(model.theta, x[None, :], model.support)[0]
    return float(k_vec @ model.a)


def predict_batch(model: FittedModel, X: np.ndarray) -> np.ndarray:
    """Vectorized predict over the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return cross_gram(model.theta, X, model.support) @ model.a


def closed_form_loss(problem: RegularizedProblem) -> float:
    """Training loss of the regularized solution, lambda * y'(K+lambda*N*I)^{-1}y.

    Computed through the QR solve; no inverse is formed.  Equals
    (1/N) * y'(K/(lambda*N) + I)^{-1} y, the normalization used by the
    truncated-series criterion.
    """
    n = problem.n
    A = problem.K + problem.lam * n * np.eye(n)
    sol = householder_solve(A, problem.y)
    return float(problem.lam * (problem.y @ sol))


def direct_loss(model: FittedModel, X: np.ndarray, y: np.ndarray) -> float:
    """Empirical loss (1/N)||K a - y||^2 + lambda * a'K a of a fitted model."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    K = gram(model.theta, X)
    r = K @ model.a - y
    n = y.shape[0]
    return float(r @ r / n + model.lam * (model.a @ (K @ model.a)))


def spectral_norm(K: np.ndarray, rtol: float = 1e-10, max_iters: int = 10_000) -> float:
    """Largest absolute eigenvalue of a symmetric matrix by power iteration.

    Iterates the norm ratio ||K v|| / ||v|| from a fixed random start until
    it changes by less than rtol relatively.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    rng = np.random.default_rng(0)
    v = rng.normal(size=n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iters):
        u = K @ v
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            return 0.0
        if abs(nu - est) <= rtol * nu:
            return nu
        est = nu
        v = u / nu
    return est


def neumann_loss(problem: RegularizedProblem, order: int) -> float:
    """Truncated-series training loss (1/N) y' [sum_{j<=L} (-K/(lambda N))^j] y.

    Valid only under the strict convergence condition lambda*N > ||K||;
    otherwise a NeumannDivergenceError carrying both quantities is raised.
    The polynomial is evaluated by Horner-style matrix-vector products, so
    no matrix power is ever materialized.
    """
    if order < 0:
        raise ValueError(f"truncation order must be >= 0, got {order}")
    K, y, lam = problem.K, problem.y, problem.lam
    n = problem.n
    mu = lam * n
    norm = spectral_norm(K)
    if not mu > norm:
        raise NeumannDivergenceError(spectral_norm=norm, lam_n=mu)
    v = y.copy()
    for _ in range(order):
        v = y - (K @ v) / mu
    return float(y @ v) / n


def model_to_text(model: FittedModel) -> str:
    """Serialize a fitted model: theta block, support points, coefficients.

    Decimal fields use shortest round-trip repr; parsing back reproduces the
    model exactly.
    """
    out = io.StringIO()
    out.write(theta_to_text(model.theta))
    out.write(f"lambda {model.lam!r}\n")
    out.write(f"support {model.n}\n")
    for row in model.support:
        out.write(" ".join(repr(float(v)) for v in row) + "\n")
    out.write("coefficients\n")
    out.write(" ".join(repr(float(v)) for v in model.a) + "\n")
    return out.getvalue()


def model_from_text(text: str) -> FittedModel:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    m = int(lines[0].split()[0])
    theta = theta_from_text("\n".join(lines[: 1 + m]))
    rest = lines[1 + m :]
    if not rest or not rest[0].startswith("lambda"):
        raise ValueError("model record missing lambda line")
    lam = float(rest[0].split()[1])
    if not rest[1].startswith("support"):
        raise ValueError("model record missing support header")
    n = int(rest[1].split()[1])
    support = np.array([[float(t) for t in ln.split()] for ln in rest[2 : 2 + n]])
    if rest[2 + n] != "coefficients":
        raise ValueError("model record missing coefficients header")
    a = np.array([float(t) for t in rest[3 + n].split()])
    return FittedModel(theta=theta, support=support, a=a, lam=lam)


class RidgeKernelRegressor(BaseEstimator, RegressorMixin):
    """Kernel ridge regression with trainable ridge-kernel features.

    fit() optimizes the feature parameters (weights, frequencies, phases)
    by multi-start quasi-Newton descent on the closed-form training loss,
    then solves the representer system at the best parameters found.

    Parameters
    ----------
    n_terms : number of feature terms in the kernel.
    lam : ridge regularization parameter (lambda).
    activation : 'cos' or 'relu' (or any registered activation name).
    solver : 'qr' for the closed-form loss, 'neumann' for the truncated
        series criterion.
    neumann_order : truncation order when solver='neumann'.
    n_starts : number of optimizer restarts (seeds random_state + i).
    max_iters, grad_eps, tol, memory, positivity : optimizer settings; see
        OptimConfig.
    """

    def __init__(
        self,
        n_terms: int = 2,
        lam: float = 0.01,
        activation: str = "cos",
        solver: str = "qr",
        neumann_order: int = 5,
        n_starts: int = 10,
        max_iters: int = 30,
        grad_eps: float = 1e-6,
        tol: float = 1e-9,
        memory: int = 10,
        positivity: bool = True,
        random_state: int = 0,
    ):
        self.n_terms = n_terms
        self.lam = lam
        self.activation = activation
        self.solver = solver
        self.neumann_order = neumann_order
        self.n_starts = n_starts
        self.max_iters = max_iters
        self.grad_eps = grad_eps
        self.tol = tol
        self.memory = memory
        self.positivity = positivity
        self.random_state = random_state

    def fit(self, X, y):
        from .activations import get_activation
        from .optim import OptimConfig, minimize_multistart

        X, y = check_X_y(X, y, y_numeric=True)
        config = OptimConfig(
            max_iters=self.max_iters,
            grad_eps=self.grad_eps,
            tol=self.tol,
            memory=self.memory,
            loss_mode=self.solver,
            neumann_order=self.neumann_order,
            positivity=self.positivity,
        )
        seeds = [self.random_state + i for i in range(self.n_starts)]
        best, results = minimize_multistart(
            X, y, self.lam, config, seeds,
            m=self.n_terms, activation=get_activation(self.activation),
        )
        self.theta_ = best.theta
        self.loss_ = best.loss
        self.status_ = best.status
        self.model_ = fit(best.theta, X, y, self.lam)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return predict_batch(self.model_, X)
