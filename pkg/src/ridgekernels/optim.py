"""Quasi-Newton minimization of the kernel training loss over feature parameters.

Limited-memory BFGS with two-loop recursion, backtracking line search, and
central finite-difference gradients.  Positivity of the term weights is
enforced by a squaring reparametrization, so the search itself stays
unconstrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .activations import Activation
from .kernels import ThetaParams, gram
from .krr import NeumannDivergenceError, RegularizedProblem, closed_form_loss, neumann_loss


@dataclass(frozen=True)
class OptimConfig:
    """Settings for the quasi-Newton loss minimization.

    ``loss_mode`` selects the closed-form QR loss ('qr') or its truncated
    Neumann-series criterion ('neumann', order ``neumann_order``).  With
    ``positivity`` the optimizer works in square-root weight variables, so
    every evaluated kernel has nonnegative term weights.
    """

    max_iters: int = 30
    grad_eps: float = 1e-6
    tol: float = 1e-9
    memory: int = 10
    loss_mode: str = "qr"
    neumann_order: int = 5
    positivity: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_eps > 0:
            raise ValueError("grad_eps must be positive")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if self.loss_mode not in ("qr", "neumann"):
            raise ValueError(f"unknown loss_mode {self.loss_mode!r}")
        if self.neumann_order < 0:
            raise ValueError("neumann_order must be >= 0")


def pack_theta(theta: ThetaParams, positivity: bool = False) -> np.ndarray:
    """Flatten theta to the vector (c_1..c_m, b_1..b_m, w rows), length m*(2+d).

    With ``positivity`` the weight slots hold sqrt(c); plain packing
    round-trips exactly through unpack_theta.
    """
    c = np.sqrt(theta.c) if positivity else theta.c
    return np.concatenate([c, theta.b, theta.w.ravel()])


def unpack_theta(
    flat: np.ndarray,
    m: int,
    d: int,
    activation: Activation,
    positivity: bool = False,
) -> ThetaParams:
    flat = np.asarray(flat, dtype=float).reshape(-1)
    if flat.shape[0] != m * (2 + d):
        raise ValueError(f"flat vector has length {flat.shape[0]}, expected {m * (2 + d)}")
    c = flat[:m] ** 2 if positivity else flat[:m]
    b = flat[m : 2 * m]
    w = flat[2 * m :].reshape(m, d)
    return ThetaParams(c=c, w=w, b=b, activation=activation)


def init_theta(m: int, d: int, seed: int, activation: Activation) -> ThetaParams:
    """Random initialization: c_j ~ U(0,1), b_j ~ N(0,1), w_ij ~ N(0,1).

    Deterministic given the seed; the activation is the caller's choice.
    """
    if m < 1 or d < 1:
        raise ValueError("m and d must be >= 1")
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.0, 1.0, size=m)
    b = rng.normal(size=m)
    w = rng.normal(size=(m, d))
    return ThetaParams(c=c, w=w, b=b, activation=activation)


def objective(
    flat: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    config: OptimConfig,
    m: int,
    activation: Activation,
) -> float:
    """Training loss at packed parameters: unpack, build the Gram, evaluate.

    In Neumann mode the divergence guard applies and the error propagates to
    the caller; the descent driver records it as an infinite trial value.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    theta = unpack_theta(flat, m, X.shape[1], activation, config.positivity)
    problem = RegularizedProblem(K=gram(theta, X), y=y, lam=lam)
    if config.loss_mode == "neumann":
        return neumann_loss(problem, config.neumann_order)
    return closed_form_loss(problem)


@dataclass
class MinimizeResult:
    """Best parameters found, their loss, and how the run terminated.

    ``status`` is one of 'converged', 'max_iters', 'stalled' (line search
    gave out after progress), or 'no_progress' (no step was ever accepted,
    e.g. a divergent Neumann start).  ``trace`` rows are
    (iteration, loss, step_size, note).
    """

    theta: ThetaParams
    loss: float
    status: str
    n_iters: int = 0
    trace: list = field(default_factory=list)

    @property
    def progressed(self) -> bool:
        return self.status not in ("no_progress",)


def fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, eps: float) -> np.ndarray:
    """Central finite differences with per-coordinate step eps * (1 + |x_i|)."""
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        h = eps * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def lbfgs(f: Callable[[np.ndarray], float], x0: np.ndarray, config: OptimConfig):
    """Two-loop-recursion L-BFGS with Armijo backtracking.

    Exceptions and non-finite trial values are treated as rejected points,
    never fatal.  Returns (x_best, f_best, status, n_iters, trace); accepted
    iterates have strictly decreasing loss.
    """

    def f_safe(v: np.ndarray) -> float:
        try:
            val = f(v)
        except (NeumannDivergenceError, ArithmeticError):
            return math.inf
        return val if math.isfinite(val) else math.inf

    x = np.asarray(x0, dtype=float).copy()
    fx = f_safe(x)
    trace = [(0, fx, 0.0, "init")]
    if not math.isfinite(fx):
        return x, fx, "no_progress", 0, trace

    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    g = fd_gradient(f_safe, x, config.grad_eps)
    if not np.all(np.isfinite(g)):
        return x, fx, "no_progress", 0, trace
    status = "max_iters"
    accepted = 0

    for it in range(1, config.max_iters + 1):
        # two-loop recursion for the search direction
        q = g.copy()
        alphas = []
        for s, yk in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / (yk @ s)
            a = rho * (s @ q)
            alphas.append((a, rho, s, yk))
            q -= a * yk
        if y_hist:
            gamma = (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
            q *= gamma
        for a, rho, s, yk in reversed(alphas):
            beta = rho * (yk @ q)
            q += (a - beta) * s
        p = -q
        steepest = False
        if p @ g >= 0:
            p = -g
            steepest = True

        def line_search(direction: np.ndarray):
            slope = float(g @ direction)
            alpha = 1.0
            for _ in range(30):
                trial = x + alpha * direction
                f_trial = f_safe(trial)
                if f_trial <= fx + 1e-4 * alpha * slope and f_trial < fx:
                    return trial, f_trial, alpha
                alpha *= 0.5
            return None

        hit = line_search(p)
        if hit is None and not steepest:
            hit = line_search(-g)
        if hit is None:
            status = "stalled" if accepted else "no_progress"
            trace.append((it, fx, 0.0, "line_search_failed"))
            return x, fx, status, it, trace

        x_new, f_new, step = hit
        g_new = fd_gradient(f_safe, x_new, config.grad_eps)
        if not np.all(np.isfinite(g_new)):
            trace.append((it, f_new, step, "gradient_unavailable"))
            return x_new, f_new, "stalled", it, trace
        s = x_new - x
        yk = g_new - g
        if s @ yk > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yk):
            s_hist.append(s)
            y_hist.append(yk)
            if len(s_hist) > config.memory:
                s_hist.pop(0)
                y_hist.pop(0)
        decrease = fx - f_new
        x, fx, g = x_new, f_new, g_new
        accepted += 1
        trace.append((it, fx, step, "accept"))
        if decrease < config.tol:
            status = "converged"
            return x, fx, status, it, trace

    return x, fx, status, config.max_iters, trace


def minimize(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    config: OptimConfig,
    seed: int,
    *,
    m: int = 2,
    activation: Activation,
) -> MinimizeResult:
    """Minimize the training loss from one random initialization."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    d = X.shape[1]
    theta0 = init_theta(m, d, seed, activation)
    x0 = pack_theta(theta0, config.positivity)

    def f(v: np.ndarray) -> float:
        return objective(v, X, y, lam, config, m, activation)

    x_best, f_best, status, n_iters, trace = lbfgs(f, x0, config)
    theta = unpack_theta(x_best, m, d, activation, config.positivity)
    return MinimizeResult(theta=theta, loss=f_best, status=status, n_iters=n_iters, trace=trace)


def minimize_multistart(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    config: OptimConfig,
    seeds,
    *,
    m: int = 2,
    activation: Activation,
):
    """Run minimize once per seed; best loss wins, first seed breaks ties.

    Returns (best result, all results in seed order).
    """
    results = [
        minimize(X, y, lam, config, seed, m=m, activation=activation) for seed in seeds
    ]
    best = min(results, key=lambda r: (r.loss if math.isfinite(r.loss) else math.inf))
    return best, results


def trace_to_csv(trace) -> str:
    """Render an optimization trace as CSV (iteration, loss, step, status)."""
    lines = ["iteration,loss,step_size,status"]
    for it, loss, step, note in trace:
        lines.append(f"{it},{loss!r},{step!r},{note}")
    return "\n".join(lines) + "\n"
