"""Ridge-kernel parameter bundles, kernel evaluation, and Gram matrices.

A ridge kernel is a finite sum of products of one-dimensional ridge
functions::

    k(x, y) = sum_j c_j * act(<w_j, x> + b_j) * act(<w_j, y> + b_j)

The parameter bundle (c, w, b, activation) is immutable once built.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .activations import Activation, get_activation


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ThetaParams:
    """Weights, frequencies and phases of an m-term ridge kernel.

    Attributes
    ----------
    c : (m,) term weights; any real unless ``positive`` is set.
    w : (m, d) frequency vectors.
    b : (m,) phases.
    activation : scalar activation applied to the ridge arguments.
    positive : when True, construction enforces every c_j > 0.
    """

    c: np.ndarray
    w: np.ndarray
    b: np.ndarray
    activation: Activation
    positive: bool = False

    def __post_init__(self):
        c = _frozen(np.atleast_1d(self.c))
        w = _frozen(np.atleast_2d(self.w))
        b = _frozen(np.atleast_1d(self.b))
        if c.ndim != 1 or b.ndim != 1 or w.ndim != 2:
            raise ValueError("c and b must be vectors, w a matrix of shape (m, d)")
        if not (len(c) == len(b) == w.shape[0]):
            raise ValueError(
                f"inconsistent term counts: c has {len(c)}, b has {len(b)}, w has {w.shape[0]}"
            )
        if self.positive and not np.all(c > 0):
            raise ValueError("positive=True requires every c_j > 0")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]


def feature_matrix(theta: ThetaParams, X: np.ndarray) -> np.ndarray:
    """Evaluate the (n, m) matrix of ridge features act(<w_j, x_i> + b_j)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != theta.d:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {theta.d}")
    return theta.activation(X @ theta.w.T + theta.b)


def eval_kernel(theta: ThetaParams, x: np.ndarray, y: np.ndarray) -> float:
    """Kernel value sum_j c_j * act(<w_j,x>+b_j) * act(<w_j,y>+b_j).

    The product of the two feature values is formed before multiplying by
    c_j, so the result is bit-for-bit symmetric in (x, y).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape[0] != theta.d or y.shape[0] != theta.d:
        raise ValueError(
            f"points have dimensions {x.shape[0]} and {y.shape[0]}, expected {theta.d}"
        )
    u = theta.activation(theta.w @ x + theta.b)
    v = theta.activation(theta.w @ y + theta.b)
    return float(np.dot(theta.c, u * v))


def gram(theta: ThetaParams, X: np.ndarray) -> np.ndarray:
    """Kernel Gram matrix over a sample, stored exactly symmetric.

    The upper triangle is computed and mirrored, so entries[i, j] and
    entries[j, i] are the same float, not merely close.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < 1:
        raise ValueError("gram requires a nonempty sample")
    phi = feature_matrix(theta, X)
    K = (phi * theta.c) @ phi.T
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def cross_gram(theta: ThetaParams, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Rectangular kernel matrix k(x_i, y_j) for two point sets."""
    phi_x = feature_matrix(theta, X)
    phi_y = feature_matrix(theta, Y)
    return (phi_x * theta.c) @ phi_y.T


def theta_to_text(theta: ThetaParams) -> str:
    """Serialize to the flat text record: header line, then one line per term.

    Floats are written with shortest round-trip repr, so parsing the record
    back reproduces the parameters exactly.
    """
    out = io.StringIO()
    out.write(f"{theta.m} {theta.d} {theta.activation.name}\n")
    for j in range(theta.m):
        row = [theta.c[j], theta.b[j], *theta.w[j]]
        out.write(" ".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def theta_from_text(text: str) -> ThetaParams:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty theta record")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"malformed theta header: {lines[0]!r}")
    m, d = int(head[0]), int(head[1])
    activation = get_activation(head[2])
    if len(lines) != 1 + m:
        raise ValueError(f"expected {m} term lines, found {len(lines) - 1}")
    c = np.empty(m)
    b = np.empty(m)
    w = np.empty((m, d))
    for j, ln in enumerate(lines[1:]):
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != 2 + d:
            raise ValueError(f"term line {j + 1} has {len(vals)} fields, expected {2 + d}")
        c[j], b[j] = vals[0], vals[1]
        w[j] = vals[2:]
    return ThetaParams(c=c, w=w, b=b, activation=activation)
