"""Positive-semidefiniteness certification on finite samples.

The workhorse is a cyclic Jacobi eigensolver for symmetric matrices; on top
of it sit the PSD check for ridge-kernel Gram matrices and the frame-style
criterion deciding whether a signed sum of rank-one feature kernels is a
Mercer kernel on a given sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import ThetaParams, gram


def _check_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 0.0)
    dev = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if dev > 1e-12 * scale:
        raise ValueError(f"matrix is asymmetric: max |A - A^T| = {dev:.3e}")
    return A


def jacobi_eigh(A: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps Givens rotations over all off-diagonal pairs until the
    off-diagonal Frobenius norm falls below ``tol`` relative to the matrix
    norm.  Returns (eigenvalues ascending, eigenvectors as columns).
    """
    A = _check_symmetric(A).copy()
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    norm = float(np.linalg.norm(A))
    if norm == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 0.1 * tol * norm / n:
                    continue
                # rotation zeroing A[p, q], Golub & Van Loan sec. 8.5
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                cth = 1.0 / np.sqrt(1.0 + t * t)
                sth = t * cth
                rot = np.array([[cth, sth], [-sth, cth]])
                A[:, [p, q]] = A[:, [p, q]] @ rot
                A[[p, q], :] = rot.T @ A[[p, q], :]
                A[p, q] = A[q, p] = 0.0
                V[:, [p, q]] = V[:, [p, q]] @ rot
    vals = A.diagonal().copy()
    order = np.argsort(vals)
    return vals[order], V[:, order]


def min_eigenvalue_sym(A: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix (Jacobi iteration).

    Raises ValueError when the input deviates from symmetry by more than
    1e-12 relative to its magnitude.
    """
    vals, _ = jacobi_eigh(A)
    return float(vals[0])


def is_psd_on_sample(theta: ThetaParams, X: np.ndarray, tol: float = 1e-8) -> bool:
    """True iff the kernel Gram matrix over the sample has min eigenvalue >= -tol."""
    return min_eigenvalue_sym(gram(theta, X)) >= -tol


@dataclass(frozen=True)
class SignedFeatureModel:
    """Feature vectors of a signed kernel sum evaluated on a sample.

    ``v_plus`` holds the vectors of positively-signed rank-one kernels,
    ``v_minus`` those subtracted; all share the sample-size dimension.
    """

    v_plus: np.ndarray
    v_minus: np.ndarray

    def __post_init__(self):
        vp = np.asarray(self.v_plus, dtype=float)
        vm = np.asarray(self.v_minus, dtype=float)
        vp = vp.reshape(0, 0) if vp.size == 0 else np.atleast_2d(vp)
        vm = vm.reshape(0, vp.shape[1] if vp.size else 0) if vm.size == 0 else np.atleast_2d(vm)
        if vp.size and vm.size and vp.shape[1] != vm.shape[1]:
            raise ValueError(
                f"vector dimensions differ: plus {vp.shape[1]}, minus {vm.shape[1]}"
            )
        if vp.size == 0 and vm.size == 0:
            raise ValueError("model needs at least one vector")
        object.__setattr__(self, "v_plus", vp)
        object.__setattr__(self, "v_minus", vm)

    @property
    def n(self) -> int:
        return self.v_plus.shape[1] if self.v_plus.size else self.v_minus.shape[1]

    def difference_gram(self) -> np.ndarray:
        """The symmetric operator sum_plus v v^T - sum_minus v v^T."""
        G = np.zeros((self.n, self.n))
        for v in self.v_plus:
            G += np.outer(v, v)
        for v in self.v_minus:
            G -= np.outer(v, v)
        return G


def frame_condition(model: SignedFeatureModel, tol: float = 1e-10) -> bool:
    """Decide whether the signed feature sum is PSD on the sample.

    The quantified condition sum_plus <v_j, a>^2 >= sum_minus <v_j, a>^2 over
    all unit vectors a holds iff the difference operator has min eigenvalue
    >= 0; numerically-zero minima down to -tol count as PSD, since
    rank-deficient frames legitimately sit at zero.
    """
    return min_eigenvalue_sym(model.difference_gram()) >= -tol
