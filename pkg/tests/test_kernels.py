"""Ridge-kernel evaluation, Gram construction, and parameter serialization."""

import math

import numpy as np
import pytest

from ridgekernels.activations import COSINE, RELU, get_activation, register_activation
from ridgekernels.kernels import (
    ThetaParams,
    eval_kernel,
    feature_matrix,
    gram,
    theta_from_text,
    theta_to_text,
)
from ridgekernels.mercer import min_eigenvalue_sym


def random_theta(rng, m=None, d=None, nonnegative=False, activation=None):
    m = m or int(rng.integers(1, 5))
    d = d or int(rng.integers(1, 4))
    c = rng.normal(size=m)
    if nonnegative:
        c = np.abs(c)
    act = activation or (COSINE if rng.random() < 0.5 else RELU)
    return ThetaParams(c=c, w=rng.normal(size=(m, d)), b=rng.normal(size=m), activation=act)


class TestEvalKernel:
    def test_constant_cosine_term(self):
        theta = ThetaParams(c=[1.0], w=[[0.0, 0.0]], b=[0.0], activation=COSINE)
        assert eval_kernel(theta, (5.0, 7.0), (-2.0, 3.0)) == 1.0

    def test_relu_kills_negative_side(self):
        theta = ThetaParams(c=[2.0], w=[[1.0, 0.0]], b=[0.0], activation=RELU)
        assert eval_kernel(theta, (3.0, 0.0), (-1.0, 0.0)) == 0.0

    def test_two_term_sum_at_origin(self):
        # cos(0)^2 + cos(pi/2)^2 evaluated by hand
        theta = ThetaParams(
            c=[1.0, 1.0],
            w=[[1.0, 0.0], [0.0, 1.0]],
            b=[0.0, math.pi / 2],
            activation=COSINE,
        )
        expected = math.cos(0.0) ** 2 + math.cos(math.pi / 2) ** 2
        assert eval_kernel(theta, (0.0, 0.0), (0.0, 0.0)) == pytest.approx(expected, abs=0)
        assert expected == pytest.approx(1.0, abs=1e-30)

    def test_dimension_mismatch(self):
        theta = ThetaParams(c=[1.0], w=[[0.0, 0.0]], b=[0.0], activation=COSINE)
        with pytest.raises(ValueError):
            eval_kernel(theta, (1.0, 2.0, 3.0), (0.0, 0.0))

    def test_symmetry_is_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            theta = random_theta(rng)
            x = rng.normal(size=theta.d)
            y = rng.normal(size=theta.d)
            assert eval_kernel(theta, x, y) - eval_kernel(theta, y, x) == 0.0


class TestGram:
    def test_constant_kernel_gives_ones(self):
        theta = ThetaParams(c=[1.0], w=[[0.0, 0.0]], b=[0.0], activation=COSINE)
        pts = np.array([[5.0, 7.0], [-2.0, 3.0], [0.1, 0.2]])
        assert np.array_equal(gram(theta, pts), np.ones((3, 3)))

    def test_negative_weight_two_points(self):
        # -1 * (all-ones 2x2) has eigenvalues {0, -2}
        theta = ThetaParams(c=[-1.0], w=[[0.0, 0.0]], b=[0.0], activation=COSINE)
        K = gram(theta, np.zeros((2, 2)))
        assert np.array_equal(K, -np.ones((2, 2)))
        assert min_eigenvalue_sym(K) == pytest.approx(-2.0, abs=1e-12)

    def test_empty_sample_rejected(self):
        theta = ThetaParams(c=[1.0], w=[[0.0]], b=[0.0], activation=COSINE)
        with pytest.raises(ValueError):
            gram(theta, np.zeros((0, 1)))

    def test_exact_symmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            theta = random_theta(rng)
            pts = rng.normal(size=(int(rng.integers(2, 12)), theta.d))
            K = gram(theta, pts)
            assert np.array_equal(K, K.T)

    def test_nonnegative_weights_are_psd(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            theta = random_theta(rng, nonnegative=True)
            n = int(rng.integers(2, 21))
            pts = rng.normal(size=(n, theta.d))
            assert min_eigenvalue_sym(gram(theta, pts)) >= -1e-8 * n

    def test_feature_factorization_oracle(self):
        # independent reconstruction: explicit loops over terms and points
        rng = np.random.default_rng(17)
        for _ in range(20):
            theta = random_theta(rng)
            pts = rng.normal(size=(6, theta.d))
            K = gram(theta, pts)
            phi = np.array(
                [
                    [
                        float(theta.activation(np.dot(theta.w[j], pts[i]) + theta.b[j]))
                        for j in range(theta.m)
                    ]
                    for i in range(len(pts))
                ]
            )
            K_ref = phi @ np.diag(theta.c) @ phi.T
            assert np.allclose(K, K_ref, rtol=1e-12, atol=1e-14)

    def test_matches_eval_kernel(self):
        rng = np.random.default_rng(19)
        theta = random_theta(rng, m=3, d=2)
        pts = rng.normal(size=(5, 2))
        K = gram(theta, pts)
        for i in range(5):
            for j in range(5):
                assert K[i, j] == pytest.approx(eval_kernel(theta, pts[i], pts[j]), rel=1e-12)


class TestThetaParams:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ThetaParams(c=[1.0, 2.0], w=[[0.0]], b=[0.0], activation=COSINE)

    def test_positive_flag_enforced(self):
        with pytest.raises(ValueError):
            ThetaParams(c=[1.0, 0.0], w=np.zeros((2, 1)), b=np.zeros(2),
                        activation=COSINE, positive=True)
        theta = ThetaParams(c=[1.0, 2.0], w=np.zeros((2, 1)), b=np.zeros(2),
                            activation=COSINE, positive=True)
        assert theta.positive

    def test_zero_weight_admissible_without_flag(self):
        theta = ThetaParams(c=[0.0], w=[[1.0]], b=[0.0], activation=COSINE)
        assert eval_kernel(theta, [1.0], [2.0]) == 0.0

    def test_arrays_are_immutable(self):
        theta = ThetaParams(c=[1.0], w=[[1.0]], b=[0.0], activation=COSINE)
        with pytest.raises(ValueError):
            theta.c[0] = 2.0

    def test_roundtrip_serialization_exact(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            theta = random_theta(rng)
            back = theta_from_text(theta_to_text(theta))
            assert np.array_equal(back.c, theta.c)
            assert np.array_equal(back.b, theta.b)
            assert np.array_equal(back.w, theta.w)
            assert back.activation.name == theta.activation.name

    def test_malformed_records_rejected(self):
        with pytest.raises(ValueError):
            theta_from_text("")
        with pytest.raises(ValueError):
            theta_from_text("2 1 cos\n1.0 0.0 0.0\n")  # missing a term line
        with pytest.raises(ValueError):
            theta_from_text("1 2 cos\n1.0 0.0 0.0\n")  # short term line


class TestActivations:
    def test_known_values(self):
        assert COSINE(0.0) == 1.0
        assert RELU(-3.0) == 0.0
        assert RELU(2.5) == 2.5

    def test_registry_roundtrip(self):
        assert get_activation("cos") is COSINE
        assert get_activation("relu") is RELU
        with pytest.raises(ValueError):
            get_activation("sigmoid-not-registered")

    def test_custom_activation_usable_in_kernel(self):
        act = register_activation("test_tanh", np.tanh)
        theta = ThetaParams(c=[1.0], w=[[1.0]], b=[0.0], activation=act)
        x = np.array([0.5])
        assert eval_kernel(theta, x, x) == pytest.approx(np.tanh(0.5) ** 2, rel=1e-15)
        phi = feature_matrix(theta, x[None, :])
        assert phi[0, 0] == np.tanh(0.5)
