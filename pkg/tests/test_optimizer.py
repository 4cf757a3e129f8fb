import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrlog.errors import DataError, NumericError
from corrlog.model import Instance, ModelParams, MultilabelDataset
from corrlog.objective import (
    RegularizationConfig,
    full_objective,
    smooth_gradient,
    surrogate_objective,
)
from corrlog.optimizer import (
    BacktrackingStep,
    FixedStep,
    TrainConfig,
    default_initial_step,
    prox_step,
    soft_threshold,
    subgradient_residual,
    train_corrlog,
    train_ilrs,
)

from conftest import random_dataset


def balanced_coin_dataset(n_quads: int, d: int, seed: int) -> MultilabelDataset:
    """Two labels hitting all four +-1 combinations equally often."""
    rng = np.random.default_rng(seed)
    combos = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    instances = []
    for _ in range(n_quads):
        for combo in combos:
            x = rng.normal(size=d)
            x /= max(1.0, np.linalg.norm(x))
            instances.append(Instance(x, np.array(combo)))
    return MultilabelDataset(instances, d, 2, ("a", "b"))


def correlated_pair_dataset(n: int, seed: int) -> MultilabelDataset:
    """y2 always equals y1; features only weakly informative."""
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(n):
        y1 = int(rng.choice([-1, 1]))
        x = rng.normal(size=2) * 0.05
        instances.append(Instance(x, np.array([y1, y1])))
    return MultilabelDataset(instances, 2, 2, ("a", "b"))


class TestSoftThreshold:
    def test_basic_cases(self):
        assert soft_threshold(1.0, 0.3) == pytest.approx(0.7)
        assert soft_threshold(-0.2, 0.3) == 0.0
        assert soft_threshold(-1.0, 0.3) == pytest.approx(-0.7)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1e6, 1e6, allow_nan=False))
    def test_zero_threshold_is_identity(self, u):
        assert soft_threshold(u, 0.0) == u

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-100, 100), st.floats(0, 100))
    def test_shrinks_and_preserves_sign(self, u, t):
        s = soft_threshold(u, t)
        assert abs(s) <= max(abs(u) - t, 0.0) + 1e-12
        if abs(u) <= t:
            assert s == 0.0
        else:
            assert np.sign(s) == np.sign(u)

    def test_rejects_negative_threshold(self):
        with pytest.raises(DataError):
            soft_threshold(1.0, -0.1)


class TestProxStep:
    def _grad(self, params, dataset, reg):
        return smooth_gradient(params, dataset, reg)

    def test_zero_gradient_eps0_is_identity(self):
        rng = np.random.default_rng(1)
        p = ModelParams(rng.normal(size=(2, 2)), {(0, 1): 0.4}, 2, 2)
        grad = self._grad(ModelParams.zeros(2, 2), random_dataset(rng, 4, 2, 2),
                          RegularizationConfig(0.0, 0.0, 0.0))
        grad.grad_beta[:] = 0.0
        grad.grad_alpha[:] = 0.0
        out = prox_step(p, grad, 0.5, RegularizationConfig(0.1, 0.1, 0.0))
        assert np.array_equal(out.beta, p.beta)
        assert out.alpha == p.alpha

    def test_eps0_is_plain_gradient_step(self):
        rng = np.random.default_rng(2)
        ds = random_dataset(rng, 5, 2, 3)
        reg = RegularizationConfig(0.1, 0.1, 0.0)
        p = ModelParams(rng.normal(size=(2, 3)), {(0, 1): -0.3}, 2, 3)
        grad = self._grad(p, ds, reg)
        out = prox_step(p, grad, 0.2, reg)
        assert np.allclose(out.beta, p.beta - 0.2 * grad.grad_beta, atol=1e-15)
        assert out.alpha_at(0, 1) == pytest.approx(-0.3 - 0.2 * grad.alpha_pair(0, 1), abs=1e-15)

    def test_single_coordinate_arithmetic(self):
        # beta=1, grad=2, eta=0.25, lambda1*eps=0.4: step to 0.5, threshold 0.1 -> 0.4
        from corrlog.objective import GradientBuffer

        p = ModelParams(np.array([[1.0]]), {}, 1, 1)
        grad = GradientBuffer(np.array([[2.0]]), np.zeros((1, 1)))
        out = prox_step(p, grad, 0.25, RegularizationConfig(0.8, 0.1, 0.5))
        assert out.beta[0, 0] == pytest.approx(0.4, abs=1e-15)

    def test_minimizes_surrogate(self):
        # the prox output must beat random candidates on the surrogate value
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, 6, 3, 2)
        reg = RegularizationConfig(0.2, 0.2, 1.0)
        anchor = ModelParams(rng.normal(size=(3, 2)), {(0, 1): 0.5, (1, 2): -0.2}, 3, 2)
        grad = self._grad(anchor, ds, reg)
        eta = 0.1
        star = prox_step(anchor, grad, eta, reg)
        j_star = surrogate_objective(star, anchor, grad, eta, ds, reg)
        for _ in range(25):
            cand_beta = star.beta + rng.normal(size=(3, 2)) * 0.05
            cand_alpha = {k: v + rng.normal() * 0.05 for k, v in star.alpha.items()}
            cand_alpha.setdefault((0, 2), rng.normal() * 0.05)
            cand = ModelParams(cand_beta, cand_alpha, 3, 2)
            assert j_star <= surrogate_objective(cand, anchor, grad, eta, ds, reg) + 1e-12


class TestTrainingDescent:
    def test_trace_monotone_and_surrogate_majorizes(self):
        rng = np.random.default_rng(7)
        ds = random_dataset(rng, 20, 3, 4)
        reg = RegularizationConfig(0.05, 0.05, 1.0)
        config = TrainConfig(reg=reg, max_iters=200, rel_tol=1e-10)
        params, trace = train_corrlog(ds, config)
        objs = trace.objectives()
        assert np.all(np.diff(objs) <= 1e-12)
        assert trace.iterations > 1

    def test_manual_ista_majorization_conditions(self):
        # with eta = 1 / lipschitz_bound every step must satisfy the surrogate
        # conditions: J(theta_new; theta) >= f(theta_new) and
        # J(theta; theta) == f(theta)
        rng = np.random.default_rng(8)
        ds = random_dataset(rng, 15, 3, 3)
        reg = RegularizationConfig(0.1, 0.1, 1.0)
        eta = default_initial_step(ds, reg)
        params = ModelParams.zeros(3, 3)
        for _ in range(25):
            grad = smooth_gradient(params, ds, reg)
            new_params = prox_step(params, grad, eta, reg)
            j_anchor = surrogate_objective(params, params, grad, eta, ds, reg)
            j_new = surrogate_objective(new_params, params, grad, eta, ds, reg)
            assert j_anchor == pytest.approx(full_objective(params, ds, reg), abs=1e-12)
            assert j_new >= full_objective(new_params, ds, reg) - 1e-10
            assert full_objective(new_params, ds, reg) <= full_objective(params, ds, reg) + 1e-12
            params = new_params

    def test_acceleration_not_slower_to_converge(self):
        rng = np.random.default_rng(9)
        ds = random_dataset(rng, 30, 3, 4)
        reg = RegularizationConfig(0.01, 0.01, 1.0)
        _, trace_fast = train_corrlog(ds, TrainConfig(reg=reg, max_iters=3000, rel_tol=1e-9))
        _, trace_slow = train_corrlog(
            ds, TrainConfig(reg=reg, max_iters=3000, rel_tol=1e-9, accelerate=False)
        )
        assert trace_fast.objectives()[-1] <= trace_slow.objectives()[-1] + 1e-8

    def test_fixed_step_descends(self):
        rng = np.random.default_rng(10)
        ds = random_dataset(rng, 10, 2, 3)
        reg = RegularizationConfig(0.1, 0.1, 1.0)
        eta = default_initial_step(ds, reg)
        _, trace = train_corrlog(
            ds, TrainConfig(reg=reg, step=FixedStep(eta), max_iters=300, rel_tol=1e-9)
        )
        assert np.all(np.diff(trace.objectives()) <= 1e-12)


class TestTrainCorrlog:
    def test_no_signal_huge_lambda2_zeroes_alpha(self):
        ds = balanced_coin_dataset(10, 3, seed=0)
        reg = RegularizationConfig(1.0, 50.0, 1.0)
        params, trace = train_corrlog(ds, TrainConfig(reg=reg, max_iters=2000, rel_tol=1e-10))
        assert params.nnz_alpha() == 0
        assert np.max(np.abs(params.beta)) < 0.05
        assert trace.objectives()[-1] == pytest.approx(2 * np.log(2), abs=0.05)

    def test_correlated_labels_positive_alpha(self):
        ds = correlated_pair_dataset(200, seed=1)
        reg = RegularizationConfig(0.01, 0.01, 0.0)
        params, _ = train_corrlog(ds, TrainConfig(reg=reg, max_iters=3000, rel_tol=1e-10))
        assert params.alpha_at(0, 1) > 0.1

    def test_deterministic_bit_identical(self):
        rng = np.random.default_rng(12)
        ds = random_dataset(rng, 25, 3, 4)
        config = TrainConfig(reg=RegularizationConfig(0.01, 0.01, 1.0), max_iters=500)
        a, _ = train_corrlog(ds, config)
        b, _ = train_corrlog(ds, config)
        assert np.array_equal(a.beta, b.beta)
        assert a.alpha == b.alpha

    def test_nonfinite_data_rejected_with_instance_index(self):
        good = Instance(np.array([0.1, 0.2]), np.array([1, -1]))
        bad = Instance(np.array([np.nan, 0.0]), np.array([1, 1]))
        ds = MultilabelDataset([good, bad], 2, 2, ("a", "b"))
        with pytest.raises(NumericError, match="instance 1"):
            train_corrlog(ds, TrainConfig())

    def test_requires_positive_lambdas(self):
        ds = balanced_coin_dataset(2, 2, seed=3)
        with pytest.raises(DataError):
            train_corrlog(ds, TrainConfig(reg=RegularizationConfig(0.0, 0.1, 1.0)))
        with pytest.raises(DataError):
            train_corrlog(ds, TrainConfig(reg=RegularizationConfig(0.1, 0.0, 1.0)))

    def test_fixed_point_conditions_at_convergence(self):
        rng = np.random.default_rng(14)
        ds = random_dataset(rng, 30, 3, 3)
        reg = RegularizationConfig(0.02, 0.02, 1.0)
        rel_tol = 1e-13
        params, trace = train_corrlog(
            ds, TrainConfig(reg=reg, max_iters=20000, rel_tol=rel_tol)
        )
        residual = subgradient_residual(params, ds, reg)
        # residual scale from strong convexity: L * sqrt(f_final / (min_lambda * rel_tol))
        from corrlog.optimizer import lipschitz_bound

        f_final = trace.objectives()[-1]
        scale = lipschitz_bound(ds, reg) * np.sqrt(
            max(1.0, f_final) / (min(reg.lambda1, reg.lambda2) * rel_tol)
        )
        assert residual < 10 * rel_tol * scale


class TestTrainIlrs:
    def test_alpha_stays_empty(self):
        rng = np.random.default_rng(15)
        ds = random_dataset(rng, 20, 3, 3)
        params = train_ilrs(ds, TrainConfig(reg=RegularizationConfig(0.01, 0.01, 1.0)))
        assert params.alpha == {}

    def test_separable_single_label_high_accuracy(self):
        rng = np.random.default_rng(16)
        instances = []
        for _ in range(100):
            x = rng.normal(size=2)
            x /= max(1.0, np.linalg.norm(x))
            label = 1 if x[0] + 0.5 * x[1] >= 0 else -1
            instances.append(Instance(x, np.array([label])))
        ds = MultilabelDataset(instances, 2, 1, ("a",))
        params = train_ilrs(
            ds, TrainConfig(reg=RegularizationConfig(1e-4, 1e-4, 0.0), max_iters=5000)
        )
        preds = np.sign(ds.feature_matrix @ params.beta[0])
        preds[preds == 0] = 1
        accuracy = np.mean(preds == ds.label_matrix[:, 0])
        assert accuracy >= 0.99

    def test_matches_corrlog_when_alpha_path_off(self):
        # on a single-label problem there is no alpha path at all
        rng = np.random.default_rng(17)
        instances = [
            Instance(rng.normal(size=2), np.array([int(rng.choice([-1, 1]))]))
            for _ in range(30)
        ]
        ds = MultilabelDataset(instances, 2, 1, ("a",))
        config = TrainConfig(reg=RegularizationConfig(0.05, 0.05, 1.0))
        ilrs = train_ilrs(ds, config)
        corr, _ = train_corrlog(ds, config)
        assert np.array_equal(ilrs.beta, corr.beta)


class TestSparsityMonotonicity:
    def test_nnz_alpha_decreases_with_epsilon(self):
        # statistical property on a fixed seed: stronger l1 weight cannot
        # produce a denser interaction graph
        from conftest import random_params
        from corrlog.data import sample_from_model

        rng = np.random.default_rng(99)
        truth = random_params(rng, 6, 4, alpha_scale=0.6, density=0.3)
        ds = sample_from_model(truth, n=250, seed=7)
        nnz = {}
        for eps in (0.0, 0.1, 1.0):
            reg = RegularizationConfig(0.02, 0.02, eps)
            params, _ = train_corrlog(ds, TrainConfig(reg=reg, max_iters=4000, rel_tol=1e-9))
            nnz[eps] = sum(1 for v in params.alpha.values() if abs(v) > 1e-8)
        assert nnz[1.0] <= nnz[0.1] <= nnz[0.0]
        assert nnz[0.0] == 15  # all pairs active without any l1 shrinkage
