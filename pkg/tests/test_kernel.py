import numpy as np
import pytest

from ca_reservoir.automata import Elementary, characteristic_matrix
from ca_reservoir.bitcore import (
    BitVector,
    Permutation,
    bv_hamming,
    bv_random,
    gf2_matmul,
    gf2_matpow,
)
from ca_reservoir.errors import ParameterError, StateError, UnsupportedRuleError
from ca_reservoir.kernel import (
    MODE_DISTANCE,
    MODE_DOT,
    KernelModel,
    build_MK,
    build_model,
    distance_features,
    dot_features,
    fit_metric,
    kernel_classify,
    kernel_matrix,
    kernel_value,
    linear_predict,
    precompute_Q,
    psd_jitter,
    true_feature_metric,
)
from ca_reservoir.reservoir import ReservoirConfig, expand_feedforward

from conftest import make_rng


def identity_cfg(rule_number, n, r_count, iters, include_raw=False):
    perms = tuple(Permutation.identity(n) for _ in range(r_count))
    return ReservoirConfig(
        rule=Elementary(rule_number, n), R=r_count, I=iters, master_seed=0,
        include_raw_input=include_raw, explicit_permutations=perms,
    )


def random_cfg(rule_number, n, r_count, iters, seed=0):
    return ReservoirConfig(
        rule=Elementary(rule_number, n), R=r_count, I=iters,
        master_seed=seed, include_raw_input=False,
    )


def brute_force_mk(cfg):
    """M_K from explicitly materialized blocks B = M^i P_r over GF(2)."""
    n = cfg.cells
    m = characteristic_matrix(cfg.rule.rule_number, n)
    mk = np.zeros((n, n), dtype=np.int64)
    for p in cfg.permutations:
        pmat = np.zeros((n, n), dtype=np.uint8)
        pmat[np.arange(n), p.mapping] = 1
        from ca_reservoir.bitcore import Gf2Matrix

        pm = Gf2Matrix.from_array(pmat)
        for i in range(1, cfg.I + 1):
            block = gf2_matmul(gf2_matpow(m, i), pm).to_array().astype(np.int64)
            mk += block.T @ block
    return mk


class TestBuildMK:
    def test_hand_computation_rule90_n4(self):
        cfg = identity_cfg(90, 4, 1, 1)
        mk, s = build_MK(cfg)
        m = characteristic_matrix(90, 4).to_array().astype(np.int64)
        assert np.array_equal(mk, m.T @ m)
        assert np.all(np.diag(mk) == 2)  # each column of M_N holds two ones

    def test_trace_counts_stacked_ones(self):
        cfg = random_cfg(90, 12, 3, 4, seed=2)
        mk, s = build_MK(cfg)
        m = characteristic_matrix(90, 12)
        total_ones = sum(
            int(gf2_matpow(m, i).to_array().sum()) for i in range(1, 5)
        ) * 3
        assert np.trace(mk) == total_ones
        assert abs(s.sum() - np.trace(mk)) < 1e-8

    @pytest.mark.parametrize("rule_number", [90, 150])
    def test_brute_force_recheck_small(self, rule_number):
        for n, r_count, iters, seed in [(8, 2, 3, 1), (16, 4, 4, 2), (11, 3, 2, 3)]:
            cfg = random_cfg(rule_number, n, r_count, iters, seed=seed)
            mk, _ = build_MK(cfg)
            assert np.array_equal(mk, brute_force_mk(cfg))

    def test_symmetric_nonnegative_descending(self):
        cfg = random_cfg(150, 20, 2, 3, seed=4)
        mk, s = build_MK(cfg)
        assert np.array_equal(mk, mk.T)
        assert np.all(mk >= 0)
        assert np.all(s >= 0)
        assert np.all(np.diff(s) <= 1e-12)

    def test_nonlinear_rule_rejected(self):
        with pytest.raises(UnsupportedRuleError):
            build_MK(random_cfg(110, 8, 1, 1))


class TestPairFeatures:
    def test_distance_zero_for_equal(self, rng):
        model = build_model(random_cfg(90, 10, 2, 2), MODE_DISTANCE)
        v = bv_random(10, 0.5, rng)
        assert distance_features(v, v, model) == (0.0, 0.0, 0.0)

    def test_identity_mk_collapses_to_hamming(self, rng):
        n = 12
        model = KernelModel(
            n=n, mk=np.eye(n, dtype=np.int64), s=np.ones(n), mode=MODE_DISTANCE
        )
        a = bv_random(n, 0.5, rng)
        b = bv_random(n, 0.5, rng)
        e1, e2, e3 = distance_features(a, b, model)
        assert e1 == e2 == e3 == bv_hamming(a, b)

    def test_quadratic_form_matches_double_sum(self):
        rng = make_rng(60)
        model = build_model(random_cfg(90, 8, 2, 3, seed=5), MODE_DISTANCE)
        a = bv_random(8, 0.5, rng)
        b = bv_random(8, 0.5, rng)
        d = (a ^ b).to_array().astype(float)
        expected = sum(
            d[i] * model.mk[i, j] * d[j] for i in range(8) for j in range(8)
        )
        assert distance_features(a, b, model)[1] == pytest.approx(expected)

    def test_dot_zero_vector(self, rng):
        model = build_model(random_cfg(90, 9, 2, 2, seed=6), MODE_DOT)
        a = bv_random(9, 0.5, rng)
        assert dot_features(a, BitVector.zeros(9), model) == (0.0, 0.0, 0.0)

    def test_unit_spectrum_collapses_f2_to_f1(self, rng):
        n = 10
        model = KernelModel(n=n, mk=np.zeros((n, n), dtype=np.int64), s=np.ones(n), mode=MODE_DOT)
        a = bv_random(n, 0.5, rng)
        b = bv_random(n, 0.5, rng)
        f1, f2, _ = dot_features(a, b, model)
        assert f1 == f2

    def test_dot_bilinear_matches_double_sum(self):
        rng = make_rng(61)
        model = build_model(random_cfg(90, 8, 3, 2, seed=7), MODE_DOT)
        a = bv_random(8, 0.5, rng)
        b = bv_random(8, 0.5, rng)
        av, bv = a.to_array().astype(float), b.to_array().astype(float)
        expected = sum(
            av[i] * model.mk[i, j] * bv[j] for i in range(8) for j in range(8)
        )
        assert dot_features(a, b, model)[2] == pytest.approx(expected)

    def test_swap_symmetry(self):
        rng = make_rng(62)
        model = build_model(random_cfg(150, 14, 2, 3, seed=8), MODE_DISTANCE)
        a = bv_random(14, 0.5, rng)
        b = bv_random(14, 0.5, rng)
        assert distance_features(a, b, model) == distance_features(b, a, model)


class TestTrueMetric:
    def test_equal_inputs(self, rng):
        cfg = random_cfg(90, 16, 4, 4, seed=9)
        v = bv_random(16, 0.4, rng)
        assert true_feature_metric(v, v, cfg, MODE_DISTANCE) == 0.0
        feats = expand_feedforward(v, cfg)
        assert true_feature_metric(v, v, cfg, MODE_DOT) == feats.bits.popcount()

    def test_zero_inputs(self):
        cfg = random_cfg(90, 16, 2, 2, seed=10)
        z = BitVector.zeros(16)
        assert true_feature_metric(z, z, cfg, MODE_DISTANCE) == 0.0
        assert true_feature_metric(z, z, cfg, MODE_DOT) == 0.0

    def test_against_direct_expansion_oracle(self):
        rng = make_rng(63)
        cfg = random_cfg(90, 16, 4, 4, seed=11)
        a = bv_random(16, 0.5, rng)
        b = bv_random(16, 0.5, rng)
        fa = expand_feedforward(a, cfg).bits
        fb = expand_feedforward(b, cfg).bits
        assert true_feature_metric(a, b, cfg, MODE_DISTANCE) == bv_hamming(fa, fb)
        assert true_feature_metric(a, b, cfg, MODE_DOT) == (fa & fb).popcount()

    def test_raw_segment_never_counted(self, rng):
        cfg_raw = ReservoirConfig(rule=Elementary(90, 12), R=2, I=2, master_seed=12)
        a = bv_random(12, 0.5, rng)
        b = bv_random(12, 0.5, rng)
        cfg_noraw = ReservoirConfig(
            rule=Elementary(90, 12), R=2, I=2, master_seed=12, include_raw_input=False
        )
        assert true_feature_metric(a, b, cfg_raw, MODE_DISTANCE) == true_feature_metric(
            a, b, cfg_noraw, MODE_DISTANCE
        )


class TestFitMetric:
    def test_constructed_regression_recovers_e1(self):
        # targets manufactured to equal e1 exactly: coefficients ~ (1, 0, 0)
        rng = make_rng(64)
        model = build_model(random_cfg(90, 24, 3, 2, seed=13), MODE_DISTANCE)
        from ca_reservoir.kernel import _features_for_pairs, _lstsq_no_intercept, _pearson

        vecs = (rng.random((40, 24)) < 0.3).astype(np.uint8)
        iu = np.triu_indices(40, 1)
        design = _features_for_pairs(vecs[iu[0]], vecs[iu[1]], model)
        target = design[:, 0].copy()
        coeffs, _ = _lstsq_no_intercept(design, target)
        pred = design @ coeffs
        assert _pearson(pred, target) >= 0.999
        assert np.allclose(design @ coeffs, target, atol=1e-6)

    def test_small_monte_carlo_fit(self):
        rng = make_rng(65)
        cfg = random_cfg(90, 64, 10, 2, seed=14)
        vecs = (rng.random((30, 64)) < 0.2).astype(np.uint8)
        iu = np.triu_indices(30, 1)
        pairs = [(vecs[i], vecs[j]) for i, j in zip(*iu)]
        model = fit_metric(pairs, cfg, MODE_DISTANCE, split_rng=make_rng(66))
        assert model.coeffs.shape == (3,)
        assert model.diagnostics["train_pearson"] > 0.8
        assert np.isfinite(model.diagnostics["test_pearson"])

    def test_needs_three_pairs(self):
        cfg = random_cfg(90, 8, 1, 1)
        with pytest.raises(ParameterError):
            fit_metric([(BitVector.zeros(8), BitVector.zeros(8))], cfg, MODE_DISTANCE)


class TestKernelOps:
    def _fitted_dot_model(self, n=16, seed=15):
        rng = make_rng(67)
        cfg = random_cfg(90, n, 4, 2, seed=seed)
        vecs = (rng.random((25, n)) < 0.4).astype(np.uint8)
        iu = np.triu_indices(25, 1)
        pairs = [(vecs[i], vecs[j]) for i, j in zip(*iu)]
        return fit_metric(pairs, cfg, MODE_DOT, split_rng=make_rng(68))

    def test_kernel_value_definitional(self, rng):
        model = self._fitted_dot_model()
        x = bv_random(16, 0.5, rng)
        y = bv_random(16, 0.5, rng)
        f = dot_features(x, y, model)
        assert kernel_value(x, y, model) == pytest.approx(float(np.dot(model.coeffs, f)))
        assert kernel_value(x, y, model) == pytest.approx(kernel_value(y, x, model))

    def test_plain_dot_when_coeffs_100(self, rng):
        n = 12
        model = KernelModel(
            n=n, mk=np.zeros((n, n), dtype=np.int64), s=np.zeros(n),
            mode=MODE_DOT, coeffs=np.array([1.0, 0.0, 0.0]),
        )
        x = bv_random(n, 0.5, rng)
        y = bv_random(n, 0.5, rng)
        assert kernel_value(x, y, model) == float((x & y).popcount())

    def test_unfitted_model_rejected(self, rng):
        model = build_model(random_cfg(90, 8, 1, 1, seed=16), MODE_DOT)
        with pytest.raises(StateError):
            kernel_value(bv_random(8, 0.5, rng), bv_random(8, 0.5, rng), model)

    def test_kernel_matrix_single_point_and_symmetry(self, rng):
        model = self._fitted_dot_model()
        x = bv_random(16, 0.5, rng)
        km = kernel_matrix([x], model)
        assert km.shape == (1, 1)
        assert km[0, 0] == pytest.approx(kernel_value(x, x, model))
        data = [bv_random(16, 0.5, rng) for _ in range(6)]
        km = kernel_matrix(data, model)
        assert np.max(np.abs(km - km.T)) < 1e-12

    def test_kernel_matrix_gram_oracle(self, rng):
        n = 10
        model = KernelModel(
            n=n, mk=np.zeros((n, n), dtype=np.int64), s=np.zeros(n),
            mode=MODE_DOT, coeffs=np.array([1.0, 0.0, 0.0]),
        )
        data = [bv_random(n, 0.5, rng) for _ in range(5)]
        km = kernel_matrix(data, model)
        raw = np.stack([d.to_array() for d in data]).astype(float)
        assert np.allclose(km, raw @ raw.T)

    def test_psd_jitter_repairs(self):
        k = np.array([[1.0, 0.0], [0.0, -0.5]])
        repaired, jitter = psd_jitter(k)
        assert jitter > 0
        assert np.linalg.eigvalsh(repaired)[0] >= -1e-12


class TestSummationTrick:
    def test_single_support_plain_coeffs(self):
        n = 8
        model = KernelModel(
            n=n, mk=np.zeros((n, n), dtype=np.int64), s=np.zeros(n),
            mode=MODE_DOT, coeffs=np.array([1.0, 0.0, 0.0]),
        )
        support = BitVector.from_string("10110001")
        q = precompute_Q([support], [1.0], [1.0], model)
        assert np.array_equal(q.q, support.to_array().astype(float))

    def test_exchange_of_summation_is_exact(self):
        rng = make_rng(69)
        model = build_model(random_cfg(90, 12, 3, 2, seed=17), MODE_DOT)
        model.coeffs = np.array([0.7, -0.2, 0.05])
        for _ in range(100):
            d = int(rng.integers(1, 8))
            supports = [(rng.random(12) < 0.5).astype(np.uint8) for _ in range(d)]
            alpha = rng.normal(size=d)
            y = rng.choice([-1.0, 1.0], size=d)
            q = precompute_Q(supports, alpha, y, model)
            x = (rng.random(12) < 0.5).astype(np.uint8)
            direct = sum(
                alpha[i] * y[i] * kernel_value(x, supports[i], model) for i in range(d)
            )
            assert abs(linear_predict(q, x) - direct) < 1e-9

    def test_agreement_at_spec_scale(self):
        rng = make_rng(70)
        model = build_model(random_cfg(90, 64, 4, 3, seed=18), MODE_DOT)
        model.coeffs = np.array([0.5, 0.1, -0.02])
        supports = [(rng.random(64) < 0.3).astype(np.uint8) for _ in range(50)]
        alpha = rng.normal(size=50)
        y = rng.choice([-1.0, 1.0], size=50)
        q = precompute_Q(supports, alpha, y, model)
        x = (rng.random(64) < 0.3).astype(np.uint8)
        direct = sum(alpha[i] * y[i] * kernel_value(x, supports[i], model) for i in range(50))
        assert abs(linear_predict(q, x) - direct) < 1e-9


class TestKernelClassify:
    def _separable_data(self, rng, n=20, per_class=8):
        a = np.zeros((per_class, n), dtype=np.uint8)
        b = np.zeros((per_class, n), dtype=np.uint8)
        a[:, : n // 2] = rng.random((per_class, n // 2)) < 0.9
        b[:, n // 2 :] = rng.random((per_class, n // 2)) < 0.9
        x = np.concatenate([a, b])
        labels = np.array([0] * per_class + [1] * per_class)
        return x, labels

    def test_separable_clusters_raw_kernel(self):
        rng = make_rng(71)
        n = 20
        model = KernelModel(
            n=n, mk=np.zeros((n, n), dtype=np.int64), s=np.zeros(n),
            mode=MODE_DOT, coeffs=np.array([1.0, 0.0, 0.0]),
        )
        x, labels = self._separable_data(rng)
        pred, info = kernel_classify(x, labels, x, model, ridge=1e-3)
        assert np.array_equal(pred, labels)

    def test_training_point_recovers_label(self):
        rng = make_rng(72)
        model = self._fitted_model_for_classify(rng)
        x, labels = self._separable_data(rng, n=16)
        pred, _ = kernel_classify(x, labels, x[:1], model, ridge=1e-3)
        assert pred[0] == labels[0]

    def _fitted_model_for_classify(self, rng):
        cfg = random_cfg(90, 16, 3, 2, seed=19)
        vecs = (rng.random((20, 16)) < 0.4).astype(np.uint8)
        iu = np.triu_indices(20, 1)
        pairs = [(vecs[i], vecs[j]) for i, j in zip(*iu)]
        return fit_metric(pairs, cfg, MODE_DOT, split_rng=None)

    def test_single_class_rejected(self, rng):
        model = self._fitted_model_for_classify(make_rng(73))
        x = (make_rng(74).random((5, 16)) < 0.5).astype(np.uint8)
        with pytest.raises(ParameterError):
            kernel_classify(x, np.zeros(5, dtype=int), x, model)


class TestSerialization:
    def test_roundtrip(self):
        model = build_model(random_cfg(150, 10, 2, 2, seed=20), MODE_DOT)
        model.coeffs = np.array([1.0, 2.0, 3.0])
        again = KernelModel.from_bytes(model.to_bytes())
        assert again.n == model.n
        assert np.array_equal(again.mk, model.mk)
        assert np.allclose(again.s, model.s)
        assert np.allclose(again.coeffs, model.coeffs)
        assert again.mode == model.mode

    def test_unfitted_roundtrip(self):
        model = build_model(random_cfg(90, 6, 1, 1, seed=21), MODE_DISTANCE)
        again = KernelModel.from_bytes(model.to_bytes())
        assert again.coeffs is None
        assert again.mode == MODE_DISTANCE
