import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairnet.network import (
    ActivationConfig,
    PairNetParams,
    decompose,
    design_matrix,
    feature_vector,
    forward,
    fusion_weights,
    pair_activations,
    predict_batch,
)

from oracles import exact_fusion_sum


def unit_cfg(n, alphas=None):
    alphas = np.full(n, 1.0 / n) if alphas is None else np.asarray(alphas, float)
    return ActivationConfig(alphas, np.zeros(n), np.ones(n))


def literal_forward(x, cfg, params):
    """Scalar re-implementation through the individual-decision path.

    Materializes the two one-sided decisions per pattern (slope 1 downward,
    slope 1 + gamma upward) and averages them, instead of using the fused
    c + theta*gamma form.
    """
    n = cfg.n
    g = []
    for i in range(n):
        v = (x[i] - cfg.lo[i]) / (cfg.hi[i] - cfg.lo[i])
        g.append(min(max(v, 0.0), 1.0))
    total = 0.0
    for pattern in range(2**n):
        w = 0.0
        for i in range(n):
            flipped = (pattern >> (n - 1 - i)) & 1
            w += cfg.alphas[i] * ((1.0 - g[i]) if flipped else g[i])
        eta = 1.0
        delta = 1.0 + params.gamma[pattern]
        y_low = params.c[pattern] + (w - 1.0) * eta
        y_high = params.c[pattern] + (1.0 - w) * delta
        ybar = 0.5 * (y_low + y_high)
        total += (w / 2 ** (n - 1)) * ybar
    return total


class TestPairActivations:
    def test_endpoints(self):
        cfg = ActivationConfig(np.array([1.0]), np.array([2.0]), np.array([6.0]))
        g, gbar = pair_activations(np.array([2.0]), cfg)
        assert g[0] == 0.0 and gbar[0] == 1.0
        g, _ = pair_activations(np.array([6.0]), cfg)
        assert g[0] == 1.0

    def test_midpoint(self):
        cfg = ActivationConfig(np.array([1.0]), np.array([2.0]), np.array([6.0]))
        g, gbar = pair_activations(np.array([4.0]), cfg)
        assert g[0] == 0.5 and gbar[0] == 0.5

    def test_out_of_range_clamped(self):
        cfg = unit_cfg(2)
        g, _ = pair_activations(np.array([-3.0, 1.5]), cfg)
        np.testing.assert_array_equal(g, [0.0, 1.0])

    def test_complement_identity_exact(self):
        cfg = unit_cfg(3)
        rng = np.random.default_rng(0)
        for _ in range(50):
            g, gbar = pair_activations(rng.uniform(-1, 2, size=3), cfg)
            np.testing.assert_array_equal(gbar, 1.0 - g)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            pair_activations(np.array([np.nan]), unit_cfg(1))


class TestFusionWeights:
    def test_single_input(self):
        w = fusion_weights(np.array([0.7]), np.array([0.3]), np.array([1.0]))
        np.testing.assert_allclose(w, [0.7, 0.3], atol=0)

    def test_two_input_corner(self):
        g = np.array([1.0, 1.0])
        w = fusion_weights(g, 1.0 - g, np.array([0.5, 0.5]))
        np.testing.assert_allclose(w, [1.0, 0.5, 0.5, 0.0], atol=0)
        assert w.sum() == 2.0

    def test_sum_matches_exact_enumeration(self):
        rng = np.random.default_rng(5)
        alphas = np.full(3, 1.0 / 3.0)
        for _ in range(25):
            g = rng.uniform(size=3)
            w = fusion_weights(g, 1.0 - g, alphas)
            exact = float(exact_fusion_sum(g, alphas))
            assert abs(w.sum() - exact) <= 1e-12
            assert abs(w.sum() - 4.0) <= 1e-12

    def test_bit_flip_complementarity(self):
        rng = np.random.default_rng(9)
        n = 3
        alphas = np.array([0.2, 0.5, 0.3])
        g = rng.uniform(size=n)
        w = fusion_weights(g, 1.0 - g, alphas)
        for axis in range(n):
            swapped_g = g.copy()
            swapped_g[axis] = 1.0 - g[axis]
            w_swapped = fusion_weights(swapped_g, 1.0 - swapped_g, alphas)
            flip = np.arange(2**n) ^ (1 << (n - 1 - axis))
            np.testing.assert_array_equal(w_swapped, w[flip])


class TestFeatureVector:
    def test_hand_case_single_input(self):
        w = fusion_weights(np.array([0.5]), np.array([0.5]), np.array([1.0]))
        np.testing.assert_allclose(feature_vector(w), [0.5, 0.5, 0.125, 0.125], atol=0)

    def test_blend_normalization(self):
        rng = np.random.default_rng(2)
        for n in (1, 2, 3, 4):
            cfg = unit_cfg(n)
            g, gbar = pair_activations(rng.uniform(size=n), cfg)
            phi = feature_vector(fusion_weights(g, gbar, cfg.alphas))
            assert abs(phi[: 2**n].sum() - 1.0) <= 1e-10

    def test_inner_product_equals_forward(self):
        rng = np.random.default_rng(3)
        cfg = unit_cfg(2)
        for _ in range(30):
            params = PairNetParams(rng.normal(size=4), rng.normal(size=4))
            x = rng.uniform(size=2)
            trace = forward(x, cfg, params)
            phi = feature_vector(trace.w)
            stacked = np.concatenate([params.c, params.gamma])
            assert abs(phi @ stacked - trace.f) <= 1e-12


class TestForward:
    def test_constant_when_gamma_zero(self):
        cfg = unit_cfg(3)
        params = PairNetParams(np.full(8, 4.25), np.zeros(8))
        rng = np.random.default_rng(4)
        for _ in range(20):
            trace = forward(rng.uniform(-1, 2, size=3), cfg, params)
            assert abs(trace.f - 4.25) <= 1e-12

    def test_equal_weight_average(self):
        cfg = unit_cfg(1)
        params = PairNetParams(np.array([1.0, 3.0]), np.zeros(2))
        trace = forward(np.array([0.5]), cfg, params)
        assert trace.f == 2.0

    def test_matches_literal_two_sided_path(self):
        rng = np.random.default_rng(6)
        cfg = unit_cfg(3)
        for _ in range(100):
            params = PairNetParams(rng.normal(size=8), rng.normal(size=8))
            x = rng.uniform(size=3)
            trace = forward(x, cfg, params)
            assert abs(trace.f - literal_forward(x, cfg, params)) <= 1e-12

    def test_trace_invariants(self):
        rng = np.random.default_rng(7)
        for n in range(1, 7):
            cfg = unit_cfg(n)
            params = PairNetParams(rng.normal(size=2**n), rng.normal(size=2**n))
            for _ in range(25):
                trace = forward(rng.uniform(-0.5, 1.5, size=n), cfg, params)
                assert abs(trace.w.sum() - 2 ** (n - 1)) <= 1e-10
                assert abs(trace.beta.sum() - 1.0) <= 1e-10
                assert (trace.w >= 0).all() and (trace.w <= 1).all()
                assert (trace.theta >= 0).all() and (trace.theta <= 0.5).all()
                np.testing.assert_array_equal(trace.gbar, 1.0 - trace.g)

    def test_affine_in_parameters(self):
        rng = np.random.default_rng(8)
        cfg = unit_cfg(2)
        zero = PairNetParams.zeros(2)
        for _ in range(30):
            p1 = PairNetParams(rng.normal(size=4), rng.normal(size=4))
            p2 = PairNetParams(rng.normal(size=4), rng.normal(size=4))
            total = PairNetParams(p1.c + p2.c, p1.gamma + p2.gamma)
            x = rng.uniform(size=2)
            assert forward(x, cfg, zero).f == 0.0
            lhs = forward(x, cfg, total).f
            rhs = forward(x, cfg, p1).f + forward(x, cfg, p2).f
            assert abs(lhs - rhs) <= 1e-12

    def test_bit_flip_leaves_prediction_unchanged(self):
        # relabeling patterns alongside a g <-> gbar swap is a pure renaming
        rng = np.random.default_rng(10)
        n = 3
        alphas = np.full(n, 1.0 / n)
        cfg = ActivationConfig(alphas, np.zeros(n), np.ones(n))
        params = PairNetParams(rng.normal(size=8), rng.normal(size=8))
        x = rng.uniform(size=n)
        axis = 1
        flip = np.arange(2**n) ^ (1 << (n - 1 - axis))
        mirrored = ActivationConfig(alphas, np.zeros(n), np.ones(n))
        x_mirrored = x.copy()
        x_mirrored[axis] = 1.0 - x[axis]
        permuted = PairNetParams(params.c[flip], params.gamma[flip])
        original = forward(x, cfg, params).f
        relabeled = forward(x_mirrored, mirrored, permuted).f
        assert abs(original - relabeled) <= 1e-12


class TestDecompose:
    def test_zero_gamma(self):
        cfg = unit_cfg(2)
        params = PairNetParams(np.array([1.0, 2.0, 3.0, 4.0]), np.zeros(4))
        trace = forward(np.array([0.3, 0.8]), cfg, params)
        linear, nonlinear = decompose(trace, params)
        assert nonlinear == 0.0
        assert abs(linear - trace.f) <= 1e-12

    def test_zero_levels(self):
        cfg = unit_cfg(2)
        params = PairNetParams(np.zeros(4), np.array([1.0, -2.0, 0.5, 3.0]))
        trace = forward(np.array([0.3, 0.8]), cfg, params)
        linear, _ = decompose(trace, params)
        assert linear == 0.0

    def test_parts_sum_to_prediction(self):
        rng = np.random.default_rng(12)
        cfg = unit_cfg(3)
        for _ in range(50):
            params = PairNetParams(rng.normal(size=8), rng.normal(size=8))
            trace = forward(rng.uniform(size=3), cfg, params)
            linear, nonlinear = decompose(trace, params)
            assert abs(linear + nonlinear - trace.f) <= 1e-12


class TestBatchPaths:
    def test_design_matrix_matches_single_features(self):
        rng = np.random.default_rng(13)
        cfg = unit_cfg(3)
        X = rng.uniform(-0.2, 1.2, size=(64, 3))
        batch = design_matrix(X, cfg)
        for row, x in zip(batch, X):
            g, gbar = pair_activations(x, cfg)
            phi = feature_vector(fusion_weights(g, gbar, cfg.alphas))
            assert np.abs(row - phi).max() <= 1e-14

    def test_predict_batch_matches_forward(self):
        rng = np.random.default_rng(14)
        cfg = unit_cfg(2)
        params = PairNetParams(rng.normal(size=4), rng.normal(size=4))
        X = rng.uniform(size=(32, 2))
        values = predict_batch(X, cfg, params)
        for value, x in zip(values, X):
            assert abs(value - forward(x, cfg, params).f) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=1, max_value=6).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(
                st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
                min_size=n,
                max_size=n,
            ),
            st.lists(
                st.floats(min_value=0.01, max_value=1.0, allow_nan=False),
                min_size=n,
                max_size=n,
            ),
        )
    )
)
def test_fusion_invariants_property(case):
    n, g_list, raw_alpha = case
    g = np.array(g_list)
    alphas = np.array(raw_alpha)
    alphas = alphas / alphas.sum()
    w = fusion_weights(g, 1.0 - g, alphas)
    assert abs(w.sum() - 2 ** (n - 1)) <= 1e-10
    assert (w >= -1e-15).all() and (w <= 1 + 1e-15).all()
    phi = feature_vector(w)
    assert abs(phi[: 2**n].sum() - 1.0) <= 1e-10


class TestValidation:
    def test_alpha_sum_enforced(self):
        with pytest.raises(ValueError):
            ActivationConfig(np.array([0.6, 0.6]), np.zeros(2), np.ones(2))

    def test_bounds_strict(self):
        with pytest.raises(ValueError):
            ActivationConfig(np.array([1.0]), np.array([1.0]), np.array([1.0]))

    def test_too_many_inputs(self):
        n = 8
        with pytest.raises(ValueError):
            ActivationConfig(np.full(n, 1 / n), np.zeros(n), np.ones(n))

    def test_params_power_of_two(self):
        with pytest.raises(ValueError):
            PairNetParams(np.zeros(3), np.zeros(3))

    def test_params_finite(self):
        with pytest.raises(ValueError):
            PairNetParams(np.array([np.inf, 0.0]), np.zeros(2))

    def test_forward_shape_mismatch(self):
        with pytest.raises(ValueError):
            forward(np.zeros(2), unit_cfg(2), PairNetParams.zeros(3))
