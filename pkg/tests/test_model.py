"""Network evaluation, feature vectors, normalization, and hyperplane
geometry."""

import json

import numpy as np
import pytest

from sggn.model import (
    DegenerateNeuronError,
    Domain,
    NetworkParams,
    evaluate,
    feature_vectors,
    features,
    hyperplanes,
    normalize,
)


def single_relu_1d():
    return NetworkParams.from_arrays(0.0, [1.0], [[0.0, 1.0]])


class TestEvaluate:
    def test_identity_ramp_positive(self):
        assert evaluate(single_relu_1d(), [0.7]) == 0.7

    def test_identity_ramp_negative(self):
        assert evaluate(single_relu_1d(), [-0.3]) == 0.0

    def test_two_neuron_composition(self):
        # hand evaluation: 1 + 2*relu(1) - 1*relu(1 - 0.5) = 1 + 2 - 0.5
        params = NetworkParams.from_arrays(1.0, [2.0, -1.0], [[0.0, 1.0], [-0.5, 1.0]])
        assert evaluate(params, [1.0]) == pytest.approx(2.5, abs=1e-15)
        # cross-check against a per-neuron sum oracle
        x = np.array([1.0])
        oracle = params.c0 + sum(
            c * max(0.0, nrn.omega @ x + nrn.b) for c, nrn in zip(params.c, params.neurons)
        )
        assert evaluate(params, x) == pytest.approx(oracle, rel=1e-15)

    def test_batch_matches_pointwise(self):
        rng = np.random.default_rng(0)
        params = NetworkParams.from_arrays(0.2, rng.normal(size=4), rng.normal(size=(4, 4)))
        xs = rng.normal(size=(20, 3))
        batch = evaluate(params, xs)
        for x, v in zip(xs, batch):
            assert evaluate(params, x) == pytest.approx(v, rel=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            evaluate(single_relu_1d(), [0.1, 0.2])


class TestFeatureVectors:
    def test_positive_side(self):
        sig, heav, y = feature_vectors(single_relu_1d(), [0.5])
        np.testing.assert_array_equal(sig, [1.0, 0.5])
        np.testing.assert_array_equal(heav, [1.0])
        np.testing.assert_array_equal(y, [1.0, 0.5])

    def test_negative_side(self):
        sig, heav, y = feature_vectors(single_relu_1d(), [-0.5])
        np.testing.assert_array_equal(sig, [1.0, 0.0])
        np.testing.assert_array_equal(heav, [0.0])
        np.testing.assert_array_equal(y, [1.0, -0.5])

    def test_on_hyperplane_heaviside_is_zero(self):
        # the t = 0 convention: H(0) = 0, keeping discrete sums deterministic
        _, heav, _ = feature_vectors(single_relu_1d(), [0.0])
        assert heav[0] == 0.0

    def test_feature_consistency(self):
        # evaluate(params, x) == sigma_hat(x)^T c_hat, exactly
        rng = np.random.default_rng(1)
        params = NetworkParams.from_arrays(-0.4, rng.normal(size=5), rng.normal(size=(5, 3)))
        for x in rng.normal(size=(30, 2)):
            sig, _, _ = feature_vectors(params, x)
            assert evaluate(params, x) == sig @ params.c_hat


class TestNormalize:
    def test_rescales_and_preserves_value(self):
        params = NetworkParams.from_arrays(0.0, [1.0], [[1.0, 2.0]])
        out = normalize(params)
        assert out.c[0] == 2.0
        assert out.neurons[0].b == 0.5
        assert out.neurons[0].omega[0] == 1.0
        for x in [-1.0, -0.2, 0.0, 0.3, 2.0]:
            assert evaluate(out, [x]) == pytest.approx(evaluate(params, [x]), rel=1e-12)

    def test_normalized_input_unchanged_bitwise(self):
        params = NetworkParams.from_arrays(0.3, [1.5, -2.0], [[0.2, 1.0], [-0.7, -1.0]])
        out = normalize(params)
        assert out is params

    def test_evaluation_drift_bounded(self):
        rng = np.random.default_rng(2)
        params = NetworkParams.from_arrays(
            rng.normal(), rng.normal(size=6), rng.normal(size=(6, 3)) * 3.0
        )
        out = normalize(params)
        xs = rng.normal(size=(100, 2))
        before = evaluate(params, xs)
        after = evaluate(out, xs)
        drift = np.abs(after - before) / np.maximum(np.abs(before), 1e-30)
        assert drift.max() <= 1e-12
        norms = np.linalg.norm(np.stack([n.omega for n in out.neurons]), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_zero_weight_vector_names_index(self):
        params = NetworkParams.from_arrays(0.0, [1.0, 1.0], [[0.1, 1.0], [0.5, 0.0]])
        with pytest.raises(DegenerateNeuronError, match="neuron 1"):
            normalize(params)

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            b, w, s = rng.normal(), rng.normal(size=2), rng.uniform(0.1, 10)
            x = rng.normal(size=2)
            lhs = s * max(0.0, w @ x + b)
            rhs = max(0.0, (s * w) @ x + s * b)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


class TestPiecewiseLinearity:
    def test_affine_along_segment_between_hyperplanes(self):
        rng = np.random.default_rng(4)
        params = NetworkParams.from_arrays(0.1, rng.normal(size=5), rng.normal(size=(5, 3)))
        # a short segment is unlikely to cross a hyperplane; test where the
        # heaviside pattern is constant over the three samples
        checked = 0
        while checked < 10:
            x0 = rng.normal(size=2)
            step = rng.normal(size=2) * 1e-3
            pts = np.array([x0, x0 + step, x0 + 2 * step])
            _, heav, _ = features(params, pts)
            if not (heav[0] == heav[1]).all() or not (heav[1] == heav[2]).all():
                continue
            v = evaluate(params, pts)
            second_diff = abs(v[0] - 2 * v[1] + v[2])
            assert second_diff <= 1e-10 * max(1.0, np.abs(v).max())
            checked += 1


class TestHyperplanes:
    def test_interior_breakpoint(self):
        params = NetworkParams.from_arrays(0.0, [1.0], [[-0.5, 1.0]])
        desc = hyperplanes(params, Domain([0.0], [1.0]))
        assert desc[0].intersects_domain is True

    def test_exterior_breakpoint(self):
        params = NetworkParams.from_arrays(0.0, [1.0], [[-2.0, 1.0]])
        desc = hyperplanes(params, Domain([0.0], [1.0]))
        assert desc[0].intersects_domain is False

    def test_diagonal_line_through_origin(self):
        s = 1.0 / np.sqrt(2.0)
        params = NetworkParams.from_arrays(0.0, [1.0], [[0.0, s, s]])
        desc = hyperplanes(params, Domain([-1.0, -1.0], [1.0, 1.0]))
        assert desc[0].intersects_domain is True


class TestSerialization:
    def test_json_round_trip(self):
        rng = np.random.default_rng(5)
        params = NetworkParams.from_arrays(0.7, rng.normal(size=3), rng.normal(size=(3, 2)))
        doc = json.loads(params.to_json())
        assert list(doc.keys()) == ["d", "n", "c0", "c", "neurons"]
        assert list(doc["neurons"][0].keys()) == ["b", "omega"]
        back = NetworkParams.from_json(params.to_json())
        assert back.c0 == params.c0
        np.testing.assert_array_equal(back.c, params.c)
        np.testing.assert_array_equal(back.hidden_matrix, params.hidden_matrix)

    def test_immutable_arrays(self):
        params = single_relu_1d()
        with pytest.raises(ValueError):
            params.c[0] = 2.0


class TestValidation:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            NetworkParams.from_arrays(np.nan, [1.0], [[0.0, 1.0]])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            NetworkParams(c0=0.0, c=np.zeros(0), neurons=(), d=1)

    def test_domain_ordering(self):
        with pytest.raises(ValueError):
            Domain([1.0], [0.0])
