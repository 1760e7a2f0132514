import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fastrpb.kernels import VARIANTS, FeatureMapSpec, feature_map

from _oracles import phi_dpfp, phi_elu1, phi_performer, phi_relu, phi_sikf


def test_elu1_closed_form():
    out = feature_map(FeatureMapSpec("elu1", 3), [[0.0, 1.0, -1.0]])
    np.testing.assert_allclose(out, [[1.0, 2.0, math.exp(-1.0)]], rtol=1e-15)


def test_elu1_large_inputs_do_not_overflow():
    out = feature_map(FeatureMapSpec("elu1", 2), [[1e4, -1e4]])
    np.testing.assert_array_equal(out, [[1e4 + 1, 0.0]])


def test_relu():
    np.testing.assert_array_equal(feature_map(FeatureMapSpec("relu", 3), [[-1.0, 0.0, 2.5]]), [[0, 0, 2.5]])


def test_sikf_at_zero():
    np.testing.assert_array_equal(feature_map(FeatureMapSpec("sikf", 2), [[0.0, 0.0]]), [[1.0, 1.0]])


def test_dpfp_minimal():
    # r = relu(1, -1) = (1, 0); products r1*r2 and r2*r1
    np.testing.assert_array_equal(feature_map(FeatureMapSpec("dpfp", 1, nu=1), [[1.0]]), [[0.0, 0.0]])


@pytest.mark.parametrize("d,nu", [(2, 1), (3, 2), (4, 7)])
def test_dpfp_matches_definition(rng, d, nu):
    X = rng.standard_normal((5, d))
    out = feature_map(FeatureMapSpec("dpfp", d, nu=nu), X)
    expected = np.stack([phi_dpfp(x, nu) for x in X])
    np.testing.assert_array_equal(out, expected)


@pytest.mark.parametrize("nu", [0, 4])
def test_dpfp_nu_out_of_range(nu):
    with pytest.raises(ValueError, match="nu"):
        FeatureMapSpec("dpfp", 2, nu=nu)


def test_performer_at_origin():
    out = feature_map(FeatureMapSpec("performer", 2, num_features=4, seed=7), np.zeros((1, 2)))
    np.testing.assert_allclose(out, np.full((1, 8), 1 / (2 * math.sqrt(2))), rtol=1e-15)


def test_performer_matches_definition(rng):
    spec = FeatureMapSpec("performer", 4, num_features=6, seed=3)
    X = rng.standard_normal((5, 4))
    expected = np.stack([phi_performer(x, spec.projection) for x in X])
    np.testing.assert_allclose(feature_map(spec, X), expected, rtol=1e-13)


def test_performer_projection_is_standard_normal_from_seed():
    spec = FeatureMapSpec("performer", 3, num_features=5, seed=11)
    np.testing.assert_array_equal(spec.projection, np.random.default_rng(11).standard_normal((5, 3)))
    assert not spec.projection.flags.writeable


def test_performer_determinism(rng):
    X = rng.standard_normal((3, 4))
    a = feature_map(FeatureMapSpec("performer", 4, num_features=8, seed=5), X)
    b = feature_map(FeatureMapSpec("performer", 4, num_features=8, seed=5), X)
    c = feature_map(FeatureMapSpec("performer", 4, num_features=8, seed=6), X)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_performer_estimator_concentrates_as_features_grow():
    q = np.array([0.3, -0.2, 0.1, 0.25])
    k = np.array([-0.1, 0.35, 0.2, -0.05])
    target = math.exp(q @ k)

    def ratios(r):
        out = []
        for seed in range(300):
            spec = FeatureMapSpec("performer", 4, num_features=r, seed=seed)
            phi = feature_map(spec, np.stack([q, k]))
            out.append(phi[0] @ phi[1] / target)
        return np.array(out)

    small, large = ratios(16), ratios(256)
    assert large.std() < small.std()
    # E[phi(q).phi(k)] = exp(q.k) with the squared-norm prefactor
    assert abs(large.mean() - 1.0) < 0.02


def test_unknown_variant():
    with pytest.raises(ValueError, match="unknown kernel"):
        FeatureMapSpec("cosine", 2)


def test_column_mismatch():
    with pytest.raises(ValueError, match="columns"):
        feature_map(FeatureMapSpec("relu", 3), np.zeros((2, 4)))


@pytest.mark.parametrize(
    "variant,ref", [("elu1", phi_elu1), ("relu", phi_relu), ("sikf", phi_sikf)]
)
def test_elementwise_maps_match_reference(rng, variant, ref):
    X = 2 * rng.standard_normal((6, 5))
    np.testing.assert_allclose(feature_map(FeatureMapSpec(variant, 5), X), np.stack([ref(x) for x in X]), rtol=1e-15)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("d", [1, 3, 8])
def test_output_shape(rng, variant, d):
    spec = FeatureMapSpec(variant, d, nu=min(3, 2 * d - 1), num_features=5)
    out = feature_map(spec, rng.standard_normal((4, d)))
    expected = {"dpfp": 2 * d * min(3, 2 * d - 1), "performer": 10}.get(variant, d)
    assert out.shape == (4, expected) == (4, spec.output_dim)


@settings(max_examples=60, deadline=None)
@given(X=arrays(np.float64, (4, 3), elements=st.floats(-30, 30)), variant=st.sampled_from(VARIANTS))
def test_nonnegativity(X, variant):
    phi = feature_map(FeatureMapSpec(variant, 3, nu=2, num_features=8, seed=1), X)
    assert np.all(phi >= 0)
    if variant == "elu1":
        assert np.all(phi > 0)


@settings(max_examples=60, deadline=None)
@given(X=arrays(np.float64, (3, 4), elements=st.floats(-10, 10)), c=st.floats(-10, 10))
def test_sikf_multiplicativity(X, c):
    spec = FeatureMapSpec("sikf", 4)
    lhs = feature_map(spec, X + c)
    rhs = math.exp(c) * feature_map(spec, X)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)
