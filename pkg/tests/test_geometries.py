import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riccilab import MetricState, catalog_lookup, catalog_names, curvature, scale_metric
from riccilab.errors import InvalidStateError, UnknownGeometryError

from _oracles import koszul_curvature

lam_values = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
coeff_values = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)
triples = st.tuples(coeff_values, coeff_values, coeff_values)
lam_triples = st.tuples(lam_values, lam_values, lam_values)


def test_catalog_contains_required_models():
    names = catalog_names()
    assert len(names) >= 8
    assert catalog_lookup("euclidean").lam == (0.0, 0.0, 0.0)
    assert catalog_lookup("nil").lam == (1.0, 0.0, 0.0)
    sol = catalog_lookup("sol").lam
    assert sol[0] > 0 and sol[1] < 0 and sol[2] == 0
    e2 = catalog_lookup("e2tilde").lam
    assert e2[0] > 0 and e2[1] > 0 and e2[2] == 0
    sl2 = catalog_lookup("sl2").lam
    assert sl2[0] > 0 and sl2[1] > 0 and sl2[2] < 0
    assert catalog_lookup("hyperbolic").kappa == -1.0
    assert catalog_lookup("round-sphere").kappa == 1.0


def test_unknown_geometry_lists_valid_keys():
    with pytest.raises(UnknownGeometryError) as exc:
        catalog_lookup("heisenberg")
    assert "nil" in str(exc.value)
    assert "hyperbolic" in str(exc.value)


def test_catalog_entries_immutable():
    model = catalog_lookup("nil")
    with pytest.raises(dataclasses.FrozenInstanceError):
        model.lam = (2.0, 0.0, 0.0)


def test_nil_is_heisenberg_by_koszul_oracle(unit_state):
    """lambda = (1,0,0) must give the Heisenberg curvature signature."""
    oracle = koszul_curvature((1.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    np.testing.assert_allclose(oracle["ricci_components"], [0.5, -0.5, -0.5], atol=1e-14)
    np.testing.assert_allclose(oracle["sectional"], [-0.75, 0.25, 0.25], atol=1e-14)
    assert oracle["scalar"] == pytest.approx(-0.5, abs=1e-14)
    rep = curvature(catalog_lookup("nil"), unit_state)
    np.testing.assert_allclose(rep.ricci_components, [0.5, -0.5, -0.5], atol=1e-14)
    assert rep.scalar == pytest.approx(-0.5, abs=1e-14)


def test_flat_model_curvature(unit_state):
    rep = curvature(catalog_lookup("euclidean"), MetricState((1.0, 2.0, 3.0)))
    assert rep.ricci_components == (0.0, 0.0, 0.0)
    assert rep.scalar == 0.0
    assert rep.riemann_norm == 0.0


def test_space_form_curvature(unit_state):
    rep = curvature(catalog_lookup("hyperbolic"), unit_state)
    np.testing.assert_allclose(rep.ricci_components, [-2.0, -2.0, -2.0])
    assert rep.scalar == pytest.approx(-6.0)
    assert rep.riemann_norm == pytest.approx(2.0 * math.sqrt(3.0))
    rep = curvature(catalog_lookup("round-sphere"), MetricState((4.0, 4.0, 4.0)))
    assert rep.scalar == pytest.approx(6.0 / 4.0)
    np.testing.assert_allclose(rep.sectional, [0.25, 0.25, 0.25])


@settings(max_examples=50, deadline=None)
@given(lam=lam_triples, coeffs=triples)
def test_curvature_matches_koszul_oracle(lam, coeffs):
    model = dataclasses.replace(catalog_lookup("su2"), lam=lam)
    rep = curvature(model, MetricState(coeffs))
    oracle = koszul_curvature(lam, coeffs)
    assert oracle["ricci_offdiag"] < 1e-12
    np.testing.assert_allclose(rep.ricci_components, oracle["ricci_components"],
                               rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(rep.sectional, oracle["sectional"], rtol=1e-10, atol=1e-12)
    assert rep.scalar == pytest.approx(oracle["scalar"], rel=1e-10, abs=1e-12)
    assert rep.riemann_norm == pytest.approx(oracle["riemann_norm"], rel=1e-10, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(coeffs=triples)
def test_trace_and_sectional_sum_identities(coeffs):
    for name in ("su2", "nil", "sol", "e2tilde", "sl2"):
        model = catalog_lookup(name)
        rep = curvature(model, MetricState(coeffs))
        trace = sum(rc / c for rc, c in zip(rep.ricci_components, coeffs))
        assert trace == pytest.approx(rep.scalar, rel=1e-12, abs=1e-12)
        assert 2.0 * sum(rep.sectional) == pytest.approx(rep.scalar, rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(coeffs=triples, c=st.floats(min_value=0.1, max_value=10.0))
def test_curvature_scaling_law(coeffs, c):
    for name in ("nil", "sol", "sl2", "hyperbolic"):
        model = catalog_lookup(name)
        state = MetricState(coeffs if name != "hyperbolic" else (coeffs[0],) * 3)
        rep = curvature(model, state)
        rep_scaled = curvature(model, scale_metric(state, c))
        assert rep_scaled.scalar * c == pytest.approx(rep.scalar, rel=1e-10, abs=1e-12)
        assert rep_scaled.riemann_norm * c == pytest.approx(rep.riemann_norm,
                                                            rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(lam=lam_triples, coeffs=triples)
def test_cyclic_permutation_equivariance(lam, coeffs):
    base = dataclasses.replace(catalog_lookup("su2"), lam=lam)
    rep = curvature(base, MetricState(coeffs))
    perm = (1, 2, 0)
    lam_p = tuple(lam[i] for i in perm)
    coeffs_p = tuple(coeffs[i] for i in perm)
    rep_p = curvature(dataclasses.replace(base, lam=lam_p), MetricState(coeffs_p))
    expected = tuple(rep.ricci_components[i] for i in perm)
    np.testing.assert_allclose(rep_p.ricci_components, expected, rtol=1e-12, atol=1e-12)


def test_riemann_norm_zero_iff_flat(unit_state):
    rep = curvature(catalog_lookup("e2tilde"), unit_state)   # A=B makes it flat
    assert rep.riemann_norm == 0.0
    assert max(abs(k) for k in rep.sectional) < 1e-12
    rep = curvature(catalog_lookup("e2tilde"), MetricState((2.0, 1.0, 1.0)))
    assert rep.riemann_norm > 0
    assert max(abs(k) for k in rep.sectional) > 0


def test_scale_metric_examples(unit_state):
    scaled = scale_metric(unit_state, 4.0)
    assert scaled.coeffs == (4.0, 4.0, 4.0)
    assert scaled.time == unit_state.time
    assert scale_metric(unit_state, 1.0).coeffs == unit_state.coeffs
    with pytest.raises(InvalidStateError):
        scale_metric(unit_state, 0.0)
    with pytest.raises(InvalidStateError):
        scale_metric(unit_state, -2.0)


def test_metric_state_validation():
    with pytest.raises(InvalidStateError):
        MetricState((1.0, 0.0, 1.0))
    with pytest.raises(InvalidStateError):
        MetricState((1.0, 1.0, float("inf")))
