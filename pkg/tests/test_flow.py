import math

import numpy as np
import pytest

from riccilab import (FlowCaps, MetricState, SolitonSpec, catalog_lookup,
                      closed_form_flow, closed_form_trajectory, curvature,
                      flow_rhs, integrate_flow, measure_evolution_check)
from riccilab.errors import (InsufficientSamplesError, InvalidStateError,
                             SingularTimeError)

from _oracles import nil_exact_coeffs, sol_exact_coeffs, su2_exact_coeffs


def test_flow_rhs_examples(models, unit_state):
    assert flow_rhs(models["euclidean"], MetricState((2.0, 3.0, 4.0))) == (0.0, 0.0, 0.0)
    np.testing.assert_allclose(flow_rhs(models["nil"], unit_state), (-1.0, 1.0, 1.0),
                               atol=1e-14)
    # Einstein: Ric = -2 g at unit scale, so dc/dt = +4 for every coefficient
    np.testing.assert_allclose(flow_rhs(models["hyperbolic"], unit_state),
                               (4.0, 4.0, 4.0), atol=1e-14)


def test_euclidean_flow_is_constant(models):
    traj = integrate_flow(models["euclidean"], MetricState((1.0, 2.0, 3.0)), 10.0,
                          tol=1e-10)
    assert traj.termination_reason == "reached_t_end"
    for state in traj.states():
        np.testing.assert_allclose(state.coeffs, (1.0, 2.0, 3.0), rtol=1e-14)


def test_round_sphere_singular_time(models, unit_state):
    traj = integrate_flow(models["round-sphere"], unit_state, 1.0, tol=1e-10)
    assert traj.termination_reason == "curvature_cap"
    assert traj.reports[-1].riemann_norm >= FlowCaps().curvature_cap
    assert traj.singular_time == pytest.approx(0.25, abs=1e-6)


def test_nil_long_run_matches_closed_form(models, unit_state):
    traj = integrate_flow(models["nil"], unit_state, 1e3, tol=1e-10)
    A, B, C = traj.states()[-1].coeffs
    a, b, c = nil_exact_coeffs(1e3)
    assert A == pytest.approx(a, rel=1e-8)
    assert B == pytest.approx(b, rel=1e-8)
    assert C == pytest.approx(c, rel=1e-8)
    # asymptotic exponents fitted over the last decade
    mask = traj.ts >= traj.ts[-1] / 10.0
    lt = np.log(traj.ts[mask])
    slope_A = np.polyfit(lt, traj.log_coeffs[mask, 0], 1)[0]
    slope_B = np.polyfit(lt, traj.log_coeffs[mask, 1], 1)[0]
    assert slope_A == pytest.approx(-1.0 / 3.0, abs=0.02)
    assert slope_B == pytest.approx(1.0 / 3.0, abs=0.02)


def test_su2_flow_and_cap_invariant(models, unit_state):
    traj = integrate_flow(models["su2"], unit_state, 2.0, tol=1e-10,
                          caps=FlowCaps(curvature_cap=1e6))
    assert traj.termination_reason == "curvature_cap"
    assert traj.reports[-1].riemann_norm >= 1e6
    assert traj.singular_time == pytest.approx(1.0, abs=1e-6)
    # dense evaluation between samples is cubic-Hermite accurate, not tol-accurate
    mid = traj.state_at(0.5)
    np.testing.assert_allclose(mid.coeffs, su2_exact_coeffs(0.5), rtol=1e-6)


def test_coefficient_floor_termination(models, unit_state):
    traj = integrate_flow(models["nil"], unit_state, 5.0, tol=1e-10,
                          caps=FlowCaps(coefficient_floor=0.5))
    assert traj.termination_reason == "coefficient_floor"
    assert min(traj.states()[-1].coeffs) <= 0.5 * (1 + 1e-9)


def test_trajectory_sample_consistency(models, unit_state):
    traj = integrate_flow(models["sol"], unit_state, 1.0, tol=1e-10)
    assert np.all(np.diff(traj.ts) > 0)
    for t, state, rep in traj.samples:
        again = curvature(models["sol"], state)
        assert rep.scalar == pytest.approx(again.scalar, rel=1e-15)
        assert rep.riemann_norm == pytest.approx(again.riemann_norm, rel=1e-15)
    np.testing.assert_allclose(traj.states()[-1].coeffs, sol_exact_coeffs(1.0),
                               rtol=1e-9)


def test_state_at_and_resample(models, unit_state):
    traj = integrate_flow(models["nil"], unit_state, 2.0, tol=1e-10)
    mid = traj.state_at(1.37)
    np.testing.assert_allclose(mid.coeffs, nil_exact_coeffs(1.37), rtol=1e-7)
    grid = np.linspace(0.0, 2.0, 21)
    res = traj.resample(grid)
    np.testing.assert_allclose(res.ts, grid)
    with pytest.raises(InvalidStateError):
        traj.state_at(2.5)


def test_t_eval_records_exact_grid(models, unit_state):
    grid = np.linspace(0.0, 0.5, 101)
    traj = integrate_flow(models["su2"], unit_state, 0.5, tol=1e-10, t_eval=grid)
    np.testing.assert_array_equal(traj.ts, grid)
    np.testing.assert_allclose(traj.states()[-1].coeffs, su2_exact_coeffs(0.5),
                               rtol=1e-10)


def test_space_form_fixed_step_order_at_least_four(models):
    """Convergence order of the flow stepper against the space-form closed form."""
    from riccilab.flow import _dlog_rhs
    from riccilab.stepping import integrate_adaptive

    def rhs(t, y):
        return _dlog_rhs(models["hyperbolic"], MetricState(tuple(np.exp(y)), t))

    exact = math.log(closed_form_trajectory(models["hyperbolic"], 1.0, 2.0).coeffs[0])
    errs = []
    for h in (0.05, 0.025):
        y = np.zeros(3)
        for (_, _, _, t1, y1, _) in integrate_adaptive(rhs, 0.0, y, 2.0,
                                                       rtol=1.0, atol=1.0, h_fixed=h):
            y = y1
        errs.append(abs(y[0] - exact))
    assert math.log2(errs[0] / errs[1]) >= 4.0


def test_adaptive_tolerance_refinement(models, unit_state):
    for name, exact in (("nil", nil_exact_coeffs(2.0)[0]),
                        ("hyperbolic", closed_form_trajectory(
                            catalog_lookup("hyperbolic"), 1.0, 2.0).coeffs[0])):
        errs = []
        for tol in (1e-6, 1e-8, 1e-10):
            traj = integrate_flow(models[name], unit_state, 2.0, tol=tol)
            errs.append(abs(traj.states()[-1].coeffs[0] - exact))
        assert errs[1] < errs[0] and errs[2] < errs[1]
        assert errs[2] < 1e-9 * max(1.0, exact)


def test_closed_form_trajectory_examples(models):
    flat = closed_form_trajectory(models["round-sphere"], 1.0, 0.0)
    assert flat.coeffs == (1.0, 1.0, 1.0)
    hyp = closed_form_trajectory(models["hyperbolic"], 1.0, 2.0)
    assert hyp.coeffs[0] == pytest.approx(9.0, rel=1e-15)
    sph = closed_form_trajectory(models["round-sphere"], 1.0, 0.125)
    assert sph.coeffs[0] == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(SingularTimeError):
        closed_form_trajectory(models["round-sphere"], 1.0, 0.25)
    with pytest.raises(SingularTimeError):
        closed_form_trajectory(models["round-sphere"], 1.0, 0.3)
    with pytest.raises(InvalidStateError):
        closed_form_trajectory(models["nil"], 1.0, 0.1)


def test_closed_form_flow_uses_exact_states(models):
    cf = closed_form_flow(models["hyperbolic"], 1.0, 3.0)
    st = cf.state_at(1.2345)
    assert st.coeffs[0] == pytest.approx(1.0 + 4 * 1.2345, rel=1e-15)
    cf = closed_form_flow(models["round-sphere"], 1.0, 0.2499)
    assert cf.singular_time == pytest.approx(0.25, rel=1e-15)
    assert cf.curvature_at(0.2).riemann_norm == pytest.approx(2 * math.sqrt(3) / 0.2,
                                                              rel=1e-12)


def test_measure_evolution_residuals(models, unit_state):
    traj = integrate_flow(models["euclidean"], MetricState((1.0, 2.0, 3.0)), 1.0,
                          tol=1e-10, t_eval=np.linspace(0, 1, 101))
    _, res = measure_evolution_check(traj)
    assert res.max() <= 1e-12   # constant solution, pure rounding noise

    traj = integrate_flow(models["su2"], unit_state, 0.5, tol=1e-10,
                          t_eval=np.linspace(0, 0.5, 501))
    _, res = measure_evolution_check(traj)
    assert res.max() <= 1e-5

    traj = integrate_flow(models["sol"], unit_state, 1.0, tol=1e-10,
                          t_eval=np.linspace(0, 1.0, 2001))
    _, res = measure_evolution_check(traj)
    assert res.max() <= 1e-5


@pytest.mark.parametrize("name,coeffs", [("su2", (1.0, 1.0, 1.0)),
                                         ("sl2", (1.0, 2.0, 3.0)),
                                         ("e2tilde", (2.0, 1.0, 1.0))])
def test_measure_residual_refines_at_fd_rate(models, name, coeffs):
    maxes = []
    for n in (251, 501):
        traj = integrate_flow(models[name], MetricState(coeffs), 0.5, tol=1e-11,
                              t_eval=np.linspace(0, 0.5, n))
        _, res = measure_evolution_check(traj)
        maxes.append(res.max())
    assert maxes[0] / maxes[1] >= 3.0   # second-order centered differences


def test_measure_check_needs_three_samples(models, unit_state):
    traj = integrate_flow(models["euclidean"], unit_state, 1.0, tol=1e-8,
                          t_eval=np.array([0.0, 1.0]))
    with pytest.raises(InsufficientSamplesError):
        measure_evolution_check(traj)


def test_soliton_spec_validation():
    SolitonSpec(epsilon=0)
    SolitonSpec(epsilon=-1, time_origin=0.25)
    with pytest.raises(InvalidStateError):
        SolitonSpec(epsilon=2)


def test_flow_argument_validation(models, unit_state):
    with pytest.raises(InvalidStateError):
        integrate_flow(models["nil"], unit_state, -1.0)
    with pytest.raises(InvalidStateError):
        integrate_flow(models["nil"], unit_state, 1.0, tol=0.0)
