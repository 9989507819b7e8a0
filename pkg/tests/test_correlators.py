import numpy as np
import pytest

from conftest import heisenberg_correlation, random_density
from nhq.correlators import (
    KIND_LINEAR,
    KIND_NONLINEAR,
    OperatorEvent,
    SIDE_BOTH,
    SIDE_LEFT,
    SIDE_RIGHT,
    InsertionSlot,
    apply_insertion,
    autocorrelate,
    average_series,
    correlate_multitime,
    correlate_two_time,
    correlation_series,
    merge_times,
    relative_difference,
    relative_difference_series,
)
from nhq.errors import SingularTraceError
from nhq.evolution import (
    PropagationConfig,
    StateMatrix,
    expectation,
    propagate_nonlinear,
    split_hamiltonian,
)
from nhq.kernel import IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z
from nhq.tls import TlsScenario, build_model, initial_state, oracle_sample, scenario_state

ED_Z = TlsScenario(model="ed", a2=0.5, init="z", nu=0.0)
CZZ_ED_AT_1 = -0.9476458729745455  # ed a2=0.5, z family, t=1


class TestMergeTimes:
    def test_plain_union(self):
        grid = merge_times([1.0, 3.0], [2.0, 3.0])
        assert grid.tau == (1.0, 2.0, 3.0)

    def test_one_sided(self):
        assert merge_times([], [0.5]).tau == (0.5,)

    def test_merge_within_tolerance(self):
        grid = merge_times([1.0], [1.0 + 1e-13])
        assert grid.tau == (1.0,)

    def test_rejects_unordered(self):
        with pytest.raises(ValueError):
            merge_times([2.0, 1.0], [])

    def test_rejects_times_before_origin(self):
        with pytest.raises(ValueError):
            merge_times([-0.1], [], t0=0.0)


class TestApplyInsertion:
    def test_identity_left(self):
        d = initial_state("z", 0.0)
        out = apply_insertion(InsertionSlot(0.0, left=IDENTITY2), d)
        assert np.allclose(out.matrix, d.matrix)
        assert not out.normalized

    def test_right_product(self):
        d = initial_state("z", 0.0)
        out = apply_insertion(InsertionSlot(0.0, right=SIGMA_X), d)
        assert np.allclose(out.matrix, d.matrix @ SIGMA_X)

    def test_two_sided(self):
        d = StateMatrix(IDENTITY2 / 2, normalized=True)
        out = apply_insertion(
            InsertionSlot(0.0, left=SIGMA_Z, right=SIGMA_Z), d)
        assert np.allclose(out.matrix, IDENTITY2 / 2)

    def test_empty_slot_rejected(self):
        with pytest.raises(ValueError):
            apply_insertion(InsertionSlot(0.0), initial_state("z", 0.0))


class TestTwoTime:
    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_identity_insertion_reduces_to_average(self, kind):
        sc = TlsScenario(model="ed", a2=0.5, gamma_param=0.2, init="z", nu=0.3)
        ham, rho0 = build_model(sc), scenario_state(sc)
        for t1, t2 in ((0.0, 0.8), (0.4, 1.6)):
            value = correlate_two_time(kind, SIGMA_Z, IDENTITY2, t1, t2,
                                       rho0, ham)
            rho_t2 = propagate_nonlinear(rho0, ham, 0.0, t2)
            assert abs(value - expectation(rho_t2, SIGMA_Z)) <= 1e-10

    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_hermitian_limit_matches_heisenberg(self, rng, kind):
        h = -SIGMA_X + 0.4 * SIGMA_Z
        ham = split_hamiltonian(h)
        rho0 = random_density(rng)
        for t1, t2 in ((0.0, 1.0), (0.5, 2.0)):
            mine = correlate_two_time(kind, SIGMA_Y, SIGMA_X, t1, t2,
                                      StateMatrix(rho0), ham)
            ref = heisenberg_correlation(SIGMA_Y, SIGMA_X, t1, t2, h, rho0)
            assert abs(mine - ref) <= 1e-10

    def test_ed_autocorrelation_closed_form(self):
        value = correlate_two_time(KIND_NONLINEAR, SIGMA_Z, SIGMA_Z, 0.0, 1.0,
                                   scenario_state(ED_Z), build_model(ED_Z))
        assert abs(value - CZZ_ED_AT_1) <= 1e-12

    def test_rejects_bad_ordering(self):
        ham = build_model(ED_Z)
        with pytest.raises(ValueError):
            correlate_two_time(KIND_NONLINEAR, SIGMA_Z, SIGMA_Z, 1.0, 0.5,
                               scenario_state(ED_Z), ham)

    def test_rejects_non_unit_trace_initial(self):
        ham = build_model(ED_Z)
        with pytest.raises(ValueError, match="unit-trace"):
            correlate_two_time(KIND_NONLINEAR, SIGMA_Z, SIGMA_Z, 0.0, 1.0,
                               StateMatrix(SIGMA_Z + IDENTITY2), ham)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            correlate_two_time("quadratic", SIGMA_Z, SIGMA_Z, 0.0, 1.0,
                               scenario_state(ED_Z), build_model(ED_Z))

    def test_linear_kind_trace_singularity(self):
        # off-shell pd trace crosses zero at t = 1/delta
        sc = TlsScenario(model="pd", init="z", nu=0.5)
        with pytest.raises(SingularTraceError):
            correlate_two_time(KIND_LINEAR, SIGMA_Z, SIGMA_Z, 0.0, 1.0,
                               scenario_state(sc), build_model(sc))


class TestAutocorrelate:
    def test_t_zero_is_second_moment(self):
        value = autocorrelate(KIND_NONLINEAR, SIGMA_Z, 0.0,
                              initial_state("z", 0.0), build_model(ED_Z))
        assert abs(value - 1.0) <= 1e-14

    def test_pd_zero_crossing(self):
        sc = TlsScenario(model="pd", init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        assert abs(autocorrelate(KIND_NONLINEAR, SIGMA_Z, 0.5, rho0, ham)) <= 1e-12

    def test_pd_value_at_one(self):
        sc = TlsScenario(model="pd", init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        value = autocorrelate(KIND_NONLINEAR, SIGMA_Z, 1.0, rho0, ham)
        assert abs(value - (-1.0)) <= 1e-12


class TestMultiTime:
    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_identity_operators_give_one(self, kind):
        events = [OperatorEvent(IDENTITY2, 0.5, SIDE_LEFT),
                  OperatorEvent(IDENTITY2, 1.0, SIDE_RIGHT)]
        sc = TlsScenario(model="dph", gamma_param=1.0, init="z", nu=0.4)
        value = correlate_multitime(kind, events, scenario_state(sc),
                                    build_model(sc))
        assert abs(value - 1.0) <= 1e-12

    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_single_event_is_average(self, kind):
        sc = TlsScenario(model="ed", a2=0.5, init="z", nu=0.2)
        ham, rho0 = build_model(sc), scenario_state(sc)
        value = correlate_multitime(
            kind, [OperatorEvent(SIGMA_Z, 1.2, SIDE_RIGHT)], rho0, ham)
        ref = expectation(propagate_nonlinear(rho0, ham, 0.0, 1.2), SIGMA_Z)
        assert abs(value - ref) <= 1e-10

    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_two_events_match_two_time(self, kind):
        sc = TlsScenario(model="ed", a2=0.5, init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        events = [OperatorEvent(SIGMA_Z, 0.0, SIDE_LEFT),
                  OperatorEvent(SIGMA_Z, 1.0, SIDE_RIGHT)]
        multi = correlate_multitime(kind, events, rho0, ham)
        two = correlate_two_time(kind, SIGMA_Z, SIGMA_Z, 0.0, 1.0, rho0, ham)
        assert abs(multi - two) <= 1e-10

    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_interior_insertion_times(self, kind):
        sc = TlsScenario(model="dph", gamma_param=1.0, init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        events = [OperatorEvent(SIGMA_Z, 0.4, SIDE_LEFT),
                  OperatorEvent(SIGMA_Y, 1.3, SIDE_RIGHT)]
        multi = correlate_multitime(kind, events, rho0, ham)
        two = correlate_two_time(kind, SIGMA_Y, SIGMA_Z, 0.4, 1.3, rho0, ham)
        assert abs(multi - two) <= 1e-10

    def test_coincident_times_merge_to_two_sided_slot(self):
        sc = TlsScenario(model="ed", a2=0.5, init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        events = [OperatorEvent(SIGMA_Z, 0.7, SIDE_LEFT),
                  OperatorEvent(SIGMA_Z, 0.7 + 1e-13, SIDE_RIGHT)]
        merged = correlate_multitime(KIND_NONLINEAR, events, rho0, ham)
        # same thing through an explicit two-sided event
        both = correlate_multitime(
            KIND_NONLINEAR, [OperatorEvent(SIGMA_Z, 0.7, SIDE_BOTH)],
            rho0, ham)
        assert abs(merged - both) <= 1e-12

    def test_empty_event_list_rejected(self):
        with pytest.raises(ValueError):
            correlate_multitime(KIND_NONLINEAR, [], scenario_state(ED_Z),
                                build_model(ED_Z))


class TestRelativeDifference:
    def test_equal_kinds_vanish(self):
        assert relative_difference(0.3 + 0.1j, 0.3 + 0.1j) == 0.0

    def test_zero_denominator_flags_undefined(self):
        assert relative_difference(1.0, 0.0) is None
        assert relative_difference(1.0, 1e-15) is None

    def test_on_shell_difference_vanishes(self):
        sc = TlsScenario(model="dph", gamma_param=1.0, init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        c = autocorrelate(KIND_NONLINEAR, SIGMA_Z, 1.4, rho0, ham)
        cl = autocorrelate(KIND_LINEAR, SIGMA_Z, 1.4, rho0, ham)
        assert abs(relative_difference(c, cl)) <= 1e-12

    def test_long_time_difference_approaches_nu(self):
        # for the decaying-rate branch the kind ratio tends to 1 - nu
        nu = 0.4
        sc = TlsScenario(model="ed", a2=-1.0, init="z", nu=nu)
        ham, rho0 = build_model(sc), scenario_state(sc)
        c = autocorrelate(KIND_NONLINEAR, SIGMA_Z, 15.0, rho0, ham)
        cl = autocorrelate(KIND_LINEAR, SIGMA_Z, 15.0, rho0, ham)
        assert abs(relative_difference(c, cl) - nu) <= 1e-9

    def test_series_flags(self):
        values, defined = relative_difference_series(
            np.array([1.0, 2.0, 3.0], dtype=complex),
            np.array([1.0, 0.0, 6.0], dtype=complex))
        assert defined.tolist() == [True, False, True]
        assert values[0] == 0.0 and values[2] == 0.5
        assert values[1] == 0.0  # placeholder, flagged undefined


class TestIdentityReductionGrid:
    @pytest.mark.parametrize("model,params", [
        ("ed", {"a2": 1.0}), ("ed", {"a2": 0.5}), ("ed", {"a2": -1.0}),
        ("pd", {}), ("dph", {"gamma_param": 1.0}),
        ("dph", {"gamma_param": -1.0})])
    @pytest.mark.parametrize("kind", [KIND_NONLINEAR, KIND_LINEAR])
    def test_identity_insertion_equals_average(self, model, params, kind):
        sc = TlsScenario(model=model, init="z", nu=0.3, **params)
        ham, rho0 = build_model(sc), scenario_state(sc)
        ts = np.linspace(0.0, 5.0, 50)
        corr, c_ok = correlation_series(kind, IDENTITY2, SIGMA_Z, ts,
                                        rho0, ham)
        avg, a_ok = average_series(ts, rho0, ham, [SIGMA_Z])
        mask = c_ok & a_ok
        assert mask.sum() >= 49
        assert np.max(np.abs(corr[mask] - avg[0][mask])) <= 1e-10


class TestComplexStructure:
    def test_off_shell_nonlinear_kind_is_complex(self):
        # the nonlinear kind picks up an imaginary part off shell while the
        # linear kind stays real (x family, ed model)
        sc = TlsScenario(model="ed", a2=1.0, init="x", nu=0.5)
        ham, rho0 = build_model(sc), scenario_state(sc)
        for t in (0.5, 1.0, 2.0):
            c = autocorrelate(KIND_NONLINEAR, SIGMA_X, t, rho0, ham)
            cl = autocorrelate(KIND_LINEAR, SIGMA_X, t, rho0, ham)
            oracle = oracle_sample(sc, t)
            assert abs(c.imag) > 1e-3
            assert np.sign(c.imag) == np.sign(oracle.c_xx.imag)
            assert abs(cl.imag) <= 1e-12


class TestSeries:
    def test_correlation_series_matches_pointwise(self):
        sc = TlsScenario(model="dph", gamma_param=-1.0, init="z", nu=0.5)
        ham, rho0 = build_model(sc), scenario_state(sc)
        ts = np.array([0.0, 0.3, 0.35, 1.0, 2.7])
        for kind in (KIND_NONLINEAR, KIND_LINEAR):
            series, ok = correlation_series(kind, SIGMA_Z, SIGMA_Y, ts,
                                            rho0, ham)
            assert ok.all()
            for i, t in enumerate(ts):
                ref = correlate_two_time(kind, SIGMA_Y, SIGMA_Z, 0.0,
                                         float(t), rho0, ham)
                assert abs(series[i] - ref) <= 1e-10

    def test_correlation_series_rk4(self):
        sc = TlsScenario(model="ed", a2=0.5, init="z", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        ts = np.linspace(0.0, 1.0, 11)
        cfg = PropagationConfig(method="rk4", dt=1e-3)
        exact, _ = correlation_series(KIND_NONLINEAR, SIGMA_Z, SIGMA_Z, ts,
                                      rho0, ham)
        stepped, _ = correlation_series(KIND_NONLINEAR, SIGMA_Z, SIGMA_Z, ts,
                                        rho0, ham, cfg)
        assert np.max(np.abs(exact - stepped)) <= 1e-8

    def test_average_series_matches_expectation(self):
        sc = TlsScenario(model="ed", a2=1.0, init="x", nu=0.0)
        ham, rho0 = build_model(sc), scenario_state(sc)
        ts = np.linspace(0.0, 2.0, 9)
        rows, ok = average_series(ts, rho0, ham, [SIGMA_X, SIGMA_Y])
        assert ok.all()
        for i, t in enumerate(ts):
            rho_t = propagate_nonlinear(rho0, ham, 0.0, float(t))
            assert abs(rows[0, i] - expectation(rho_t, SIGMA_X)) <= 1e-11
            assert abs(rows[1, i] - expectation(rho_t, SIGMA_Y)) <= 1e-11

    def test_series_rejects_decreasing_grid(self):
        sc = TlsScenario(model="ed", a2=1.0, init="x")
        ham, rho0 = build_model(sc), scenario_state(sc)
        with pytest.raises(ValueError):
            correlation_series(KIND_NONLINEAR, SIGMA_X, SIGMA_X,
                               [0.0, 1.0, 0.5], rho0, ham)

    def test_series_flags_isolated_trace_zero(self):
        # the off-shell pd trace touches zero at t = 1/delta: that grid
        # point is flagged, the rest of the series survives
        sc = TlsScenario(model="pd", init="z", nu=0.5)
        ham, rho0 = build_model(sc), scenario_state(sc)
        ts = np.array([0.0, 0.5, 1.0, 1.5])
        vals, ok = correlation_series(KIND_LINEAR, SIGMA_Z, SIGMA_Z, ts,
                                      rho0, ham)
        assert ok.tolist() == [True, True, False, True]
        ref = correlate_two_time(KIND_LINEAR, SIGMA_Z, SIGMA_Z, 0.0, 1.5,
                                 rho0, ham)
        assert abs(vals[3] - ref) <= 1e-10

    def test_average_series_flags_isolated_trace_zero(self):
        sc = TlsScenario(model="pd", init="z", nu=0.5)
        ham, rho0 = build_model(sc), scenario_state(sc)
        rows, ok = average_series(np.array([0.9, 1.0, 1.1]), rho0, ham,
                                  [SIGMA_Z])
        assert ok.tolist() == [True, False, True]
