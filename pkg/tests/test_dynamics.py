"""Tests for time evolution, enclosed-EP counting, and transfer maps.

Oracles: the bare-cavity evolution at omega = g = 0 decays exactly as
exp(-kappa t) in squared norm, zero coupling freezes the state, and the
clockwise map of a rectangle is the complex conjugate of the
counterclockwise one, which forces an exact F1/F3 mirror.
"""

import math

import numpy as np
import pytest

from epbraid import (
    DegenerateEigenbasisError,
    EpCount,
    IntegrationUnstableError,
    RectangleLoopSchedule,
    SpectralPhase,
    SystemParams,
    ValidationError,
    arc_crossings_at_g,
    classify_phase,
    convergence_ratio,
    eigenvalues_cardano,
    enclosed_ep_count,
    ep3_location,
    evolve,
    fidelity_map,
    launch_state,
    overlaps,
    population_dynamics,
)

GROUND = np.array([0.0, 0.0, 1.0], dtype=complex)
EXCITED = np.array([1.0, 0.0, 0.0], dtype=complex)


def make_schedule(om0=0.1, omm=1.0, a=1.0, g=0.26, kappa=1.0, T=3.0, direction="ccw"):
    return RectangleLoopSchedule(om0, omm, a, g, kappa, T, direction)


class TestRectangleLoopSchedule:
    def test_validation(self):
        with pytest.raises(ValidationError):
            make_schedule(om0=1.5, omm=1.0)
        with pytest.raises(ValidationError):
            make_schedule(a=0.0)
        with pytest.raises(ValidationError):
            make_schedule(T=-1.0)
        with pytest.raises(ValidationError):
            make_schedule(kappa=-0.5)
        with pytest.raises(ValidationError):
            make_schedule(direction="up")
        with pytest.raises(ValidationError):
            make_schedule(om0=float("nan"))

    def test_degenerate_rectangle_allowed(self):
        schedule = make_schedule(om0=1.0, omm=1.0)
        omega, delta = schedule.coords(0.25)
        assert float(omega) == 1.0 and float(delta) == -1.0

    def test_corner_coordinates_ccw(self):
        schedule = make_schedule(om0=0.2, omm=1.0, a=2.0)
        expected = {
            0.0: (0.2, 0.0),
            0.125: (0.2, -2.0),
            0.25: (0.6, -2.0),
            0.375: (1.0, -2.0),
            0.5: (1.0, 0.0),
            0.625: (1.0, 2.0),
            0.875: (0.2, 2.0),
            1.0: (0.2, 0.0),
        }
        for s, (om, de) in expected.items():
            omega, delta = schedule.coords(s)
            assert float(omega) == pytest.approx(om, abs=1e-14)
            assert float(delta) == pytest.approx(de, abs=1e-14)

    def test_cw_mirrors_detuning(self):
        ccw = make_schedule(a=2.0)
        cw = make_schedule(a=2.0, direction="cw")
        s = np.linspace(0.0, 1.0, 97)
        om1, de1 = ccw.coords(s)
        om2, de2 = cw.coords(s)
        assert np.array_equal(om1, om2)
        assert np.array_equal(de1, -de2)

    def test_fraction_domain_checked(self):
        with pytest.raises(ValidationError):
            make_schedule().coords(1.2)
        with pytest.raises(ValidationError):
            make_schedule().coords(-0.1)

    def test_params_at_and_start(self):
        schedule = make_schedule(om0=0.2, omm=1.0, a=2.0, T=4.0)
        assert schedule.start_params == SystemParams(0.0, 0.2, 0.26, 1.0)
        params = schedule.params_at(2.0)
        assert params == SystemParams(0.0, 1.0, 0.26, 1.0)

    def test_reversed_round_trip(self):
        schedule = make_schedule(direction="ccw")
        assert schedule.reversed().direction == "cw"
        assert schedule.reversed().reversed() == schedule


class TestEnclosedEpCount:
    def test_counts_by_start_position(self):
        assert enclosed_ep_count(make_schedule(om0=0.01)) == 2
        assert enclosed_ep_count(make_schedule(om0=0.07)) == 1
        count = enclosed_ep_count(make_schedule(om0=0.12))
        assert count == 0 and not count.no_ep_slice

    def test_no_slice_flag_above_cusp(self):
        count = enclosed_ep_count(make_schedule(g=0.3))
        assert count == 0 and count.no_ep_slice

    def test_rectangle_right_of_both_crossings(self):
        count = enclosed_ep_count(make_schedule(om0=0.01, omm=0.05))
        assert count == 0 and not count.no_ep_slice

    def test_single_crossing_at_low_g(self):
        assert enclosed_ep_count(make_schedule(om0=0.01, g=0.2)) == 1

    def test_interval_is_closed(self):
        crossings = arc_crossings_at_g(0.26, 1.0)
        lower = crossings[1].omega
        assert enclosed_ep_count(make_schedule(om0=lower)) == 1

    def test_kappa_override(self):
        schedule = make_schedule(om0=0.01)
        assert enclosed_ep_count(schedule, kappa=1.0) == 2
        assert enclosed_ep_count(schedule, kappa=0.8).no_ep_slice

    def test_count_type(self):
        count = enclosed_ep_count(make_schedule(om0=0.01))
        assert isinstance(count, EpCount) and isinstance(count, int)
        assert EpCount(0, no_ep_slice=True).no_ep_slice
        assert not EpCount(2).no_ep_slice


class TestEvolve:
    def test_zero_hamiltonian_is_stationary(self):
        trajectory = evolve(SystemParams(0.0, 0.0, 0.0, 0.0), EXCITED, T=2.0)
        assert np.allclose(trajectory.final_state, EXCITED, atol=1e-14)
        assert np.allclose(trajectory.norms, 1.0, atol=1e-14)

    def test_bare_cavity_decay_matches_exponential(self):
        kappa = 0.7
        trajectory = evolve(SystemParams(0.0, 0.0, 0.0, kappa), GROUND, T=2.0)
        assert np.allclose(trajectory.norms, np.exp(-kappa * trajectory.times), rtol=1e-10)

    def test_lossless_loop_preserves_norm(self):
        schedule = make_schedule(kappa=0.0, T=10.0)
        psi0 = launch_state(schedule.start_params)
        trajectory = evolve(schedule, psi0, dt=10.0 / 4096)
        assert np.max(np.abs(trajectory.norms - 1.0)) < 1e-9

    def test_norms_never_increase(self):
        schedule = make_schedule(om0=0.05, a=2.0, T=4.0)
        trajectory = evolve(schedule, launch_state(schedule.start_params))
        assert np.all(np.diff(trajectory.norms) <= 1e-9)

    def test_stiff_step_raises_instability(self):
        with pytest.raises(IntegrationUnstableError):
            evolve(SystemParams(0.0, 0.0, 0.0, 5e4), GROUND, T=1.0, dt=1e-3)

    def test_trajectory_layout(self):
        trajectory = evolve(SystemParams(0.1, 0.2, 0.3, 1.0), EXCITED, T=1.0, dt=0.25)
        assert trajectory.times.shape == (5,)
        assert trajectory.states.shape == (5, 3)
        assert trajectory.times[0] == 0.0 and trajectory.times[-1] == 1.0
        assert np.array_equal(trajectory.states[0], EXCITED)

    def test_psi0_validation(self):
        with pytest.raises(ValidationError):
            evolve(SystemParams(0.0, 0.1, 0.2, 1.0), np.array([1.0, 0.0]), T=1.0)
        with pytest.raises(ValidationError):
            evolve(SystemParams(0.0, 0.1, 0.2, 1.0), 0.5 * EXCITED, T=1.0)

    def test_time_grid_validation(self):
        schedule = make_schedule(T=3.0)
        psi0 = launch_state(schedule.start_params)
        with pytest.raises(ValidationError):
            evolve(schedule, psi0, T=4.5)
        with pytest.raises(ValidationError):
            evolve(schedule, psi0, dt=3.0 / 999)
        with pytest.raises(ValidationError):
            evolve(schedule, psi0, dt=0.0)
        with pytest.raises(ValidationError):
            evolve(SystemParams(0.0, 0.1, 0.2, 1.0), EXCITED)
        with pytest.raises(ValidationError):
            evolve(SystemParams(0.0, 0.1, 0.2, 1.0), EXCITED, T=-2.0)
        with pytest.raises(ValidationError):
            evolve("loop", EXCITED, T=1.0)

    def test_matching_T_accepted_for_schedule(self):
        schedule = make_schedule(T=3.0)
        psi0 = launch_state(schedule.start_params)
        trajectory = evolve(schedule, psi0, T=3.0, dt=3.0 / 1024)
        assert trajectory.times[-1] == 3.0


class TestConvergenceRatio:
    def test_fourth_order_on_schedule(self):
        schedule = make_schedule(om0=0.1, T=3.0)
        ratio = convergence_ratio(schedule, launch_state(schedule.start_params))
        assert 12.0 <= ratio <= 20.0

    def test_fourth_order_on_constant_params(self):
        params = SystemParams(0.3, 0.4, 0.2, 1.0)
        ratio = convergence_ratio(params, EXCITED, T=2.0, dt=2.0 / 64)
        assert 12.0 <= ratio <= 20.0


class TestOverlaps:
    def test_launch_state_is_the_middle_branch(self):
        params = SystemParams(0.0, 0.05, 0.25, 1.0)
        fidelities = overlaps(launch_state(params), params)
        assert fidelities[1] == pytest.approx(1.0, abs=1e-10)
        assert int(np.argmax(fidelities)) == 1
        assert np.all(fidelities <= 1.0 + 1e-12) and np.all(fidelities >= 0.0)

    def test_hermitian_basis_resolves_identity(self):
        rng = np.random.default_rng(83)
        params = SystemParams(0.3, 0.7, 0.4, 0.0)
        for _ in range(50):
            psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            psi /= np.linalg.norm(psi)
            assert abs(float(np.sum(overlaps(psi, params))) - 1.0) < 1e-10

    def test_nonorthogonal_basis_oversums(self):
        total = float(np.sum(overlaps(EXCITED, SystemParams(0.1, 0.06, 0.24, 1.0))))
        assert abs(total - 1.0) > 1e-3

    def test_defective_point_rejected(self):
        om, g, _ = ep3_location(6.0)
        params = SystemParams(0.0, om, g, 6.0)
        with pytest.raises(DegenerateEigenbasisError):
            overlaps(EXCITED, params)
        with pytest.raises(DegenerateEigenbasisError):
            launch_state(params)

    def test_state_validation(self):
        params = SystemParams(0.0, 0.05, 0.25, 1.0)
        with pytest.raises(ValidationError):
            overlaps(np.zeros(3), params)
        with pytest.raises(ValidationError):
            overlaps(np.ones(4), params)

    def test_middle_eigenvalue_purely_imaginary_outside_lens(self):
        rng = np.random.default_rng(19)
        checked = 0
        while checked < 200:
            om, g = rng.uniform(0.0, 0.5, size=2)
            if classify_phase(om, g, 1.0) is not SpectralPhase.COMPLEX_PAIR:
                continue
            lams = eigenvalues_cardano(SystemParams(0.0, om, g, 1.0)).lambdas
            assert abs(lams[1].real) < 1e-10
            checked += 1


MAP_ARGS = dict(g_fixed=0.26, omega_m=5.0, a=5.0, kappa=1.0)


def one_cell(direction, omega0, period, denom=2048):
    chart = fidelity_map(
        t_grid=[period],
        omega0_grid=[omega0],
        direction=direction,
        dt_denominator=denom,
        **MAP_ARGS,
    )
    return chart.values[0, 0]


class TestFidelityMap:
    def test_short_loops_return_to_launch_branch(self):
        chart = fidelity_map(
            t_grid=[0.01],
            omega0_grid=[0.04, 0.075, 0.15],
            direction="ccw",
            dt_denominator=1024,
            **MAP_ARGS,
        )
        assert np.all(chart.values[:, 0, 1] > 0.99)
        assert list(chart.ep_count) == [2, 1, 0]

    def test_chirality_outside_the_arcs(self):
        cw = one_cell("cw", 0.15, 2.0)
        ccw = one_cell("ccw", 0.15, 2.0)
        assert int(np.argmax(cw)) == 2
        assert int(np.argmax(ccw)) == 0

    def test_cw_is_the_exact_mirror_of_ccw(self):
        cw = one_cell("cw", 0.15, 2.0)
        ccw = one_cell("ccw", 0.15, 2.0)
        assert np.allclose(cw, ccw[::-1], atol=1e-12)

    def test_one_ep_transfer_ignores_direction(self):
        cw = one_cell("cw", 0.075, 1.0)
        ccw = one_cell("ccw", 0.075, 1.0)
        assert int(np.argmax(cw)) == 2 and int(np.argmax(ccw)) == 2
        assert np.allclose(cw, ccw, atol=1e-12)

    def test_two_ep_transfer_at_specific_times_both_ways(self):
        assert int(np.argmax(one_cell("cw", 0.05, 5.5))) == 2
        assert int(np.argmax(one_cell("ccw", 0.04, 0.5))) == 2

    def test_defective_column_recorded_not_fatal(self):
        om_star, g_star, _ = ep3_location(1.0)
        chart = fidelity_map(
            g_star, 1.0, 1.0, 1.0, [1.0, 2.0], [om_star, 0.2], "cw", dt_denominator=1024
        )
        assert len(chart.errors) == 2
        assert {(i, j) for i, j, _ in chart.errors} == {(0, 0), (0, 1)}
        assert np.all(np.isnan(chart.values[0]))
        assert np.all(np.isfinite(chart.values[1]))
        assert list(chart.ep_count) == [1, 0]

    def test_deterministic(self):
        a = one_cell("cw", 0.15, 1.0, denom=1024)
        b = one_cell("cw", 0.15, 1.0, denom=1024)
        assert np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(ValidationError):
            fidelity_map(0.26, 1.0, 1.0, 1.0, [1.0], [1.0], "cw")
        with pytest.raises(ValidationError):
            fidelity_map(0.26, 1.0, 1.0, 1.0, [1.0], [0.1], "sideways")
        with pytest.raises(ValidationError):
            fidelity_map(0.26, 1.0, 1.0, 1.0, [], [0.1], "cw")
        with pytest.raises(ValidationError):
            fidelity_map(0.26, 1.0, 1.0, 1.0, [[1.0]], [0.1], "cw")
        with pytest.raises(ValidationError):
            fidelity_map(0.26, 1.0, 1.0, 1.0, [1.0], [0.1], "cw", dt_denominator=512)


class TestPopulationDynamics:
    def test_bare_cavity_populations(self):
        kappa = 0.7
        series = population_dynamics(SystemParams(0.0, 0.0, 0.0, kappa), GROUND, T=2.0)
        expected = np.exp(-kappa * series.times)
        assert np.allclose(series.p_g1, expected, rtol=1e-8)
        assert np.allclose(series.p_g0, 1.0 - expected, atol=1e-8)
        assert np.max(series.p_e) == 0.0 and np.max(series.p_f) == 0.0

    def test_populations_close_to_one(self):
        schedule = make_schedule(om0=0.05, T=4.0)
        series = population_dynamics(schedule, launch_state(schedule.start_params))
        total = series.p_e + series.p_f + series.p_g1 + series.p_g0
        assert np.allclose(total, 1.0, atol=1e-12)

    def test_leak_column_never_decreases(self):
        schedule = make_schedule(om0=0.05, T=4.0)
        series = population_dynamics(schedule, launch_state(schedule.start_params))
        assert np.all(np.diff(series.p_g0) >= -1e-9)

    def test_lossless_system_never_leaks(self):
        schedule = make_schedule(kappa=0.0, T=5.0)
        series = population_dynamics(schedule, launch_state(schedule.start_params))
        assert np.max(np.abs(series.p_g0)) < 1e-9
