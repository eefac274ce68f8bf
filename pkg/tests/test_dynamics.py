"""Trajectory simulation against closed-form relativistic solutions."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from form_lab.dynamics import (
    DEFAULT_UNITS,
    ForceSchedule,
    UnitSystem,
    schedule_on_grid,
    simulate_batch,
    simulate_trajectory,
)
from form_lab.errors import DegenerateVelocityError
from form_lab.relativity import (
    DEFAULT_PHYSICS,
    acceleration_from_force,
    decompose_parallel_perp,
    lorentz_factor,
    speed_sq_derivative,
)

C = DEFAULT_PHYSICS.c


class TestUnitSystem:
    def test_speed_of_light_round(self):
        assert DEFAULT_UNITS.c == 10.0  # 3e8 m/s over 3e7 m/du

    def test_force_conversions_frozen(self):
        assert DEFAULT_UNITS.force_from_si(1.5e8) == 5.0
        assert_allclose(DEFAULT_UNITS.force_from_si(1.0e7), 1.0 / 3.0, rtol=1e-15)
        assert_allclose(DEFAULT_UNITS.force_from_si(7.0e8), 70.0 / 3.0, rtol=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            UnitSystem(meters_per_du=0.0)


class TestAnalyticOracles:
    def test_constant_parallel_force_matches_closed_form(self):
        """1-D boost: w(t) = w0 + g t and x(t) = x0 + (c^2/g)(gamma(t) - gamma(0)).

        This is the standard constant-proper-force solution; the simulator
        must reproduce it to near machine precision on a 200-step grid.
        """
        g = 5.0
        v0 = 3.0
        rec = simulate_trajectory([1.0, 0.0], [v0, 0.0], ForceSchedule.constant(g, 0.0), 1.0, 200)
        w0 = lorentz_factor([v0, 0.0]) * v0
        w_t = w0 + g * rec.times
        gamma_t = np.sqrt(1.0 + (w_t / C) ** 2)
        assert_allclose(rec.v[:, 0], w_t / gamma_t, rtol=1e-10)
        assert_allclose(rec.x[:, 0], 1.0 + (C**2 / g) * (gamma_t - gamma_t[0]), rtol=1e-10)
        assert_allclose(rec.v[:, 1], 0.0, atol=1e-14)

    def test_constant_perpendicular_force_is_a_circle(self):
        """A purely perpendicular force turns the velocity without changing
        speed: the path is a circle of radius m gamma s^2 / f_perp."""
        s, q = 5.0, 7.0
        rec = simulate_trajectory([0.0, 0.0], [s, 0.0], ForceSchedule.constant(0.0, q), 1.0, 400)
        speeds = np.sqrt((rec.v**2).sum(-1))
        assert_allclose(speeds, s, rtol=1e-12)
        omega = q / (lorentz_factor([s, 0.0]) * s)  # dphi/dt = f_perp / (m w)
        r = s / omega
        expected = np.stack([r * np.sin(omega * rec.times), r * (1 - np.cos(omega * rec.times))], axis=-1)
        assert_allclose(rec.x, expected, rtol=1e-9, atol=1e-9)

    def test_handedness_mirrors_exactly(self):
        sched = ForceSchedule.sinusoidal(0.4, 1.0, 20.0, 8.0)
        rec_ccw = simulate_trajectory([0.0, 0.0], [4.0, 0.0], sched, 1.0, 100, handedness=1)
        rec_cw = simulate_trajectory([0.0, 0.0], [4.0, 0.0], sched, 1.0, 100, handedness=-1)
        assert np.array_equal(rec_ccw.x[:, 0], rec_cw.x[:, 0])
        assert np.array_equal(rec_ccw.x[:, 1], -rec_cw.x[:, 1])


@pytest.fixture(scope="module")
def record():
    sched = ForceSchedule.sinusoidal(1.0 / 3.0, 1.0, 70.0 / 3.0, 8.0)
    return simulate_trajectory([0.1, -0.2], [4.0, 0.5], sched, 1.0, 200)


class TestRecordConsistency:

    def test_speeds_below_c(self, record):
        assert np.all(np.sqrt((record.v**2).sum(-1)) < C)

    def test_acceleration_matches_force(self, record):
        expected = acceleration_from_force(record.v, record.f)
        assert_allclose(record.a, expected, rtol=1e-10, atol=1e-12)

    def test_components_match_lab_force(self, record):
        fc = decompose_parallel_perp(record.f, record.v)
        assert_allclose(fc.f_par, record.f_par, rtol=1e-10, atol=1e-10)
        assert_allclose(fc.f_perp, record.f_perp, rtol=1e-10, atol=1e-10)

    def test_work_identity_along_path(self, record):
        """Central differences of |v|^2/2 on the grid match the analytic rate
        <f, v>(1 - |v|^2/c^2)/(m gamma), normalized by the rate's scale."""
        half_speed_sq = 0.5 * (record.v**2).sum(-1)
        dt = record.times[1] - record.times[0]
        fd = (half_speed_sq[2:] - half_speed_sq[:-2]) / (2 * dt)
        predicted = speed_sq_derivative(record.v, record.f)[1:-1]
        scale = np.max(np.abs(predicted))
        assert np.max(np.abs(fd - predicted)) / scale < 1e-4

    def test_velocity_is_position_derivative(self, record):
        dt = record.times[1] - record.times[0]
        fd = (record.x[2:] - record.x[:-2]) / (2 * dt)
        assert_allclose(fd, record.v[1:-1], atol=5e-3)


class TestBatching:
    def test_batch_matches_singles_bitwise(self):
        sched = ForceSchedule.sinusoidal(0.3, 1.0, 15.0, 8.0)
        x0 = np.array([[0.0, 0.1], [0.5, -0.3], [-0.2, 0.4]])
        v0 = np.array([[3.0, 0.0], [0.0, 4.0], [-2.0, 2.0]])
        batch = simulate_batch(x0, v0, sched, 1.0, 50)
        for i in range(3):
            single = simulate_trajectory(x0[i], v0[i], sched, 1.0, 50, index=i)
            assert np.array_equal(batch[i].x, single.x)
            assert np.array_equal(batch[i].v, single.v)
            assert np.array_equal(batch[i].a, single.a)

    def test_record_metadata(self):
        rec = simulate_trajectory([0.0, 0.0], [1.0, 0.0], ForceSchedule.constant(1.0, 0.0), 2.0, 40, index=7)
        assert rec.index == 7
        assert rec.n_steps == 40
        assert rec.duration == pytest.approx(2.0)
        assert_allclose(rec.x0, [0.0, 0.0])
        assert rec.endpoint.shape == (2,)


class TestStressScaling:
    def test_hundredfold_forces_stay_subluminal(self):
        """Even with forces scaled 100x, celerity integration keeps every
        recorded speed strictly below c.  The constant schedule resolves
        cleanly on this grid, so the run genuinely approaches c."""
        base = ForceSchedule.constant(5.0, 5.0)
        rec = simulate_trajectory([0.0, 0.0], [0.5, 0.0], base.scaled(100.0), 1.0, 200)
        speeds = np.sqrt((rec.v**2).sum(-1))
        assert np.all(speeds < C)
        assert speeds.max() > 0.99 * C  # the stress run really does push near c

    def test_underresolved_oscillation_still_subluminal(self):
        """A fast 100x perpendicular wiggle is far below the grid's Nyquist
        rate; the trajectory is then inaccurate but still strictly below c,
        because the integration state is celerity."""
        base = ForceSchedule.sinusoidal(1.0 / 3.0, 1.0, 70.0 / 3.0, 8.0)
        rec = simulate_trajectory([0.0, 0.0], [0.5, 0.0], base.scaled(100.0), 1.0, 200)
        assert np.all(np.sqrt((rec.v**2).sum(-1)) < C)

    def test_degenerate_start_is_hard_error(self):
        with pytest.raises(DegenerateVelocityError):
            simulate_trajectory([0.0, 0.0], [0.0, 0.0], ForceSchedule.constant(5.0, 5.0), 1.0, 10)


class TestScheduleGrid:
    def test_schedule_on_grid(self):
        sched = ForceSchedule.sinusoidal(2.0, 1.0, 3.0, 2.0)
        times = np.array([0.0, 0.25, 0.5])
        fp, fq = schedule_on_grid(sched, times)
        assert_allclose(fp, 2.0 * np.sin(times), rtol=1e-15)
        assert_allclose(fq, 3.0 * np.sin(2.0 * times), rtol=1e-15)
