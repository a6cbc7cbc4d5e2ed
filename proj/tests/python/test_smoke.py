"""Smoke tests for the python bindings: import, run, sanity-check."""

import math

import numpy as np
import pytest

import echosim as es


def test_version_string():
    assert es.__version__


def test_states_are_numpy_arrays():
    rho = es.ground_state()
    assert rho.shape == (3, 3)
    assert rho[0, 0] == 1.0 + 0.0j

    flipped = es.hard_pulse_rotation(rho, es.Channel.A, math.pi)
    assert flipped[2, 2] == pytest.approx(1.0)


def test_fig2_predictions():
    job = es.preset_job("fig2")
    pred = es.predict_timing(job.sequence)
    assert pred.t_e1_us[0] == pytest.approx(34.5)
    assert pred.t_e2_us[0] == pytest.approx(70.0)
    assert not pred.no_echo


def test_two_pulse_echo_appears_on_schedule():
    seq = es.make_two_pulse_sequence(5.0, 19.95)  # R1 centered at 20
    grid = es.build_grid(60.0, 100.0, 31)
    result = es.run_ensemble(es.AtomParams(), seq, grid, t1_us=40.0,
                             audit_positivity=False)
    events = es.detect_echoes(result.times_us, result.polarization,
                              [es.EchoWindow("E1", 31.0, 38.0)])
    assert len(events) == 1
    assert events[0].t_peak_us == pytest.approx(34.5, abs=0.06)
    assert abs(events[0].amplitude) == pytest.approx(0.5 * math.sin(math.pi / 10), rel=0.02)


def test_phase_matching_backward_echo():
    k = np.array([1.0e7, 0.0, 0.0])
    omega = 1.0e7 * 299792458.0
    res = es.phase_match_e2(k, k, -k, omega, omega, omega)
    assert res.backward
    assert res.mismatch == 0.0
    np.testing.assert_allclose(res.k_out, -k)


def test_invalid_config_raises_value_error():
    with pytest.raises(ValueError, match=r"\$\.grid\.n"):
        es.parse_config('{"version": 1, "preset": "fig2", "grid": {"n": 0}}')


def test_population_audit_on_small_fig2():
    job = es.preset_job("fig2")
    grid = es.build_grid(job.grid_fwhm_khz, job.grid_span_khz, 21)
    result = es.run_ensemble(job.atom, job.sequence, grid, t1_us=job.t1_us)
    assert result.audit.max_trace_error < 1e-9
    assert result.audit.min_eigenvalue > -1e-6
    pops = es.population_trace(result)
    total = np.array(pops.rho11) + np.array(pops.rho22) + np.array(pops.rho33)
    np.testing.assert_allclose(total, 1.0, atol=1e-6)
