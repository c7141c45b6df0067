import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timerescale.protocol import (AEDrive, AEParams, DegenerateHamiltonianError, DriveSample,
                                  RescaledDrive, adiabatic_populations, adiabaticity_metric,
                                  ae_detuning, ae_rabi, eigensystem, hamiltonian, tr_detuning,
                                  tr_rabi)
from timerescale.rescale import DomainError

P = AEParams()  # omega0 = 2, beta = sqrt(2), t0 = 1


def test_defaults():
    assert P.omega0 == 2.0 and P.beta_chirp == math.sqrt(2.0) and P.t0 == 1.0
    assert P.t_f == 8.0
    assert P.chirp_amplitude == pytest.approx(4 / math.pi)


def test_ae_rabi_examples():
    assert ae_rabi(4.0, P) == 2.0
    # 2 sech(2 pi) from math, independent of numpy
    start = 2.0 / math.cosh(2 * math.pi)
    assert ae_rabi(0.0, P) == pytest.approx(start, rel=1e-14)
    assert start == pytest.approx(0.00747, abs=5e-6)
    assert ae_rabi(8.0, P) == pytest.approx(ae_rabi(0.0, P), rel=1e-14)


def test_ae_detuning_examples():
    assert ae_detuning(4.0, P) == 0.0
    assert ae_detuning(0.0, P) == pytest.approx(-4 / math.pi, abs=1e-4)
    assert ae_detuning(8.0, P) == pytest.approx(-ae_detuning(0.0, P), rel=1e-14)


def test_window_enforced():
    with pytest.raises(DomainError):
        ae_rabi(8.5, P)
    with pytest.raises(DomainError):
        tr_detuning(0.9, P, P.rescale_map(10.0))


@pytest.mark.parametrize("a", [2.0, 5.0, 10.0])
def test_tr_rabi_peak(a):
    m = P.rescale_map(a)
    assert tr_rabi(8.0 / (2 * a), P, m) == pytest.approx((2 * a - 1) * P.omega0, abs=1e-12)
    assert tr_detuning(8.0 / (2 * a), P, m) == pytest.approx(0.0, abs=1e-12)


def test_tr_boundaries_match_reference():
    for a in (2.0, 10.0):
        m = P.rescale_map(a)
        assert tr_rabi(0.0, P, m) == pytest.approx(ae_rabi(0.0, P), abs=1e-12)
        assert tr_rabi(m.duration, P, m) == pytest.approx(ae_rabi(8.0, P), abs=1e-12)
        assert tr_detuning(0.0, P, m) == pytest.approx(ae_detuning(0.0, P), abs=1e-12)
        assert tr_detuning(m.duration, P, m) == pytest.approx(ae_detuning(8.0, P), abs=1e-12)


def test_tr_point_composition_a10():
    m = P.rescale_map(10.0)
    tau = 0.4
    oracle = m.f_prime(tau) * ae_rabi(m.f(tau), P)
    assert tr_rabi(tau, P, m) == pytest.approx(oracle, rel=1e-12)
    assert tr_rabi(tau, P, m) == pytest.approx(38.0, rel=1e-12)


def test_composition_identity_random():
    rng = np.random.default_rng(7)
    for a in (1.0, 2.0, 5.0, 10.0):
        m = P.rescale_map(a)
        tau = rng.uniform(0.0, m.duration, 1000)
        comp_r = m.f_prime(tau) * ae_rabi(m.f(tau), P)
        comp_d = m.f_prime(tau) * ae_detuning(m.f(tau), P)
        assert np.max(np.abs(tr_rabi(tau, P, m) - comp_r)) <= 1e-12 * P.omega0
        assert np.max(np.abs(tr_detuning(tau, P, m) - comp_d)) <= 1e-12 * P.omega0


@pytest.mark.parametrize("a", [1.0, 2.0, 10.0])
def test_peak_law_dense_grid(a):
    m = P.rescale_map(a)
    tau = np.linspace(0.0, m.duration, 20001)
    values = tr_rabi(tau, P, m)
    k = int(np.argmax(values))
    assert abs(values[k] - (2 * a - 1) * P.omega0) <= 1e-9
    assert abs(tau[k] - m.duration / 2) <= tau[1] - tau[0]


def test_hamiltonian_examples():
    np.testing.assert_allclose(hamiltonian(DriveSample(0.0, 1.0, 0.0)), np.diag([0.5, -0.5]))
    np.testing.assert_allclose(hamiltonian(DriveSample(2.0, 0.0, 0.0)), [[0, 1], [1, 0]])
    np.testing.assert_allclose(hamiltonian(DriveSample(2.0, 0.0, math.pi / 2)),
                               [[0, 1j], [-1j, 0]], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(rabi=st.floats(-50, 50), det=st.floats(-50, 50), phase=st.floats(-10, 10))
def test_hamiltonian_hermitian_traceless(rabi, det, phase):
    h = hamiltonian(DriveSample(rabi, det, phase))
    assert np.array_equal(h, h.conj().T)
    assert abs(np.trace(h)) == 0.0


def test_eigensystem_resonant():
    es = eigensystem(DriveSample(2.0, 0.0, 0.0))
    assert es.theta == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(es.n_plus, [math.sqrt(0.5), math.sqrt(0.5)])
    assert es.e_plus == pytest.approx(1.0)


def test_eigensystem_pure_detuning():
    es = eigensystem(DriveSample(0.0, 1.0, 0.0))
    assert es.theta == 0.0
    assert es.e_plus == 0.5
    # upper level of diag(1/2, -1/2) is |1>
    np.testing.assert_allclose(es.n_plus, [1.0, 0.0])
    np.testing.assert_allclose(es.n_minus, [0.0, 1.0])


def test_eigensystem_initial_point():
    es = eigensystem(AEDrive(P)(0.0))
    assert es.theta == pytest.approx(math.pi, abs=0.01)
    # prepared state |1> is the lower branch
    assert abs(es.n_minus[0]) ** 2 > 0.9999


@settings(max_examples=200, deadline=None)
@given(rabi=st.floats(-20, 20), det=st.floats(-20, 20), phase=st.floats(-7, 7))
def test_eigensystem_invariants(rabi, det, phase):
    s = DriveSample(rabi, det, phase)
    omega = math.hypot(rabi, det)
    if omega < 1e-6:
        return
    es = eigensystem(s)
    h = hamiltonian(s)
    assert es.e_plus == -es.e_minus == pytest.approx(omega / 2)
    assert abs(np.vdot(es.n_plus, es.n_minus)) <= 1e-12
    assert abs(np.linalg.norm(es.n_plus) - 1) <= 1e-12
    assert abs(np.linalg.norm(es.n_minus) - 1) <= 1e-12
    assert np.linalg.norm(h @ es.n_plus - es.e_plus * es.n_plus) <= 1e-10 * omega
    assert np.linalg.norm(h @ es.n_minus - es.e_minus * es.n_minus) <= 1e-10 * omega


def test_eigensystem_degenerate():
    with pytest.raises(DegenerateHamiltonianError):
        eigensystem(DriveSample(0.0, 0.0, 0.0))


def test_adiabatic_populations():
    p1, p2 = adiabatic_populations(4.0, P)
    assert (p1, p2) == pytest.approx((0.5, 0.5), abs=1e-15)
    p1, _ = adiabatic_populations(0.0, P)
    assert p1 > 0.9999
    _, p2 = adiabatic_populations(8.0, P)
    assert p2 > 0.9999
    t = np.linspace(0, 8, 101)
    p1, p2 = adiabatic_populations(t, P)
    np.testing.assert_allclose(p1 + p2, 1.0, atol=1e-15)


def test_adiabatic_populations_match_lower_eigenvector():
    for t in (0.5, 3.3, 6.1):
        es = eigensystem(AEDrive(P)(t))
        p1, p2 = adiabatic_populations(t, P)
        assert abs(es.n_minus[0]) ** 2 == pytest.approx(p1, abs=1e-14)
        assert abs(es.n_minus[1]) ** 2 == pytest.approx(p2, abs=1e-14)


def _metric_fd(drive, t, h=1e-6):
    s = drive(t)
    sp, sm = drive(t + h), drive(t - h)
    d_rabi = (sp.rabi - sm.rabi) / (2 * h)
    d_det = (sp.detuning - sm.detuning) / (2 * h)
    return abs(s.rabi * d_det - d_rabi * s.detuning) / math.hypot(s.rabi, s.detuning) ** 3


def test_adiabaticity_metric_center_value():
    # closed form at t = 4 t0: (2 beta^2 t0 / pi)(pi / 2 t0) / omega0^2 = beta^2 / omega0^2
    value = adiabaticity_metric(4.0, P)
    assert value == pytest.approx(0.5, rel=1e-12)
    assert value == pytest.approx(_metric_fd(AEDrive(P), 4.0), rel=1e-7)


def test_adiabaticity_metric_matches_finite_differences():
    for t in (0.3, 1.7, 3.9, 5.2, 7.6):
        assert adiabaticity_metric(t, P) == pytest.approx(_metric_fd(AEDrive(P), t), rel=1e-6)
    tr = RescaledDrive(P, 10.0)
    for tau in (0.05, 0.3, 0.41, 0.7):
        assert adiabaticity_metric(tau, tr) == pytest.approx(_metric_fd(tr, tau, 1e-7), rel=1e-5)


def test_adiabaticity_metric_symmetric():
    for s in (0.5, 1.0, 2.5, 3.9):
        assert adiabaticity_metric(4 - s, P) == pytest.approx(adiabaticity_metric(4 + s, P), rel=1e-12)


@pytest.mark.parametrize("a", [2.0, 10.0])
def test_adiabaticity_metric_invariant_under_rescaling(a):
    # f'^3 cancels between numerator and denominator
    tr = RescaledDrive(P, a)
    tau = np.linspace(0.0, tr.t_end, 41)
    np.testing.assert_allclose(adiabaticity_metric(tau, tr),
                               adiabaticity_metric(tr.map.f(tau), P), rtol=1e-10)


def test_perturbed_params():
    q = P.perturbed(eps=0.1, delta_err=-0.2)
    assert q.omega0 == pytest.approx(2.2)
    assert q.beta_chirp**2 == pytest.approx(2.0 * 0.8)
    with pytest.raises(ValueError):
        P.perturbed(eps=-1.0)
