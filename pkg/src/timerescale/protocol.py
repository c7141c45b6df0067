"""
Two-level Hamiltonian, its instantaneous eigensystem, and the drives.

In the basis {|1>, |2>} (hbar = 1)

    H = 1/2 * [[ Delta,              Omega_R e^{i phi} ],
               [ Omega_R e^{-i phi}, -Delta            ]]

The Allen-Eberly reference drive on [0, 8 t0] is

    Omega_R(t) = Omega_0 sech(pi (t - 4 t0) / (2 t0))
    Delta(t)   = (2 beta^2 t0 / pi) tanh(pi (t - 4 t0) / (2 t0))

and the time-rescaled drive multiplies each by f'(tau) evaluated at f(tau).
``beta_chirp`` here is the chirp constant; the inverse temperature of the
work statistics is a different quantity (``beta_thermal``).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from .rescale import DomainError, RescaleMap

_EDGE_SLACK = 1e-12


class DegenerateHamiltonianError(ValueError):
    """Raised when the generalized Rabi frequency vanishes (mixing angle undefined)."""


@dataclass(frozen=True)
class AEParams:
    """Allen-Eberly drive parameters (defaults: Omega_0 = 2, beta = sqrt 2, t0 = 1)."""

    omega0: float = 2.0
    beta_chirp: float = math.sqrt(2.0)
    t0: float = 1.0

    def __post_init__(self):
        for name in ("omega0", "beta_chirp", "t0"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def t_f(self) -> float:
        return 8.0 * self.t0

    @property
    def chirp_amplitude(self) -> float:
        """Asymptotic detuning 2 beta^2 t0 / pi."""
        return 2.0 * self.beta_chirp**2 * self.t0 / math.pi

    def perturbed(self, eps: float = 0.0, delta_err: float = 0.0) -> "AEParams":
        """Systematic errors Omega_0 -> Omega_0 (1 + eps) and beta^2 -> beta^2 (1 + delta_err)."""
        if eps <= -1 or delta_err <= -1:
            raise ValueError("error fractions must be > -1")
        return replace(
            self,
            omega0=self.omega0 * (1.0 + eps),
            beta_chirp=self.beta_chirp * math.sqrt(1.0 + delta_err),
        )

    def rescale_map(self, a: float) -> RescaleMap:
        return RescaleMap(a=a, t_f=self.t_f)


@dataclass(frozen=True)
class DriveSample:
    """Control values at one or many times (fields may be arrays)."""

    rabi: object
    detuning: object
    phase: object = 0.0


@dataclass(frozen=True)
class Eigensystem2:
    theta: float
    omega_gen: float
    e_plus: float
    e_minus: float
    n_plus: np.ndarray
    n_minus: np.ndarray


def _check_window(t, start, end):
    t = np.asarray(t, dtype=float)
    slack = _EDGE_SLACK * max(abs(end - start), 1.0)
    if np.any(t < start - slack) or np.any(t > end + slack) or np.any(np.isnan(t)):
        raise DomainError(f"time outside protocol window [{start}, {end}]")
    return t


def _scalar(x):
    return x if np.ndim(x) else float(x)


def _ae_argument(t, p: AEParams):
    return np.pi * (t - 4.0 * p.t0) / (2.0 * p.t0)


def ae_rabi(t, p: AEParams):
    t = _check_window(t, 0.0, p.t_f)
    return _scalar(p.omega0 / np.cosh(_ae_argument(t, p)))


def ae_detuning(t, p: AEParams):
    t = _check_window(t, 0.0, p.t_f)
    return _scalar(p.chirp_amplitude * np.tanh(_ae_argument(t, p)))


def tr_rabi(tau, p: AEParams, rmap: RescaleMap):
    """Closed-form rescaled Rabi frequency on [0, t_f/a]."""
    tau = _check_window(tau, 0.0, rmap.duration)
    a, t_f, t0 = rmap.a, rmap.t_f, p.t0
    wave = 2.0 * np.pi * a * tau / t_f
    envelope = a - (a - 1.0) * np.cos(wave)
    inner = a * tau - (a - 1.0) / (2.0 * np.pi * a) * t_f * np.sin(wave) - 4.0 * t0
    return _scalar(p.omega0 * envelope / np.cosh(np.pi / (2.0 * t0) * inner))


def tr_detuning(tau, p: AEParams, rmap: RescaleMap):
    """Closed-form rescaled detuning on [0, t_f/a]."""
    tau = _check_window(tau, 0.0, rmap.duration)
    a, t_f, t0 = rmap.a, rmap.t_f, p.t0
    wave = 2.0 * np.pi * a * tau / t_f
    envelope = a - (a - 1.0) * np.cos(wave)
    inner = a * tau - (a - 1.0) / (2.0 * np.pi * a) * t_f * np.sin(wave) - 4.0 * t0
    return _scalar(p.chirp_amplitude * envelope * np.tanh(np.pi / (2.0 * t0) * inner))


class AEDrive:
    """Reference Allen-Eberly drive on [0, t_f] with phase fixed to zero."""

    def __init__(self, params: AEParams = AEParams()):
        self.params = params
        self.t_start = 0.0
        self.t_end = params.t_f

    def __call__(self, t) -> DriveSample:
        return DriveSample(ae_rabi(t, self.params), ae_detuning(t, self.params), 0.0)

    def derivative(self, t):
        """Analytic time derivatives (d Omega_R/dt, d Delta/dt)."""
        p = self.params
        t = _check_window(t, 0.0, p.t_f)
        x = _ae_argument(t, p)
        k = np.pi / (2.0 * p.t0)
        sech = 1.0 / np.cosh(x)
        return (_scalar(-p.omega0 * k * sech * np.tanh(x)),
                _scalar(p.chirp_amplitude * k * sech**2))

    def __repr__(self):
        return f"AEDrive({self.params})"


class RescaledDrive:
    """Time-rescaled Allen-Eberly drive on [0, t_f/a]."""

    def __init__(self, params: AEParams, a: float):
        self.params = params
        self.map = params.rescale_map(a)
        self.reference = AEDrive(params)
        self.t_start = 0.0
        self.t_end = self.map.duration

    @property
    def a(self) -> float:
        return self.map.a

    def __call__(self, tau) -> DriveSample:
        return DriveSample(tr_rabi(tau, self.params, self.map),
                           tr_detuning(tau, self.params, self.map), 0.0)

    def derivative(self, tau):
        # d/dtau [f' g(f)] = f'' g(f) + f'^2 g'(f)
        m = self.map
        t = m.f(tau)
        fp, fpp = m.f_prime(tau), m.f_second(tau)
        ref = self.reference(t)
        d_rabi, d_det = self.reference.derivative(t)
        return (fpp * ref.rabi + fp**2 * d_rabi, fpp * ref.detuning + fp**2 * d_det)

    def __repr__(self):
        return f"RescaledDrive({self.params}, a={self.a})"


class ConstantDrive:
    """Square pulse with constant controls on [0, duration]."""

    def __init__(self, rabi: float, detuning: float, duration: float, phase: float = 0.0):
        self.rabi, self.detuning, self.phase = rabi, detuning, phase
        self.t_start = 0.0
        self.t_end = duration

    def __call__(self, t) -> DriveSample:
        t = _check_window(t, self.t_start, self.t_end)
        ones = np.ones_like(t)
        return DriveSample(_scalar(self.rabi * ones), _scalar(self.detuning * ones), self.phase)

    def derivative(self, t):
        t = _check_window(t, self.t_start, self.t_end)
        return _scalar(np.zeros_like(t)), _scalar(np.zeros_like(t))


def hamiltonian(s: DriveSample) -> np.ndarray:
    """2x2 Hermitian, traceless Hamiltonian (hbar = 1) of a single drive sample."""
    coupling = s.rabi * np.exp(1j * s.phase)
    return 0.5 * np.array([[s.detuning, coupling],
                           [np.conj(coupling), -s.detuning]], dtype=complex)


def eigensystem(s: DriveSample) -> Eigensystem2:
    """Instantaneous eigenpairs with mixing angle theta = arccos(Delta / Omega).

    With H written as (Omega/2) [[cos theta, sin theta e^{i phi}], [sin theta e^{-i phi}, -cos theta]]
    the eigenvectors are

        n_+ = ( cos(theta/2),              e^{-i phi} sin(theta/2) ),   E_+ = +Omega/2
        n_- = ( -e^{i phi} sin(theta/2),   cos(theta/2) ),              E_- = -Omega/2

    The state prepared as |1> at theta ~ pi is therefore the lower branch n_-,
    whose populations are (sin^2(theta/2), cos^2(theta/2)).
    """
    omega = math.hypot(s.detuning, s.rabi)
    if omega == 0.0:
        raise DegenerateHamiltonianError("generalized Rabi frequency is zero")
    # atan2 form of arccos(Delta / Omega) stays accurate near theta = 0 and pi
    theta = math.atan2(abs(s.rabi), s.detuning)
    # theta in [0, pi] needs sin(theta) = |Omega_R| / Omega; a negative amplitude is a pi phase shift
    phase = complex(np.exp(1j * s.phase)) * (-1.0 if s.rabi < 0 else 1.0)
    sin_h, cos_h = math.sin(theta / 2.0), math.cos(theta / 2.0)
    n_plus = np.array([cos_h, phase.conjugate() * sin_h], dtype=complex)
    n_minus = np.array([-phase * sin_h, cos_h], dtype=complex)
    return Eigensystem2(theta, omega, omega / 2.0, -omega / 2.0, n_plus, n_minus)


def adiabatic_populations(t, p: AEParams = AEParams()):
    """Populations (P1, P2) = (sin^2(theta/2), cos^2(theta/2)) under exact adiabatic following."""
    s = AEDrive(p)(t)
    omega = np.hypot(s.detuning, s.rabi)
    if np.any(omega == 0):
        raise DegenerateHamiltonianError("generalized Rabi frequency is zero")
    theta = np.arctan2(np.abs(s.rabi), s.detuning)
    p1 = np.sin(theta / 2.0) ** 2
    return _scalar(p1), _scalar(1.0 - p1)


def adiabaticity_metric(t, drive=None):
    """|Omega_R dDelta/dt - dOmega_R/dt Delta| / Omega^3 from analytic derivatives.

    ``drive`` may be an :class:`AEParams` (wrapped in :class:`AEDrive`) or any
    drive object exposing ``derivative``. Values well below one indicate
    adiabatic following; no threshold is applied here.
    """
    if drive is None:
        drive = AEDrive()
    elif isinstance(drive, AEParams):
        drive = AEDrive(drive)
    s = drive(t)
    d_rabi, d_det = drive.derivative(t)
    omega = np.hypot(s.detuning, s.rabi)
    if np.any(omega == 0):
        raise DegenerateHamiltonianError("generalized Rabi frequency is zero")
    return _scalar(np.abs(s.rabi * d_det - d_rabi * s.detuning) / omega**3)
