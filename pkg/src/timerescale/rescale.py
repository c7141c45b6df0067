"""
Time-rescaling map for shortening a reference protocol.

The map

    f(tau) = a*tau - (a - 1) * t_f / (2*pi*a) * sin(2*pi*a*tau / t_f)

sends the fast time window [0, t_f/a] onto the reference window [0, t_f].
Its derivative

    f'(tau) = a - (a - 1) * cos(2*pi*a*tau / t_f)

equals 1 at both ends of the window, so the rescaled Hamiltonian
H[f(tau)] * f'(tau) coincides with the reference one at the start and the end
of the protocol. For a >= 1 the derivative lies in [1, 2a - 1].

All quantities use natural units (hbar = 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

TOL_ROOT = 1e-12
# Relative slack on window edges so that t_f/a computed in floating point is accepted.
_EDGE_SLACK = 1e-12


class DomainError(ValueError):
    """Raised when a protocol function is evaluated outside its time window."""


class ConvergenceError(RuntimeError):
    """Raised when the numerical inverse of the map fails to converge."""


@dataclass(frozen=True)
class RescaleMap:
    """Contraction parameter ``a`` and reference duration ``t_f``."""

    a: float
    t_f: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"contraction parameter must be positive, got a={self.a}")
        if not (self.t_f > 0 and math.isfinite(self.t_f)):
            raise ValueError(f"duration must be positive, got t_f={self.t_f}")

    @property
    def duration(self) -> float:
        """Length of the rescaled window, t_f / a."""
        return self.t_f / self.a

    @property
    def is_monotone(self) -> bool:
        # f' >= 2a - 1 >= 0 for a >= 1/2
        return self.a >= 0.5

    def _check_window(self, tau, upper):
        tau = np.asarray(tau, dtype=float)
        slack = _EDGE_SLACK * upper
        if np.any(tau < -slack) or np.any(tau > upper + slack) or np.any(np.isnan(tau)):
            raise DomainError(f"time outside protocol window [0, {upper}]")
        return tau

    def _phase(self, tau):
        return 2.0 * np.pi * self.a * tau / self.t_f

    def f(self, tau):
        """Reference time reached at rescaled time ``tau``."""
        tau = self._check_window(tau, self.duration)
        return self._f(tau)

    def _f(self, tau):
        a = self.a
        out = a * tau - (a - 1.0) * self.t_f / (2.0 * np.pi * a) * np.sin(self._phase(tau))
        return out if np.ndim(out) else float(out)

    def f_prime(self, tau):
        tau = self._check_window(tau, self.duration)
        return self._f_prime(tau)

    def _f_prime(self, tau):
        a = self.a
        out = a - (a - 1.0) * np.cos(self._phase(tau))
        return out if np.ndim(out) else float(out)

    def f_second(self, tau):
        """Second derivative of the map, used for analytic drive derivatives."""
        tau = self._check_window(tau, self.duration)
        a = self.a
        out = (a - 1.0) * (2.0 * np.pi * a / self.t_f) * np.sin(self._phase(tau))
        return out if np.ndim(out) else float(out)

    def inverse(self, t, tol: float = TOL_ROOT, max_iter: int = 200):
        """Rescaled time ``tau`` with ``f(tau) = t``.

        Bisection narrows the bracket to 1e-6 relative width, then Newton
        iterations (kept inside the bracket) polish to ``tol * t_f``.
        Requires a monotone map (a >= 1/2).
        """
        if not self.is_monotone:
            raise ValueError(f"map is not monotone for a={self.a}; inverse undefined")
        t = self._check_window(t, self.t_f)
        if t.ndim:
            return np.array([self._inverse_scalar(float(x), tol, max_iter) for x in t.ravel()]).reshape(t.shape)
        return self._inverse_scalar(float(t), tol, max_iter)

    def _inverse_scalar(self, t: float, tol: float, max_iter: int) -> float:
        t = min(max(t, 0.0), self.t_f)
        if t == 0.0:
            return 0.0
        if t == self.t_f:
            return self.duration
        target = tol * self.t_f
        lo, hi = 0.0, self.duration
        for _ in range(max_iter):
            if hi - lo <= 1e-6 * self.duration:
                break
            mid = 0.5 * (lo + hi)
            if self._f(mid) < t:
                lo = mid
            else:
                hi = mid
        tau = 0.5 * (lo + hi)
        for _ in range(max_iter):
            resid = self._f(tau) - t
            if abs(resid) <= target:
                return tau
            if resid < 0:
                lo = tau
            else:
                hi = tau
            slope = self._f_prime(tau)
            step = tau - resid / slope if slope > 0 else None
            tau = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        raise ConvergenceError(
            f"inverse did not reach tolerance {tol} for t={t} (a={self.a}, t_f={self.t_f})"
        )


def f_eval(tau, rmap: RescaleMap):
    return rmap.f(tau)


def f_prime(tau, rmap: RescaleMap):
    return rmap.f_prime(tau)


def f_inverse(t, rmap: RescaleMap, tol: float = TOL_ROOT):
    return rmap.inverse(t, tol=tol)


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    required: bool = True
    note: str = ""


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_map`; ``ok`` ignores informational checks."""

    a: float
    t_f: float
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def failures(self):
        return [c for c in self.checks if c.required and not c.passed]

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "t_f": self.t_f,
            "ok": self.ok,
            "checks": [vars(c) for c in self.checks],
            "warnings": list(self.warnings),
        }


def validate_map(rmap: RescaleMap, tol: float = 1e-12, n_grid: int = 10001) -> ValidationReport:
    """Check the four shortcut properties of ``rmap``.

    (i)   f^-1(0) = 0
    (ii)  f^-1(t_f) < t_f            (required only for a > 1)
    (iii) f'(f^-1(0)) = 1
    (iv)  f'(f^-1(t_f)) = 1
    plus a dense-grid lower bound f' >= 1 - tol (required only for a >= 1).
    """
    report = ValidationReport(a=rmap.a, t_f=rmap.t_f)
    scale = rmap.t_f
    add = report.checks.append

    if rmap.is_monotone:
        tau0 = rmap.inverse(0.0)
        tau1 = rmap.inverse(rmap.t_f)
    else:
        # f is not invertible; fall back on the analytic preimages
        tau0, tau1 = 0.0, rmap.duration
        report.warnings.append("map is not monotone (a < 1/2); analytic endpoints used")

    add(Check("initial_time", abs(tau0) <= tol * scale, abs(tau0)))

    if rmap.a > 1:
        add(Check("faster", tau1 < rmap.t_f, rmap.t_f - tau1))
    elif rmap.a == 1:
        add(Check("faster", True, 0.0, required=False, note="a = 1 is the identity map (not faster)"))
        report.warnings.append("a = 1: rescaled protocol has the reference duration (not faster)")
    else:
        add(Check("faster", False, rmap.t_f - tau1, required=False, note="slower than reference"))
        report.warnings.append(f"a = {rmap.a} < 1: slower than reference")

    r0 = abs(rmap.f_prime(tau0) - 1.0)
    r1 = abs(rmap.f_prime(tau1) - 1.0)
    add(Check("initial_hamiltonian", r0 <= tol, r0))
    add(Check("final_hamiltonian", r1 <= tol, r1))

    grid = np.linspace(0.0, rmap.duration, n_grid)
    min_fp = float(np.min(rmap.f_prime(grid)))
    if rmap.a >= 1:
        add(Check("fprime_lower_bound", min_fp >= 1.0 - tol, 1.0 - min_fp))
    else:
        add(Check("fprime_lower_bound", min_fp >= 1.0 - tol, 1.0 - min_fp, required=False,
                  note="not applicable for a < 1"))
    return report
