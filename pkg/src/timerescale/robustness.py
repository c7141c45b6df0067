"""
Fidelity of the rescaled inversion under systematic control errors.

Errors enter at the parameter level: a Rabi error rescales the peak amplitude
Omega_0 -> Omega_0 (1 + eps) and a detuning error rescales the chirp constant
beta^2 -> beta^2 (1 + delta). The fidelity is the final population of |2>
after starting in |1>.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .protocol import AEParams, RescaledDrive
from .propagate import TimeGrid, evolve

RABI = "rabi_error"
DETUNING = "detuning_error"
KINDS = (RABI, DETUNING)


class SweepError(RuntimeError):
    """Raised after a sweep when one or more points failed; carries ``(index, exception)`` pairs."""

    def __init__(self, failures):
        self.failures = failures
        lines = ", ".join(f"#{i}: {exc}" for i, exc in failures)
        super().__init__(f"{len(failures)} sweep point(s) failed: {lines}")


def fidelity(params: AEParams, a: float = 1.0, eps: float = 0.0, delta_err: float = 0.0,
             n_steps: int | None = None) -> float:
    """Final P2 of the rescaled protocol with contraction ``a`` and the given errors.

    ``a`` may also be a :class:`~timerescale.rescale.RescaleMap`, whose ``a`` is used.
    """
    a = getattr(a, "a", a)
    drive = RescaledDrive(params.perturbed(eps, delta_err), a)
    u = evolve(drive, TimeGrid.for_drive(drive, n_steps)).u
    # psi0 = |1>, so the final state is the first column
    return float(abs(u[1, 0]) ** 2)


def pi_pulse_fidelity(eps):
    """Square resonant pi pulse with Rabi error: sin^2((1 + eps) pi / 2)."""
    out = np.sin((1.0 + np.asarray(eps, dtype=float)) * np.pi / 2.0) ** 2
    return out if np.ndim(out) else float(out)


@dataclass
class SweepSpec:
    kind: str
    values: list
    a_values: list = field(default_factory=lambda: [1.0, 2.0, 10.0])
    base: AEParams = field(default_factory=AEParams)
    n_steps: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        self.values = [float(v) for v in self.values]
        self.a_values = [float(a) for a in self.a_values]
        if not self.values:
            raise ValueError("sweep needs at least one error value")
        if not self.a_values:
            raise ValueError("sweep needs at least one contraction parameter")
        if any(v <= -1 for v in self.values):
            raise ValueError("error fractions must be > -1")
        if any(not a > 0 for a in self.a_values):
            raise ValueError("contraction parameters must be positive")

    def points(self):
        return [(a, v) for a in self.a_values for v in self.values]


@dataclass
class SweepResult:
    kind: str
    rows: list  # (a, error_fraction, fidelity), ordered by a then error

    def fidelities(self, a: float) -> np.ndarray:
        return np.array([f for aa, _, f in self.rows if aa == a])

    def errors(self) -> np.ndarray:
        a0 = self.rows[0][0]
        return np.array([v for aa, v, _ in self.rows if aa == a0])

    def spread_over_a(self) -> float:
        """Largest max-minus-min fidelity over contraction parameters, per error value."""
        table = np.array([self.fidelities(a) for a in sorted({r[0] for r in self.rows})])
        return float(np.max(table.max(axis=0) - table.min(axis=0)))

    def min_fidelity(self) -> float:
        return min(f for _, _, f in self.rows)


def sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Fidelity at every (a, error) pair of ``spec``.

    With ``workers > 1`` points run in a thread pool; rows are always returned
    in (a, error) order.
    """
    points = spec.points()

    def run(point):
        a, value = point
        if spec.kind == RABI:
            return fidelity(spec.base, a, eps=value, n_steps=spec.n_steps)
        return fidelity(spec.base, a, delta_err=value, n_steps=spec.n_steps)

    def guarded(point):
        try:
            return run(point), None
        except Exception as exc:  # collected and re-raised with indices below
            return math.nan, exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(guarded, points))
    else:
        outcomes = [guarded(p) for p in points]

    failures = [(i, exc) for i, (_, exc) in enumerate(outcomes) if exc is not None]
    if failures:
        raise SweepError(failures)
    rows = [(a, v, f) for (a, v), (f, _) in zip(points, outcomes)]
    return SweepResult(spec.kind, rows)


def error_grid(lo: float = -0.2, hi: float = 0.2, n: int = 41) -> list:
    return [float(x) for x in np.linspace(lo, hi, n)]
