"""
Two-point-measurement (TPM) work statistics of a closed two-level protocol.

The system starts in the Gibbs state of the initial Hamiltonian H_i, is
measured in the eigenbasis of H_i, evolves under U, and is measured in the
eigenbasis of the final Hamiltonian H_f. For a two-level system the work
distribution has exactly four atoms

    W_nm = E_m^f - E_n^i,    p_nm = P_n^i |<m|U|n>|^2.

Moments are available both from these atoms and from trace formulas in
terms of U, H_i, H_f and rho(0); the two routes agree to rounding and are
used to cross-check one another.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .protocol import AEDrive, AEParams, RescaledDrive, hamiltonian
from .propagate import TimeGrid, evolve, propagator_distance

UNITARITY_TOL = 1e-8
EQUALITY_TOL = 1e-6
LABELS = ("+", "-")


class NonUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class ThermalSpec:
    """Inverse temperature with k_B = 1; zero is the infinite-temperature limit."""

    beta_thermal: float = 1.0

    def __post_init__(self):
        if not (self.beta_thermal >= 0 and math.isfinite(self.beta_thermal)):
            raise ValueError(f"beta_thermal must be finite and >= 0, got {self.beta_thermal}")


def _as_spec(spec) -> ThermalSpec:
    return spec if isinstance(spec, ThermalSpec) else ThermalSpec(float(spec))


def eigendecomposition(h):
    """Eigenvalues in descending order (+, -) and matching eigenvector columns.

    Each eigenvector's first non-negligible component is made real and
    positive so that results are reproducible.
    """
    h = np.asarray(h, dtype=complex)
    energies, vectors = np.linalg.eigh(h)
    energies, vectors = energies[::-1], vectors[:, ::-1].copy()
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-12))
        vectors[:, k] = col * (abs(col[idx]) / col[idx])
    return energies, vectors


def _check_unitary(u):
    u = np.asarray(getattr(u, "u", u), dtype=complex)
    if np.linalg.norm(u.conj().T @ u - np.eye(len(u))) > UNITARITY_TOL:
        raise NonUnitaryError("evolution operator is not unitary")
    return u


@dataclass(frozen=True)
class GibbsState:
    energies: np.ndarray       # (E_+, E_-)
    vectors: np.ndarray        # eigenvector columns
    probabilities: np.ndarray  # Boltzmann weights, same order

    @property
    def p_plus(self) -> float:
        return float(self.probabilities[0])

    @property
    def p_minus(self) -> float:
        return float(self.probabilities[1])

    def density_matrix(self) -> np.ndarray:
        v = self.vectors
        return (v * self.probabilities) @ v.conj().T


def gibbs_probabilities(h_i, spec=ThermalSpec()) -> GibbsState:
    beta = _as_spec(spec).beta_thermal
    energies, vectors = eigendecomposition(h_i)
    # shift by the ground energy to keep exp() finite at low temperature
    weights = np.exp(-beta * (energies - energies.min()))
    return GibbsState(energies, vectors, weights / weights.sum())


def transition_matrix(u, h_i, h_f) -> np.ndarray:
    """``T[n, m] = |<m|U|n>|^2`` with n labelling H_i and m labelling H_f eigenstates."""
    u = _check_unitary(u)
    _, v_i = eigendecomposition(h_i)
    _, v_f = eigendecomposition(h_f)
    amplitudes = v_f.conj().T @ u @ v_i  # [m, n]
    return (np.abs(amplitudes) ** 2).T


@dataclass(frozen=True)
class WorkMoments:
    mean: float
    second: float
    variance: float

    @property
    def fluctuation(self) -> float:
        return math.sqrt(max(self.variance, 0.0))


@dataclass(frozen=True)
class WorkDistribution:
    """Four TPM atoms, flattened in (n, m) order ++, +-, -+, --."""

    work: np.ndarray
    probability: np.ndarray
    energies_i: np.ndarray
    energies_f: np.ndarray
    initial: np.ndarray
    transitions: np.ndarray

    @property
    def labels(self):
        return [(n, m) for n in LABELS for m in LABELS]

    def atoms(self):
        return [(lab, float(w), float(p)) for lab, w, p in zip(self.labels, self.work, self.probability)]

    def moment(self, k: int) -> float:
        return float(np.sum(self.probability * self.work**k))

    def moments(self) -> WorkMoments:
        mean, second = self.moment(1), self.moment(2)
        return WorkMoments(mean, second, second - mean**2)

    def characteristic(self, r):
        r = np.asarray(r, dtype=float)
        out = np.sum(self.probability * np.exp(1j * np.multiply.outer(r, self.work)), axis=-1)
        return out if np.ndim(out) else complex(out)


def work_distribution(u, h_i, h_f, spec=ThermalSpec()) -> WorkDistribution:
    gibbs = gibbs_probabilities(h_i, spec)
    e_f, _ = eigendecomposition(h_f)
    trans = transition_matrix(u, h_i, h_f)
    work = (e_f[None, :] - gibbs.energies[:, None]).ravel()
    prob = (gibbs.probabilities[:, None] * trans).ravel()
    return WorkDistribution(work, prob, gibbs.energies, e_f, gibbs.probabilities, trans)


def _exp_i(h, r: float) -> np.ndarray:
    energies, vectors = np.linalg.eigh(np.asarray(h, dtype=complex))
    return (vectors * np.exp(1j * r * energies)) @ vectors.conj().T


def characteristic_function(r: float, u, h_i, h_f, spec=ThermalSpec()) -> complex:
    """tr{U^dag e^{i r H_f} U e^{-i r H_i} rho(0)}."""
    u = _check_unitary(u)
    rho = gibbs_probabilities(h_i, spec).density_matrix()
    return complex(np.trace(u.conj().T @ _exp_i(h_f, r) @ u @ _exp_i(h_i, -r) @ rho))


def moments(u, h_i, h_f, spec=ThermalSpec()) -> WorkMoments:
    """Work moments from averages of H_i, H_f and the cross correlation."""
    u = _check_unitary(u)
    h_i = np.asarray(h_i, dtype=complex)
    h_f = np.asarray(h_f, dtype=complex)
    rho = gibbs_probabilities(h_i, spec).density_matrix()
    hf_heis = u.conj().T @ h_f @ u

    hf_avg = np.trace(hf_heis @ rho).real
    hi_avg = np.trace(h_i @ rho).real
    hf2_avg = np.trace(hf_heis @ hf_heis @ rho).real
    hi2_avg = np.trace(h_i @ h_i @ rho).real
    cross = np.trace(hf_heis @ h_i @ rho).real

    mean = hf_avg - hi_avg
    second = hf2_avg + hi2_avg - 2.0 * cross
    variance = (hf2_avg + hi2_avg - 2.0 * cross
                - hf_avg**2 - hi_avg**2 + 2.0 * hf_avg * hi_avg)
    return WorkMoments(float(mean), float(second), float(variance))


def endpoint_hamiltonians(drive):
    """(H_i, H_f) evaluated at the two ends of the drive window."""
    return hamiltonian(drive(drive.t_start)), hamiltonian(drive(drive.t_end))


@dataclass
class WorkComparison:
    a: float
    beta_thermal: float
    mean_ref: float
    mean_tr: float
    fluct_ref: float
    fluct_tr: float
    propagator_distance: float
    tol: float = EQUALITY_TOL

    @property
    def mean_gap(self) -> float:
        return abs(self.mean_tr - self.mean_ref)

    @property
    def fluct_gap(self) -> float:
        return abs(self.fluct_tr - self.fluct_ref)

    @property
    def passed(self) -> bool:
        return self.mean_gap <= self.tol and self.fluct_gap <= self.tol

    def to_dict(self) -> dict:
        out = dict(vars(self))
        out.update(mean_gap=self.mean_gap, fluct_gap=self.fluct_gap, passed=self.passed)
        return out


@dataclass
class WorkReport:
    params: AEParams
    n_steps: int
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "params": vars(self.params),
            "n_steps": self.n_steps,
            "passed": self.passed,
            "rows": [r.to_dict() for r in self.rows],
        }


def compare_protocols(params: AEParams = AEParams(), a_values=(2.0, 10.0),
                      betas=(0.1, 1.0, 10.0), n_steps: int | None = None,
                      tol: float = EQUALITY_TOL) -> WorkReport:
    """Mean work and work fluctuation of the reference versus each rescaled protocol."""
    ref_drive = AEDrive(params)
    grid = TimeGrid.for_drive(ref_drive, n_steps)
    u_ref = evolve(ref_drive, grid)
    hi_ref, hf_ref = endpoint_hamiltonians(ref_drive)
    report = WorkReport(params, grid.n_steps)

    specs = [_as_spec(b) for b in betas]
    for a in a_values:
        if not a > 0:
            raise ValueError(f"contraction parameters must be positive, got {a}")
        tr_drive = RescaledDrive(params, a)
        u_tr = evolve(tr_drive, TimeGrid.for_drive(tr_drive, grid.n_steps))
        hi_tr, hf_tr = endpoint_hamiltonians(tr_drive)
        dist = propagator_distance(u_ref, u_tr)
        for spec in specs:
            m_ref = moments(u_ref, hi_ref, hf_ref, spec)
            m_tr = moments(u_tr, hi_tr, hf_tr, spec)
            report.rows.append(WorkComparison(
                float(a), spec.beta_thermal, m_ref.mean, m_tr.mean,
                m_ref.fluctuation, m_tr.fluctuation, dist, tol))
    return report
