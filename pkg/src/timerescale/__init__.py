"""Time-rescaled shortcuts to adiabatic population inversion in a two-level system."""

__version__ = "0.1.0"

from .rescale import (ConvergenceError, DomainError, RescaleMap, ValidationReport, f_eval,
                      f_inverse, f_prime, validate_map)
from .protocol import (AEDrive, AEParams, ConstantDrive, DegenerateHamiltonianError, DriveSample,
                       Eigensystem2, RescaledDrive, adiabatic_populations, adiabaticity_metric,
                       ae_detuning, ae_rabi, eigensystem, hamiltonian, tr_detuning, tr_rabi)
from .propagate import (DEFAULT_STEPS, Propagator2, TimeGrid, Trajectory, basis_state, evolve,
                        evolve_trajectory, populations, propagator_distance, step_propagator)
from .robustness import SweepResult, SweepSpec, fidelity, pi_pulse_fidelity, sweep
from .workstats import (ThermalSpec, WorkDistribution, WorkMoments, characteristic_function,
                        compare_protocols, gibbs_probabilities, moments, transition_matrix,
                        work_distribution)
