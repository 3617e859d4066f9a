"""Numerical simulator of a (1+1)d SU(2) lattice gauge model on six-level qudits.

Modules:
  core_model      frozen single-site matrix catalog, Hamiltonian assembly
  rishon          independent derivation of the site matrices from fermions
  exact_engine    Krylov time evolution and observable bookkeeping
  digital_engine  Trotter circuits with four entangling-gate back-ends
  perturbation    strong-coupling effective models and the baryon hopping rate
  noise           static field-noise ensembles and link-parity post-selection
  cli             scenario runner (CSV time series + JSON manifests)
"""

from .core_model import ModelParams, build_hamiltonian, site_matrices
from .digital_engine import GateScheme, PhononConfig, TrotterPlan, gate_count, trotter_run
from .exact_engine import (
    CapacityError,
    KrylovError,
    ObservableSeries,
    QuditState,
    dirac_vacuum,
    evolve,
    measure,
    string_state,
)
from .noise import NoiseEnsemble, performance, run_noisy_ensemble
from .perturbation import jeff

__all__ = [
    "CapacityError",
    "GateScheme",
    "KrylovError",
    "ModelParams",
    "NoiseEnsemble",
    "ObservableSeries",
    "PhononConfig",
    "QuditState",
    "TrotterPlan",
    "build_hamiltonian",
    "dirac_vacuum",
    "evolve",
    "gate_count",
    "jeff",
    "measure",
    "performance",
    "run_noisy_ensemble",
    "site_matrices",
    "string_state",
    "trotter_run",
]

__version__ = "0.1.0"
