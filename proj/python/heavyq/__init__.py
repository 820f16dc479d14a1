"""Heavy-charge energy loss in the lattice Schwinger model (C++ core)."""

from ._core import (
    ConfigError,
    NumericalError,
    Trajectory,
    canonical_config,
    cnot_cost_trotter_step,
    config_hash,
    evolve,
    free_dispersion,
    ground_state,
    group_velocity,
    hamiltonian_terms,
    max_group_velocity,
    qasm_cnot_count,
    state_prep_formula,
    version,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "NumericalError",
    "Trajectory",
    "canonical_config",
    "cnot_cost_trotter_step",
    "config_hash",
    "evolve",
    "free_dispersion",
    "ground_state",
    "group_velocity",
    "hamiltonian_terms",
    "max_group_velocity",
    "qasm_cnot_count",
    "state_prep_formula",
    "version",
]
