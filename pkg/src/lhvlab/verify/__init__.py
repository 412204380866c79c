"""Quantum-side oracles, statistical comparison and Bell-scenario tools."""
from .behavior import (
    MATCH_FLOOR,
    Behavior,
    Scenario,
    Settings,
    born_behavior,
    born_table,
    compare,
    no_signalling_check,
)
from .bell import (
    BellInequality,
    chsh_correlator_form,
    chsh_probability_form,
    chsh_value,
    correlation_tensor,
    deterministic_strategies,
    dof_count,
    kg_constants,
    local_bound,
    maximize_chsh,
    werner_region_chain,
)
from .closed_form import closed_form_behavior, hirsch_table, toth_acin_table, werner_pm_table, werner_table
from .integrals import (
    SIMPLEX_KINDS,
    Estimate,
    bloch_halfsphere_oracle,
    halfsphere_closed_forms,
    simplex_closed_form,
    simplex_integral_oracle,
    simplex_integral_oracles,
)
from .tables import monotonicity_flags, threshold_rows, thresholds_csv

__all__ = [name for name in dir() if not name.startswith("_")]
