"""Otto cycle on two Heisenberg-coupled spins: mean values, TPM statistics and TUR checks."""

__version__ = "0.1.0"

from .cycle import (  # noqa: E402
    AsymptoticLimits,
    CycleObservables,
    EngineParams,
    RegimeLabel,
    asymptotic_limits,
    classify_regime,
    cycle_observables,
    efficiency,
    entropy_production,
    mean_heat,
    mean_work,
    work_variance,
)
from .spectrum import energies, magnetic_observables, thermal_point  # noqa: E402

__all__ = [
    "AsymptoticLimits",
    "CycleObservables",
    "EngineParams",
    "RegimeLabel",
    "asymptotic_limits",
    "classify_regime",
    "cycle_observables",
    "efficiency",
    "energies",
    "entropy_production",
    "magnetic_observables",
    "mean_heat",
    "mean_work",
    "thermal_point",
    "work_variance",
]
