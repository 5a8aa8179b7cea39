"""Anti-Stokes response of a four-mirror cavity with two coherently driven mirrors.

Quick start::

    from fano_forge import get_preset, run_sweep, extract_features
    spec = run_sweep(get_preset("fig3a_blue"))
    extract_features(spec)
"""

from .errors import ConvergenceError, IntegrationError, SingularityError
from .params import (DerivedCouplings, PhysicalParams, derive_couplings,
                     paper_params)
from .presets import ScenarioPreset, get_preset, preset_names, registry
from .response import (SidebandSolution, chi, eta_as, exact_sidebands,
                       linearized_a1, sidebands_linear_system)
from .steady_state import SteadyState, solve_steady_state
from .sweep import (CalibrationTarget, DetuningGrid, SpectrumResult,
                    calibrate_probe_power, extract_features, oracle_check,
                    run_sweep)

__all__ = [
    "CalibrationTarget", "ConvergenceError", "DerivedCouplings", "DetuningGrid",
    "IntegrationError", "PhysicalParams", "ScenarioPreset", "SidebandSolution",
    "SingularityError", "SpectrumResult", "SteadyState", "calibrate_probe_power",
    "chi", "derive_couplings", "eta_as", "exact_sidebands", "extract_features",
    "get_preset", "linearized_a1", "oracle_check", "paper_params", "preset_names",
    "registry", "run_sweep", "sidebands_linear_system", "solve_steady_state",
]
__version__ = "0.1.0"
