"""Translational laser-cooling simulator for neutral molecules.

Evolves internal-state-resolved momentum populations through repeated
velocity-selection / Raman-deceleration / accumulation cycles and tracks the
internal, centre-of-mass, total and radiation entropies.
"""

__version__ = "0.1.0"

from .engine import CoolingConfig, CoolingModel, run_process  # noqa: E402
from .estimates import PhysicalInputs, estimate_report  # noqa: E402

__all__ = ["CoolingConfig", "CoolingModel", "PhysicalInputs", "estimate_report", "run_process"]
