"""Age-of-information analysis and simulation for Poisson bipolar
random-access networks under LCFS-with-replacement scheduling."""

from .params import (DerivedParams, ParamError, Region, SystemParams,
                     derive, parse_config, params_from_config)
from .geometry import BipolarTopology, StoppingSet, sample_bipolar, torus_distance
from .simulator import SimMetrics, backend_name, queue_oracle, run

__version__ = "0.1.0"

__all__ = [
    "SystemParams", "DerivedParams", "Region", "ParamError", "derive",
    "parse_config", "params_from_config",
    "BipolarTopology", "StoppingSet", "sample_bipolar", "torus_distance",
    "SimMetrics", "backend_name", "queue_oracle", "run",
    "__version__",
]
