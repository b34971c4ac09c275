"""Simulator and analysis toolkit for a telecom-heralded, temporally
multiplexed entanglement link between two spin-wave quantum memories.

Layout:

* :mod:`qlink.models` -- closed-form component models (memory efficiency,
  source statistics, visibility budget, entanglement threshold).
* :mod:`qlink.tomography` -- density-matrix assembly and entanglement
  metrics.
* :mod:`qlink.tsanalysis` -- timestamp analysis: histograms, g2, fringe
  fits, window / mode / dead-time sweeps.
* :mod:`qlink.linksim` -- the seeded Monte Carlo engine and rate budget.
* :mod:`qlink.pipeline` -- simulate-then-analyse orchestration.
* :mod:`qlink.presets` -- the calibrated reference scenarios.
* :mod:`qlink.fileio`, :mod:`qlink.cli` -- file formats and the command
  line.
"""

from .linksim import (
    AnalysisSettings,
    RateBudget,
    ScenarioConfig,
    ScheduleModel,
    calibrate_noise,
    duty_cycle,
    link_budget,
    run,
)
from .models import ChannelModel, MemoryModel, SourceModel
from .streams import DetectionRecord, EventStream, RecordSet
from .values import ValueWithError

__version__ = "1.0.0"

__all__ = [
    "AnalysisSettings",
    "ChannelModel",
    "DetectionRecord",
    "EventStream",
    "MemoryModel",
    "RateBudget",
    "RecordSet",
    "ScenarioConfig",
    "ScheduleModel",
    "SourceModel",
    "ValueWithError",
    "calibrate_noise",
    "duty_cycle",
    "link_budget",
    "run",
    "__version__",
]
