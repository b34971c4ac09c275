"""Reference scenario configurations.

One shared calibration reproduces the reported operating point of the
two-node link at desk scale:

* memory storage efficiencies of 3.25% / 4.50% at a 6.5 us spin dwell with
  a 12.5 kHz spin linewidth and 62.5% write efficiency;
* source cross-correlations of 92 @ 3.55 mW and 157 @ 4.2 mW fixing the
  inverse pump laws, operating powers of 2.95 / 3.65 mW;
* per-node noise parameters (mu1) fitted so the predicted post-storage
  cross-correlations equal the measured 13 and 22;
* pair number per temporal mode fitted to the measured multiplexed
  heralding-rate slope of 1.505 cps/mode (which also reproduces the
  conditional feed-forward heralding rate near 510 cps);
* interferometer phase jitter set so the classical signal visibility
  averages 87%.

All other figures (visibilities, concurrence scale, dead-time and window
scalings, link budget) follow from these choices with no further tuning.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .linksim import AnalysisSettings, ScenarioConfig, ScheduleModel
from .models import ChannelModel, MemoryModel, SourceModel

GAMMA_INH = 12.5e3
TAU_AFC = 10e-6
T_S = 6.5e-6
MODE_DURATION = 400e-9
ETA_WRITE = 0.625

# eta0 chosen so the full storage efficiency at T_S = 6.5 us is exactly
# 3.25% (node A) and 4.50% (node B)
_ETA_INH_65 = math.exp(-((T_S * GAMMA_INH * math.pi) ** 2) / (2 * math.log(2)))
ETA0_A = 0.0325 / _ETA_INH_65
ETA0_B = 0.045 / _ETA_INH_65

# quoted dephasing factor used for readout-efficiency bookkeeping; the
# printed formula gives 0.954 at 6.5 us, the quoted chain uses 0.804
ETA_INH_QUOTED = 0.804

A_COEFF_A = 1.0 / ((92.0 - 1.0) * 3.55)
A_COEFF_B = 1.0 / ((157.0 - 1.0) * 4.2)
PUMP_A = 2.95
PUMP_B = 3.65
ETA_H = 0.20

# mu1 per node from inverting the g2 model at the operating pump power
# against the measured cross-correlations 13 (A) and 22 (B)
MU1_A = 0.0147060
MU1_B = 0.0083631

# pairs per temporal mode from the multiplexed heralding slope
MU = 2.8026e-3

ETA_SETUP = 0.10
ETA_DET = 0.71
ETA_S = 0.90
ETA_I = 0.90
V_DFG_CLASS = 0.95
V_SIGNAL_CLASS = 0.87
PHASE_JITTER_SIGMA = math.sqrt(-2.0 * math.log(V_SIGNAL_CLASS))

DEAD_TIME_CONDITIONAL = 200e-6
DEAD_TIME_UNCONDITIONAL = 100e-6
PUMP_OFF_TIME = 20e-6
N_MODES = 15

PREP_PERIOD = 1.0
PREP_DURATION = 0.6
T_MEAS = 18e-3
T_LOCK_DIRECT = 10.5e-3
T_LOCK_FRINGE = 3e-3
T_PHASE_FRINGE = 5e-3

N_SETPOINTS = 13


def phase_setpoints(n: int = N_SETPOINTS) -> tuple[float, ...]:
    """Evenly spaced commanded phases covering a full fringe."""
    return tuple(2.0 * math.pi * k / (n - 1) for k in range(n))


def _memory(eta0: float, dead_time: float) -> MemoryModel:
    return MemoryModel(
        eta0=eta0,
        gamma_inh=GAMMA_INH,
        eta_write=ETA_WRITE,
        tau_afc=TAU_AFC,
        dead_time=dead_time,
        mode_duration=MODE_DURATION,
        eta_inh_override=ETA_INH_QUOTED,
    )


def _source(pump: float, a_coeff: float, mu1: float, pump_factor: float) -> SourceModel:
    return SourceModel(
        mu=MU * pump_factor,
        eta_H=ETA_H,
        pump_power=pump * pump_factor,
        a_coeff=a_coeff,
        mu1=mu1,
    )


def channel() -> ChannelModel:
    return ChannelModel(
        eta_setup=ETA_SETUP,
        eta_det=ETA_DET,
        idler_fiber_transmission=1.0,
        signal_class_visibility=V_SIGNAL_CLASS,
        dfg_class_visibility=V_DFG_CLASS,
        eta_s=ETA_S,
        eta_i=ETA_I,
        dark_count_rate=0.0,
    )


def _base(protocol: str, schedule: ScheduleModel, dead_time: float,
          duration: float, seed: int, pump_factor: float = 1.0,
          feed_forward: bool = False) -> ScenarioConfig:
    fringe = protocol in ("fringe_scan", "unconditional")
    return ScenarioConfig(
        source_A=_source(PUMP_A, A_COEFF_A, MU1_A, pump_factor),
        source_B=_source(PUMP_B, A_COEFF_B, MU1_B, pump_factor),
        memory_A=_memory(ETA0_A, dead_time),
        memory_B=_memory(ETA0_B, dead_time),
        channel=channel(),
        schedule=schedule,
        T_S=T_S,
        protocol=protocol,
        seed=seed,
        duration=duration,
        feed_forward=feed_forward,
        phase_setpoints=phase_setpoints() if fringe else (),
        signal_phase_jitter_sigma=PHASE_JITTER_SIGMA if fringe else 0.0,
        analysis=AnalysisSettings(),
    )


def direct_schedule() -> ScheduleModel:
    """Lock/measure cycle for direct-detection (population) runs."""
    return ScheduleModel(
        t_lock=T_LOCK_DIRECT, t_phase=0.0, t_meas=T_MEAS,
        prep_period=PREP_PERIOD, prep_duration=PREP_DURATION,
        pump_off_time=PUMP_OFF_TIME,
    )


def fringe_schedule() -> ScheduleModel:
    """Lock/measure cycle with the extra signal phase-lock slot."""
    return ScheduleModel(
        t_lock=T_LOCK_FRINGE, t_phase=T_PHASE_FRINGE, t_meas=T_MEAS,
        prep_period=PREP_PERIOD, prep_duration=PREP_DURATION,
        pump_off_time=PUMP_OFF_TIME,
    )


def multiplexed_schedule(dead_time: float = DEAD_TIME_UNCONDITIONAL,
                         n_modes: int = N_MODES) -> ScheduleModel:
    return ScheduleModel(
        t_lock=T_LOCK_FRINGE, t_phase=T_PHASE_FRINGE, t_meas=T_MEAS,
        prep_period=PREP_PERIOD, prep_duration=PREP_DURATION,
        pump_off_time=PUMP_OFF_TIME, spdc_cycle=dead_time,
        open_window=n_modes * MODE_DURATION, n_modes=n_modes,
    )


def conditional_tomography(duration: float = 60.0, seed: int = 20260101) -> ScenarioConfig:
    """Herald-triggered storage, direct detection of both memory outputs."""
    return _base("conditional", direct_schedule(), DEAD_TIME_CONDITIONAL,
                 duration, seed)


def fringe_scan(duration: float = 60.0, seed: int = 20260102,
                feed_forward: bool = False) -> ScenarioConfig:
    """Herald-triggered storage with phase-stepped interference detection."""
    return _base("fringe_scan", fringe_schedule(), DEAD_TIME_CONDITIONAL,
                 duration, seed, feed_forward=feed_forward)


def unconditional_multiplexed(duration: float = 600.0, seed: int = 20260103,
                              dead_time: float = DEAD_TIME_UNCONDITIONAL,
                              n_modes: int = N_MODES) -> ScenarioConfig:
    """Clocked multi-mode storage with interference detection."""
    cfg = _base("unconditional", multiplexed_schedule(dead_time, n_modes),
                dead_time, duration, seed)
    return replace(
        cfg,
        memory_A=replace(cfg.memory_A, dead_time=dead_time),
        memory_B=replace(cfg.memory_B, dead_time=dead_time),
    )


def transparency(duration: float = 300.0, seed: int = 20260104,
                 pump_factor: float = 1.0) -> ScenarioConfig:
    """Storage bypassed; direct detection at a scaled pump power."""
    cfg = _base("transparency", direct_schedule(), DEAD_TIME_CONDITIONAL,
                duration, seed, pump_factor=pump_factor)
    return replace(cfg, analysis=AnalysisSettings(window=800e-9))


PRESETS = {
    "conditional": conditional_tomography,
    "fringe": fringe_scan,
    "unconditional": unconditional_multiplexed,
    "transparency": transparency,
}
