"""Dual-output step-down current-fed push-pull DC-DC converter toolkit.

Two independent engines (closed-form and event-driven transient), a
soft-switching analyzer, and the closed-form design calculators.
"""

from .analytic import (AnalyticState, ModeSegment, SteadyStateSolution,
                       eval_state, sample_waveforms, solve_steady_state)
from .config import LoadedConfig, load_config, parse_si
from .design import (DesignInputs, DesignResult, OperatingPoint, duty_for_gain,
                     extended_duty, input_inductance, leakage_for_zcs,
                     leakage_total_for_duty, operating_point, solve_design,
                     voltage_gain)
from .errors import (AnalyzerError, CfppError, ConfigError, ConvergenceError,
                     DegenerateNetworkError, ParameterError)
from .params import ConverterParams, DerivedConstants, derive, validate
from .pwm import GateSchedule, build_schedule, gate_state, sample_gates
from .softswitch import (SoftSwitchReport, Thresholds, analyze,
                         compare_to_reference, dominant_frequency)
from .transient import (CircuitState, SimConfig, SteadyStateMetrics,
                        circuit_state, detect_next_event, simulate,
                        steady_state_metrics)
from .verify import CheckResult, run_verification
from .waveio import WAVEFORM_COLUMNS, Event, WaveformSet, params_hash

__version__ = "0.1.0"
