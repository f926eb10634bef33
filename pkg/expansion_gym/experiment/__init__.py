from .simulation import SimConfig, simulate_candidate_demand, make_synthetic_region
from .gains import GainRecord, DrawOutcome, GainSweep, run_gain_sweep, robustness_check, evaluate_draws
