import dataclasses
import logging
from typing import Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from .simulation import SimConfig, simulate_candidate_demand
from ..demand_models import DemandModel, predict_network
from ..error import DegenerateBaseline, ModelMismatch
from ..optimize import build_problem, resolve_solver, solve, solve_baseline
from ..seeding import child_seed, np_random

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class GainRecord:
    """
    One (s, draw, K) outcome: predicted totals z0 = f̂(S), z_b at the baseline and z_e at the optimized expansion,
    all under `model`. `gain` is (z_e - z_b) / (z_b - z0) · 100 and NaN when the baseline is degenerate.
    """
    region: str
    model: str
    s: float
    draw: int
    K: int
    z0: float
    z_b: float
    z_e: float
    gain: float
    degenerate: bool = False
    optimal: bool = True


@dataclasses.dataclass(frozen=True, eq=False)
class DrawOutcome:
    """Simulated candidate base sales of one draw with the baseline and optimized sets for every K."""
    s: float
    draw: int
    seed: int
    candidate_sales: np.ndarray
    baseline: Dict[int, Tuple[int, ...]]
    optimized: Dict[int, Tuple[int, ...]]
    proven: Dict[int, bool] = dataclasses.field(default_factory=dict)


@dataclasses.dataclass(frozen=True, eq=False)
class GainSweep:
    region: str
    model: str
    solver: str
    K_max: int
    records: List[GainRecord]
    draws: List[DrawOutcome]

    @property
    def excluded(self):
        return sum(record.degenerate for record in self.records)

    @property
    def non_optimal(self):
        """Records whose optimized set was not proven optimal (heuristic solver or exhausted search budget)."""
        return sum(not record.optimal for record in self.records)

    def frame(self):
        return pd.DataFrame([dataclasses.asdict(record) for record in self.records],
                            columns=[field.name for field in dataclasses.fields(GainRecord)])

    def table(self):
        """Draw-averaged gains, K by s. Degenerate records are left out of the means."""
        frame = self.frame()
        frame = frame[~frame['degenerate']]
        table = frame.groupby(['K', 's'])['gain'].mean().unstack('s')
        return table.reindex(range(1, self.K_max + 1))

    def summary(self):
        frame = self.frame()
        summary = frame.groupby(['s', 'K']).agg(mean_gain=('gain', 'mean'), sd_gain=('gain', 'std'),
                                                draws=('gain', 'count'), excluded=('degenerate', 'sum'))
        return summary.reset_index()


def run_gain_sweep(network, model: DemandModel, sim: SimConfig, solver='auto', region='region', strict=False,
                   **solver_kwargs):
    """
    Optimized (EO) vs baseline (BM) expansions over simulated candidate demand.

    For every s and draw, candidate base sales are drawn with σ = 4^s and injected into the network (features and
    spatial lags both see them). BM takes the top-K candidates by base sales; EO solves the expansion problem under
    `model` with `solver` (`auto` follows the model). z0, z_b and z_e are all predicted by `model`. Greedy,
    baseline and sort expansions grow by one site per K, so they are solved once at K_max.
    """
    candidates = network.candidates
    K_max = sim.K_max
    if K_max > len(candidates):
        logger.warning('K_max=%d exceeds the %d candidates; capping', K_max, len(candidates))
        K_max = len(candidates)
    solver = resolve_solver(model, solver)

    rng = np_random(sim.seed, stream='simulation')
    draws = []
    for s in sim.s_values:
        for draw in range(sim.draws_per_sigma):
            seed = child_seed(rng)
            g = simulate_candidate_demand(network, SimConfig.sigma(s), seed=seed)
            drawn = network.with_base_sales(dict(zip(candidates, g)))
            problem = build_problem(model, drawn, K_max, solver=solver)

            baseline = solve_baseline(problem).order
            optimized, proven = {}, {}
            if solver in NESTED_SOLVERS:
                order = solve(problem, solver).order
                for K in range(1, K_max + 1):
                    optimized[K] = tuple(sorted(order[:K]))
                    proven[K] = solver == 'sort' or K == 1
            else:
                for K in range(1, K_max + 1):
                    solution = solve(dataclasses.replace(problem, K=K), solver, **solver_kwargs)
                    optimized[K], proven[K] = solution.chosen, solution.optimal
            draws.append(DrawOutcome(s=s, draw=draw, seed=seed, candidate_sales=g,
                                     baseline={K: tuple(sorted(baseline[:K])) for K in range(1, K_max + 1)},
                                     optimized=optimized, proven=proven))
            logger.info('Sweep %s: s=%s draw %d done', region, s, draw)

    records = evaluate_draws(network, model, draws, region=region, strict=strict)
    sweep = GainSweep(region=region, model=model.family, solver=solver, K_max=K_max, records=records, draws=draws)
    if sweep.excluded:
        logger.warning('Sweep %s: %d degenerate baseline records excluded from the means', region, sweep.excluded)
    if sweep.non_optimal:
        logger.warning('Sweep %s: %d optimized sets not proven optimal', region, sweep.non_optimal)
    return sweep


def robustness_check(network, sweep: GainSweep, models: Mapping[str, DemandModel], reference=None, strict=False):
    """
    Re-scores the sweep's fixed baseline and optimized sets under other models. Each entry keeps the chosen sets
    and recomputes z0, z_b and z_e with the alternate model, so negative gains are possible.
    """
    results = {}
    for label, model in models.items():
        if reference is not None and model.feature_spec != reference.feature_spec:
            raise ModelMismatch('model {} uses {} but the sweep model uses {}'.format(
                label, model.feature_spec, reference.feature_spec))
        records = evaluate_draws(network, model, sweep.draws, region=sweep.region, label=label, strict=strict)
        results[label] = GainSweep(region=sweep.region, model=label, solver=sweep.solver, K_max=sweep.K_max,
                                   records=records, draws=sweep.draws)
        logger.info('Robustness %s under %s: %d records', sweep.region, label, len(records))
    return results


def evaluate_draws(network, model: DemandModel, draws, region='region', label=None, strict=False):
    """Gain records of fixed expansions under `model`, ordered by (s, draw, K)."""
    label = label or model.family
    fixed = np.asarray(network.active, dtype=int)
    records = []
    for outcome in draws:
        drawn = network.with_base_sales(dict(zip(network.candidates, outcome.candidate_sales)))
        z0 = predict_network(model, drawn, fixed)
        for K in sorted(outcome.baseline):
            baseline, optimized = outcome.baseline[K], outcome.optimized[K]
            z_b = predict_network(model, drawn, np.union1d(fixed, baseline))
            z_e = z_b if optimized == baseline else predict_network(model, drawn, np.union1d(fixed, optimized))
            degenerate = z_b == z0
            if degenerate:
                logger.warning('Degenerate baseline: s=%s draw %d K=%d', outcome.s, outcome.draw, K)
                if strict:
                    raise DegenerateBaseline(outcome.s, outcome.draw, K)
            gain = np.nan if degenerate else (z_e - z_b) / (z_b - z0) * 100
            records.append(GainRecord(region=region, model=label, s=outcome.s, draw=outcome.draw, K=K, z0=z0,
                                      z_b=z_b, z_e=z_e, gain=float(gain), degenerate=bool(degenerate),
                                      optimal=bool(outcome.proven.get(K, True))))
    return records


NESTED_SOLVERS = ('sort', 'greedy')
