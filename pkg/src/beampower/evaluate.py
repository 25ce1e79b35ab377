"""Policy evaluation over Monte Carlo trials with common random numbers.

Every policy within one evaluation sees the identical sequence of drops:
trial k's realization is a pure function of (master seed, k), so policy
comparisons are paired. Trials can run in parallel with independent
per-trial generators; results are always reported in trial order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .actions import ActionGrid, build_grid
from .agent import act, train
from .baselines import exhaustive_search, random_policy, underestimate_interference
from .channel import sample_realization, trial_rng
from .config import ExperimentConfig
from .mlp import MlpModel
from .radio import effective_sum_rate

POLICY_DQN = "dqn"
POLICY_RANDOM = "random"
POLICY_UNDEREST = "underest"
POLICY_ES = "es"
POLICIES = (POLICY_DQN, POLICY_RANDOM, POLICY_UNDEREST, POLICY_ES)

_RANDOM_POLICY_SALT = 7  # keeps the random policy's stream apart from the drop stream


@dataclass
class EvalReport:
    """Per-trial throughput of each policy plus decision-latency stats."""

    policies: list[str]
    values: np.ndarray        # (trials, n_policies) bits/slot
    decision_ms: dict         # policy -> (mean ms, median ms)
    trials: int

    def column(self, policy: str) -> np.ndarray:
        return self.values[:, self.policies.index(policy)]

    def mean(self, policy: str) -> float:
        return float(np.mean(self.column(policy)))

    def stderr(self, policy: str) -> float:
        col = self.column(policy)
        if col.size < 2:
            return 0.0
        return float(np.std(col, ddof=1) / np.sqrt(col.size))


def grid_from_model(model: MlpModel) -> ActionGrid:
    """Rebuild the action grid a saved model was trained against."""
    g = model.meta["grid"]
    return build_grid(g["n_power"], g["n_beamwidth"], g["p_min_w"], g["p_max_w"],
                      g["phi_min_rad"], g["phi_max_rad"], g["scheme"])


def _decide(policy: str, real, exp: ExperimentConfig, grid: ActionGrid,
            model: MlpModel | None, seed: int, k: int):
    if policy == POLICY_DQN:
        return act(model, real, exp.radio, grid)
    if policy == POLICY_RANDOM:
        rng = np.random.default_rng([seed, k, _RANDOM_POLICY_SALT])
        return random_policy(grid, real.n_links, rng)
    if policy == POLICY_UNDEREST:
        return underestimate_interference(real, exp.radio, exp.underest_resolution)
    if policy == POLICY_ES:
        return exhaustive_search(real, grid, exp.radio, budget=exp.es_budget)[0]
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")


def _eval_trials(exp: ExperimentConfig, policies: list[str], grid: ActionGrid,
                 model: MlpModel | None, seed: int, trial_indices):
    values = np.empty((len(trial_indices), len(policies)))
    times = np.empty((len(trial_indices), len(policies)))
    for row, k in enumerate(trial_indices):
        real = sample_realization(exp.scenario, trial_rng(seed, k))
        for col, policy in enumerate(policies):
            t0 = time.perf_counter()
            dec = _decide(policy, real, exp, grid, model, seed, k)
            times[row, col] = (time.perf_counter() - t0) * 1000.0
            values[row, col] = effective_sum_rate(real, dec, exp.radio)
    return values, times


def evaluate_policies(exp: ExperimentConfig, policies, model: MlpModel | None = None,
                      grid: ActionGrid | None = None, trials: int | None = None,
                      seed: int | None = None, workers: int | None = None) -> EvalReport:
    """Evaluate the requested policies on `trials` common drops.

    When a model is given, its embedded grid recipe is used for every
    grid-based policy so ratios are apples-to-apples; otherwise the
    experiment's grid spec is built. The exhaustive-search budget is
    enforced up front by probing trial 0 before spawning workers.
    """
    policies = list(policies)
    trials = exp.trials if trials is None else trials
    seed = exp.seed if seed is None else seed
    workers = exp.workers if workers is None else workers
    if POLICY_DQN in policies and model is None:
        raise ValueError("the dqn policy needs a trained model")
    if grid is None:
        if model is not None and "grid" in model.meta:
            grid = grid_from_model(model)
        else:
            grid = exp.grid_spec.build(exp.radio)

    indices = list(range(trials))
    if workers > 1 and trials > 1:
        chunks = np.array_split(indices, min(workers, trials))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_eval_trials_star,
                                  [(exp, policies, grid, model, seed, list(c)) for c in chunks]))
        values = np.vstack([p[0] for p in parts])
        times = np.vstack([p[1] for p in parts])
    else:
        values, times = _eval_trials(exp, policies, grid, model, seed, indices)

    decision_ms = {p: (float(np.mean(times[:, c])), float(np.median(times[:, c])))
                   for c, p in enumerate(policies)}
    return EvalReport(policies=policies, values=values, decision_ms=decision_ms, trials=trials)


def _eval_trials_star(args):
    return _eval_trials(*args)


def scenario_on_axis(exp: ExperimentConfig, axis: str, value):
    """The experiment's scenario with one geometry axis replaced."""
    if axis == "n_links":
        return replace(exp.scenario, n_links=int(value))
    if axis == "side_len":
        return replace(exp.scenario, side_len=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}; expected n_links or side_len")


def train_for_scenario(exp: ExperimentConfig, scenario, rng_key: int = 0,
                       progress=None):
    """Train a fresh model for a (possibly axis-modified) scenario.

    The training generator is derived from (experiment seed, rng_key) so
    per-value models in a sweep are independent yet reproducible.
    """
    grid = exp.grid_spec.build(exp.radio)
    rng = np.random.default_rng([exp.seed, 101, rng_key])
    model, history = train(scenario, exp.radio, grid, exp.train, rng=rng,
                           pad_db=exp.pad_db, progress=progress)
    return model, history, grid


def run_sweep(exp: ExperimentConfig, axis: str, values, policies,
              reuse_model: MlpModel | None = None, trials: int | None = None,
              progress=None):
    """One evaluation per axis value; returns [(value, EvalReport), ...].

    With `reuse_model`, the same trained model serves every axis value
    (state adaptation bridges link-count mismatches); otherwise a model is
    trained per value whenever the dqn policy is requested.
    """
    out = []
    for i, value in enumerate(values):
        scenario = scenario_on_axis(exp, axis, value)
        sub = replace(exp, scenario=scenario)
        model = reuse_model
        if POLICY_DQN in policies and model is None:
            model, _, _ = train_for_scenario(exp, scenario, rng_key=i,
                                             progress=progress)
        report = evaluate_policies(sub, policies, model=model, trials=trials)
        out.append((value, report))
    return out


def measure_latency(exp: ExperimentConfig, model: MlpModel,
                    n_links_list=(4, 10), samples: int = 200):
    """Per-decision wall time of DQN inference and the interference-blind
    baseline on fresh drops; returns rows of
    (policy, n_links, samples, mean_ms, median_ms)."""
    if samples < 1:
        raise ValueError("need at least one sample")
    grid = grid_from_model(model)
    rows = []
    for n in n_links_list:
        scenario = replace(exp.scenario, n_links=int(n))
        reals = [sample_realization(scenario, trial_rng(exp.seed, k))
                 for k in range(samples)]
        for policy in (POLICY_DQN, POLICY_UNDEREST):
            elapsed = np.empty(samples)
            for k, real in enumerate(reals):
                t0 = time.perf_counter()
                if policy == POLICY_DQN:
                    act(model, real, exp.radio, grid)
                else:
                    underestimate_interference(real, exp.radio, exp.underest_resolution)
                elapsed[k] = (time.perf_counter() - t0) * 1000.0
            rows.append((policy, int(n), samples,
                         float(np.mean(elapsed)), float(np.median(elapsed))))
    return rows
