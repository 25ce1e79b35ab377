"""Reference policies: random selection, joint exhaustive search, and
per-link optimization that ignores interference.
"""

from __future__ import annotations

import math

import numpy as np

from .actions import ActionGrid, decode_many, joint_decision
from .channel import NetworkRealization
from .radio import Decision, RadioParams, link_geometry, main_lobe_gain, sum_rates_batch

ES_BUDGET_DEFAULT = 2_000_000
_ES_CHUNK = 4096


class SearchBudgetExceeded(ValueError):
    """Joint enumeration would exceed the configured combination budget."""


def random_policy(grid: ActionGrid, n: int, rng: np.random.Generator) -> Decision:
    """Each link's action drawn independently and uniformly from the grid."""
    return joint_decision(grid, rng.integers(0, grid.n_actions, size=n))


def exhaustive_search(real: NetworkRealization, grid: ActionGrid, params: RadioParams,
                      budget: int = ES_BUDGET_DEFAULT):
    """Enumerate every joint action combination; return (best Decision, bits/slot).

    Combinations are scanned in lexicographic order of the per-link index
    tuple and ties keep the first (lexicographically smallest) maximizer.
    Refuses instances whose combination count exceeds the budget.
    """
    n = real.n_links
    n_actions = grid.n_actions
    total = n_actions ** n
    if total > budget:
        raise SearchBudgetExceeded(
            f"exhaustive search over {n_actions}^{n} = {total} joint actions "
            f"exceeds the budget of {budget}; raise the budget or shrink the instance")
    geom = link_geometry(real)
    place = n_actions ** np.arange(n - 1, -1, -1, dtype=np.int64)  # most-significant first
    best_val = -math.inf
    best_combo = 0
    for start in range(0, total, _ES_CHUNK):
        combos = np.arange(start, min(start + _ES_CHUNK, total), dtype=np.int64)
        idx = (combos[:, None] // place[None, :]) % n_actions       # (M, N)
        powers, beamwidths = decode_many(grid, idx)
        rates = sum_rates_batch(geom, powers, beamwidths, params)
        k = int(np.argmax(rates))
        if rates[k] > best_val:
            best_val = float(rates[k])
            best_combo = int(combos[k])
    best_idx = (best_combo // place) % n_actions
    return joint_decision(grid, best_idx), best_val


def underestimate_interference(real: NetworkRealization, params: RadioParams,
                               phi_grid_resolution: int = 1000,
                               phi_min: float | None = None,
                               phi_max: float | None = None) -> Decision:
    """Decouple the network into N independent single-link problems.

    Each link ignores all interference: transmit power is p_max (the
    interference-free rate is increasing in power) and the beamwidth
    maximizes (1 - tau(phi)/T) * log2(1 + SNR(phi)) over a dense grid.
    The default beamwidth range is [sqrt(sector_tx*sector_rx*Tp/T),
    min(sector_tx, sector_rx)]: the lower end is the narrowest width every
    link can use simultaneously without violating the pairwise alignment
    bound. Interference then simply happens at evaluation time.
    """
    if phi_grid_resolution < 2:
        raise ValueError("need at least two beamwidth grid points")
    if phi_min is None:
        phi_min = math.sqrt(params.sector_tx * params.sector_rx * params.pilot_tp / params.slot_t)
    if phi_max is None:
        phi_max = min(params.sector_tx, params.sector_rx)
    phis = np.linspace(phi_min, phi_max, phi_grid_resolution)
    tau = (np.ceil(params.sector_tx / phis) * np.ceil(params.sector_rx / phis)
           * params.pilot_tp)
    frac = np.clip(1.0 - tau / params.slot_t, 0.0, 1.0)
    gain_sq = main_lobe_gain(phis, params.side_lobe_z) ** 2
    own = np.diagonal(real.gain)
    snr = params.p_max * own[:, None] * gain_sq[None, :] / params.noise_power
    values = frac[None, :] * np.log2(1.0 + snr)                      # (N, R)
    best = np.argmax(values, axis=1)
    return Decision(power=np.full(real.n_links, params.p_max), beamwidth=phis[best])
