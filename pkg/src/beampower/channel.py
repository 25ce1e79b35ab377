"""Random network drops and the mmWave channel-gain matrix.

A drop places N transmitter-receiver pairs uniformly in an L x L square and
builds the N x N matrix of linear channel power gains, combining a two-branch
(LoS/NLoS) distance pathloss law, distance-dependent blockage, and unit-mean
Nakagami-m small-scale fading on blocked paths.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """Pathloss, blockage and fading constants (all linear / SI).

    c_los / c_nlos are the linear gains at the 1 m reference of the power
    law C * R^-alpha; beta is the blockage decay rate in 1/m; nakagami_m
    the fading shape on blocked paths. Distances below ref_dist_m are
    clamped to it (far-field model is invalid closer in). carrier_hz is
    metadata only and never enters any computation.
    """

    c_los: float = 1e-6          # -60 dB
    alpha_los: float = 2.0
    c_nlos: float = 1e-7         # -70 dB
    alpha_nlos: float = 4.0
    beta: float = 0.006
    nakagami_m: float = 3.0
    ref_dist_m: float = 5.0
    carrier_hz: float = 28e9

    def __post_init__(self):
        if min(self.c_los, self.alpha_los, self.c_nlos, self.alpha_nlos) <= 0:
            raise ValueError("pathloss constants must be positive")
        if self.beta < 0:
            raise ValueError("blockage decay must be non-negative")
        if self.alpha_nlos < self.alpha_los:
            raise ValueError("NLoS exponent must be >= LoS exponent")
        if self.nakagami_m < 0.5:
            raise ValueError("Nakagami shape must be >= 0.5")
        if self.ref_dist_m <= 0:
            raise ValueError("reference distance must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """One deployment scenario: N pairs in an L x L square."""

    n_links: int
    side_len: float
    channel: ChannelParams = field(default_factory=ChannelParams)
    seed: int = 0
    max_pair_dist: float | None = None  # optional cap on own tx-rx distance

    def __post_init__(self):
        if self.n_links < 1:
            raise ValueError("need at least one link")
        if self.side_len <= 0:
            raise ValueError("side length must be positive")
        if self.max_pair_dist is not None and self.max_pair_dist <= 0:
            raise ValueError("max pair distance must be positive")


@dataclass(frozen=True)
class NetworkRealization:
    """One random drop: positions and the linear channel power gain matrix.

    gain[i, j] is the channel power gain from transmitter i to receiver j;
    los[i, j] says whether that path was unblocked. No symmetry is assumed.
    side_len and seed are carried as metadata for serialization.
    """

    tx_pos: np.ndarray   # (N, 2) meters
    rx_pos: np.ndarray   # (N, 2) meters
    gain: np.ndarray     # (N, N) linear power gain
    los: np.ndarray      # (N, N) bool
    side_len: float = 0.0
    seed: int = -1

    @property
    def n_links(self) -> int:
        return self.gain.shape[0]


def pathloss(dist_m, los, params: ChannelParams):
    """Linear channel power gain C * max(R, ref)^-alpha of one branch.

    Accepts scalars or arrays; `los` selects the (C, alpha) pair per
    element. Distances below the reference distance are clamped to it.
    """
    dist_m = np.asarray(dist_m, dtype=float)
    if np.any(dist_m <= 0):
        raise ValueError("distance must be positive")
    r = np.maximum(dist_m, params.ref_dist_m)
    los_gain = params.c_los * r ** (-params.alpha_los)
    nlos_gain = params.c_nlos * r ** (-params.alpha_nlos)
    out = np.where(los, los_gain, nlos_gain)
    return float(out) if out.ndim == 0 else out


def blockage_prob(dist_m, beta: float):
    """Probability exp(-beta * R) that a path of length R is unblocked."""
    dist_m = np.asarray(dist_m, dtype=float)
    if np.any(dist_m < 0) or beta < 0:
        raise ValueError("distance and beta must be non-negative")
    out = np.exp(-beta * dist_m)
    return float(out) if out.ndim == 0 else out


def sample_fading(m: float, rng: np.random.Generator, size=None):
    """Unit-mean Nakagami-m power gain: Gamma(shape=m, scale=1/m)."""
    if m < 0.5:
        raise ValueError("Nakagami shape must be >= 0.5")
    return rng.gamma(m, 1.0 / m, size)


def sample_realization(cfg: ScenarioConfig, rng: np.random.Generator) -> NetworkRealization:
    """Draw one network realization.

    Draw order is fixed (tx positions, rx positions, blockage, fading) so a
    given generator state always yields the same drop. All 2N endpoints are
    i.i.d. uniform in the square; every ordered tx_i -> rx_j path gets an
    independent blockage flip with probability exp(-beta * R) of line of
    sight, and blocked paths multiply the pathloss by a unit-mean
    Nakagami-m power gain.
    """
    n = cfg.n_links
    ch = cfg.channel
    tx = rng.uniform(0.0, cfg.side_len, size=(n, 2))
    rx = rng.uniform(0.0, cfg.side_len, size=(n, 2))
    if cfg.max_pair_dist is not None:
        for i in range(n):
            while np.hypot(*(rx[i] - tx[i])) > cfg.max_pair_dist:
                rx[i] = rng.uniform(0.0, cfg.side_len, size=2)

    # dist[i, j] = |tx_i - rx_j|
    dist = np.hypot(tx[:, None, 0] - rx[None, :, 0], tx[:, None, 1] - rx[None, :, 1])
    dist = np.maximum(dist, np.finfo(float).tiny)  # coincident points
    los = rng.random((n, n)) < blockage_prob(dist, ch.beta)
    fading = sample_fading(ch.nakagami_m, rng, size=(n, n))
    gain = pathloss(dist, los, ch) * np.where(los, 1.0, fading)
    return NetworkRealization(tx_pos=tx, rx_pos=rx, gain=gain, los=los,
                              side_len=cfg.side_len, seed=cfg.seed)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial generator; parallel workers must each use their own."""
    return np.random.default_rng([seed, trial])


def dump_realization(real: NetworkRealization, fh: io.TextIOBase) -> None:
    """Write the textual drop format: header (N, L, seed), positions, gains.

    One position line per pair (tx_x tx_y rx_x rx_y), then the N x N gain
    matrix row-major, one row per line, full-precision decimal floats.
    """
    n = real.n_links
    fh.write(f"{n} {float(real.side_len)!r} {real.seed}\n")
    for i in range(n):
        fh.write(f"{float(real.tx_pos[i, 0])!r} {float(real.tx_pos[i, 1])!r} "
                 f"{float(real.rx_pos[i, 0])!r} {float(real.rx_pos[i, 1])!r}\n")
    for i in range(n):
        fh.write(" ".join(repr(float(g)) for g in real.gain[i]) + "\n")


def read_realization(fh: io.TextIOBase) -> NetworkRealization:
    """Parse the dump_realization format (los flags are not serialized)."""
    header = fh.readline().split()
    n, side_len, seed = int(header[0]), float(header[1]), int(header[2])
    tx = np.empty((n, 2))
    rx = np.empty((n, 2))
    for i in range(n):
        vals = [float(v) for v in fh.readline().split()]
        tx[i] = vals[0:2]
        rx[i] = vals[2:4]
    gain = np.array([[float(v) for v in fh.readline().split()] for _ in range(n)])
    return NetworkRealization(tx_pos=tx, rx_pos=rx, gain=gain,
                              los=np.ones((n, n), dtype=bool),
                              side_len=side_len, seed=seed)
