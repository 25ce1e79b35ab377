"""Deterministic physics of one slot.

Sector antennas with a two-level gain pattern, pilot-search alignment time,
SINR with geometric interference coupling, the effective sum rate objective
(throughput discounted by the alignment share of the slot), and feasibility
checks of the joint beamwidth/power constraint set.

The slot duration is normalized to 1 s, so bits/slot and bits/s coincide.
Beams are assumed ideally aligned after the search: each transmitter's beam
bisector points at its own receiver and each receiver's at its own
transmitter; whether an interfering path lands in a main lobe is then purely
a matter of geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import NetworkRealization

TWO_PI = 2.0 * math.pi


class InfeasibleDecisionError(ValueError):
    """Raised when a rate is requested for a decision violating the constraint set."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("infeasible decision: " + "; ".join(self.violations))


@dataclass(frozen=True)
class RadioParams:
    """Bandwidth, noise, timing, sector and power-limit constants (SI units)."""

    bandwidth_w: float = 1e9            # Hz
    noise_density: float = 10 ** -17.5  # W/Hz (-145 dBm/Hz)
    slot_t: float = 1.0                 # s
    pilot_tp: float = 0.001             # s per pilot combination
    sector_tx: float = math.pi / 2      # rad
    sector_rx: float = math.pi / 2      # rad
    side_lobe_z: float = 0.1            # linear gain
    p_max: float = 1.0                  # W (30 dBm)

    def __post_init__(self):
        if not (0 < self.pilot_tp < self.slot_t):
            raise ValueError("pilot time must lie strictly inside the slot")
        if not (0 < self.side_lobe_z < 1):
            raise ValueError("side lobe gain must be in (0, 1)")
        for s in (self.sector_tx, self.sector_rx):
            if not (0 < s <= TWO_PI):
                raise ValueError("sector widths must be in (0, 2*pi]")
        if self.p_max <= 0 or self.bandwidth_w <= 0 or self.noise_density <= 0:
            raise ValueError("power, bandwidth and noise density must be positive")

    @property
    def noise_power(self) -> float:
        """Thermal noise power over the full band, W*N0 in watts."""
        return self.bandwidth_w * self.noise_density


@dataclass(frozen=True)
class Decision:
    """Per-link transmit power and beamwidth (one beamwidth for both ends)."""

    power: np.ndarray      # (N,) watts
    beamwidth: np.ndarray  # (N,) radians

    def __post_init__(self):
        object.__setattr__(self, "power", np.atleast_1d(np.asarray(self.power, dtype=float)))
        object.__setattr__(self, "beamwidth", np.atleast_1d(np.asarray(self.beamwidth, dtype=float)))
        if self.power.shape != self.beamwidth.shape:
            raise ValueError("power and beamwidth must have one entry per link")

    @property
    def n_links(self) -> int:
        return self.power.shape[0]


def alignment_time(phi_t: float, phi_r: float, params: RadioParams) -> float:
    """Pilot search time: ceil(sector/beamwidth) combinations on each end."""
    if phi_t <= 0 or phi_r <= 0:
        raise ValueError("beamwidths must be positive")
    return math.ceil(params.sector_tx / phi_t) * math.ceil(params.sector_rx / phi_r) * params.pilot_tp


def main_lobe_gain(phi, z):
    """Main-lobe gain (2*pi - (2*pi - phi) * z) / phi of the sector pattern.

    Conserves radiated power: phi * g_main + (2*pi - phi) * z = 2*pi.
    """
    phi = np.asarray(phi, dtype=float)
    out = (TWO_PI - (TWO_PI - phi) * z) / phi
    return float(out) if out.ndim == 0 else out


def wrap_angle(theta):
    """Normalize an angle to (-pi, pi]; values already in range pass through exactly."""
    theta = np.asarray(theta, dtype=float)
    wrapped = -(np.mod(-theta + math.pi, TWO_PI) - math.pi)
    out = np.where((theta > -math.pi) & (theta <= math.pi), theta, wrapped)
    return float(out) if out.ndim == 0 else out


def antenna_gain(theta: float, phi: float, z: float) -> float:
    """Two-level sector gain: main lobe iff |theta| <= phi/2 (boundary inclusive)."""
    theta = wrap_angle(theta)
    if abs(theta) <= phi / 2.0:
        return main_lobe_gain(phi, z)
    return z


def boresight_angles(real: NetworkRealization, i: int, j: int) -> tuple[float, float]:
    """Off-boresight angles of the tx_i -> rx_j path at both ends.

    Transmitter i's beam bisector points at rx_i and receiver j's at tx_j.
    Returns (angle at tx_i between tx_i->rx_i and tx_i->rx_j, angle at rx_j
    between rx_j->tx_j and rx_j->tx_i), both in (-pi, pi]. Coincident points
    degenerate to direction angle 0 (atan2(0, 0) convention).
    """
    tx_i, rx_i = real.tx_pos[i], real.rx_pos[i]
    tx_j, rx_j = real.tx_pos[j], real.rx_pos[j]
    bore_t = math.atan2(rx_i[1] - tx_i[1], rx_i[0] - tx_i[0])
    to_j = math.atan2(rx_j[1] - tx_i[1], rx_j[0] - tx_i[0])
    bore_r = math.atan2(tx_j[1] - rx_j[1], tx_j[0] - rx_j[0])
    to_i = math.atan2(tx_i[1] - rx_j[1], tx_i[0] - rx_j[0])
    return wrap_angle(to_j - bore_t), wrap_angle(to_i - bore_r)


@dataclass(frozen=True)
class LinkGeometry:
    """Decision-independent per-drop precomputation for fast rate evaluation.

    theta_t[i, j] / theta_r[i, j] are the off-boresight angles of the
    tx_i -> rx_j path at the transmitter and receiver end; gain is the
    channel power gain matrix of the drop.
    """

    theta_t: np.ndarray  # (N, N) radians
    theta_r: np.ndarray  # (N, N) radians
    gain: np.ndarray     # (N, N) linear


def link_geometry(real: NetworkRealization) -> LinkGeometry:
    """Precompute the off-boresight angle matrices of a drop."""
    tx, rx = real.tx_pos, real.rx_pos
    bore_t = np.arctan2(rx[:, 1] - tx[:, 1], rx[:, 0] - tx[:, 0])        # (N,)
    bore_r = np.arctan2(tx[:, 1] - rx[:, 1], tx[:, 0] - rx[:, 0])        # (N,)
    to_rx = np.arctan2(rx[None, :, 1] - tx[:, None, 1], rx[None, :, 0] - tx[:, None, 0])
    to_tx = np.arctan2(tx[:, None, 1] - rx[None, :, 1], tx[:, None, 0] - rx[None, :, 0])
    theta_t = wrap_angle(to_rx - bore_t[:, None])
    theta_r = wrap_angle(to_tx - bore_r[None, :])
    return LinkGeometry(theta_t=theta_t, theta_r=theta_r, gain=real.gain)


def _received_power(geom: LinkGeometry, power: np.ndarray, beamwidth: np.ndarray,
                    params: RadioParams) -> np.ndarray:
    """received[i, j]: power from transmitter i arriving at receiver j."""
    z = params.side_lobe_z
    main = main_lobe_gain(beamwidth, z)
    g_t = np.where(np.abs(geom.theta_t) <= beamwidth[:, None] / 2.0, main[:, None], z)
    g_r = np.where(np.abs(geom.theta_r) <= beamwidth[None, :] / 2.0, main[None, :], z)
    return power[:, None] * g_t * g_r * geom.gain


def sinr_vector(geom: LinkGeometry, power: np.ndarray, beamwidth: np.ndarray,
                params: RadioParams) -> np.ndarray:
    """SINR of every link for one joint decision."""
    received = _received_power(geom, power, beamwidth, params)
    signal = np.diagonal(received)
    interference = received.sum(axis=0) - signal
    return signal / (interference + params.noise_power)


def sinr(i: int, real: NetworkRealization, dec: Decision, params: RadioParams) -> float:
    """SINR of link i: own main-lobe product over interference plus noise."""
    geom = link_geometry(real)
    return float(sinr_vector(geom, dec.power, dec.beamwidth, params)[i])


def _rate_from_sinr(sinr_vals: np.ndarray, beamwidth: np.ndarray,
                    params: RadioParams) -> float:
    tau = (np.ceil(params.sector_tx / beamwidth)
           * np.ceil(params.sector_rx / beamwidth) * params.pilot_tp)
    frac = np.clip(1.0 - tau / params.slot_t, 0.0, 1.0)
    return float(params.bandwidth_w * params.slot_t
                 * np.sum(frac * np.log2(1.0 + sinr_vals)))


def effective_sum_rate(real: NetworkRealization, dec: Decision, params: RadioParams,
                       geom: LinkGeometry | None = None) -> float:
    """Network throughput in bits/slot: W * T * sum (1 - tau_i/T) log2(1 + SINR_i).

    Raises InfeasibleDecisionError rather than evaluating a decision outside
    the constraint set. Pass a precomputed `geom` to skip the angle setup
    when evaluating many decisions on one drop.
    """
    ok, violations = feasible(dec, params)
    if not ok:
        raise InfeasibleDecisionError(violations)
    if geom is None:
        geom = link_geometry(real)
    s = sinr_vector(geom, dec.power, dec.beamwidth, params)
    return _rate_from_sinr(s, dec.beamwidth, params)


def sum_rates_batch(geom: LinkGeometry, powers: np.ndarray, beamwidths: np.ndarray,
                    params: RadioParams) -> np.ndarray:
    """Effective sum rate of M joint decisions at once.

    powers and beamwidths are (M, N); returns (M,) bits/slot. Feasibility is
    not re-checked here; callers enumerate decisions drawn from a validated
    action grid.
    """
    z = params.side_lobe_z
    main = main_lobe_gain(beamwidths, z)                                  # (M, N)
    g_t = np.where(np.abs(geom.theta_t)[None, :, :] <= beamwidths[:, :, None] / 2.0,
                   main[:, :, None], z)
    g_r = np.where(np.abs(geom.theta_r)[None, :, :] <= beamwidths[:, None, :] / 2.0,
                   main[:, None, :], z)
    received = powers[:, :, None] * g_t * g_r * geom.gain[None, :, :]    # (M, N, N)
    signal = np.diagonal(received, axis1=1, axis2=2)
    interference = received.sum(axis=1) - signal
    s = signal / (interference + params.noise_power)
    tau = (np.ceil(params.sector_tx / beamwidths)
           * np.ceil(params.sector_rx / beamwidths) * params.pilot_tp)
    frac = np.clip(1.0 - tau / params.slot_t, 0.0, 1.0)
    return params.bandwidth_w * params.slot_t * np.sum(frac * np.log2(1.0 + s), axis=1)


def feasible(dec: Decision, params: RadioParams) -> tuple[bool, list[str]]:
    """Check the full constraint set; returns (ok, list of every violation).

    Constraints: beamwidth within both sectors; the smooth pairwise
    alignment-time bound sector_tx * sector_rx * Tp/T <= phi_i * phi_j for
    all ordered pairs (the conservative form without ceilings); and
    0 <= power <= p_max. Boundary values are feasible.
    """
    violations: list[str] = []
    phi, p = dec.beamwidth, dec.power
    n = dec.n_links
    for i in range(n):
        if not phi[i] > 0:
            violations.append(f"link {i}: beamwidth {phi[i]:.6g} rad is not positive")
        if phi[i] > params.sector_tx:
            violations.append(f"link {i}: beamwidth {phi[i]:.6g} rad exceeds tx sector {params.sector_tx:.6g} rad")
        if phi[i] > params.sector_rx:
            violations.append(f"link {i}: beamwidth {phi[i]:.6g} rad exceeds rx sector {params.sector_rx:.6g} rad")
        if p[i] < 0 or p[i] > params.p_max:
            violations.append(f"link {i}: power {p[i]:.6g} W outside [0, {params.p_max:.6g}]")
    bound = params.sector_tx * params.sector_rx * params.pilot_tp / params.slot_t
    if np.all(phi > 0):
        # worst ordered pair is the product of the two smallest beamwidths
        products = phi[:, None] * phi[None, :]
        bad_i, bad_j = np.where(products < bound)
        for i, j in zip(bad_i, bad_j):
            violations.append(
                f"pair ({i}, {j}): alignment bound {bound:.6g} exceeds "
                f"phi_{i}*phi_{j} = {products[i, j]:.6g}")
    return (len(violations) == 0, violations)
