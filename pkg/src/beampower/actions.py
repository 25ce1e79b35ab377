"""Discrete (power, beamwidth) action menus.

Two discretization schemes share the same bounds: the reciprocal-square
scheme spaces beamwidths uniformly in 1/phi^2 (the quantity SINR is linear
in), the uniform scheme spaces them uniformly in phi. Powers are always
uniform in linear watts. The grid is the Cartesian product, indexed
power-major, and is immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .radio import Decision, RadioParams, feasible

RECIPROCAL_SQUARE = "reciprocal-square"
UNIFORM = "uniform"
SCHEMES = (RECIPROCAL_SQUARE, UNIFORM)


@dataclass(frozen=True)
class ActionGrid:
    """The shared action menu: ascending powers x ascending beamwidths."""

    powers: np.ndarray      # (n_p,) watts, ascending
    beamwidths: np.ndarray  # (n_phi,) radians, ascending
    scheme: str = RECIPROCAL_SQUARE

    @property
    def n_actions(self) -> int:
        return self.powers.size * self.beamwidths.size

    def describe(self) -> dict:
        """Exact rebuild recipe, embedded in saved models."""
        return {
            "scheme": self.scheme,
            "n_power": int(self.powers.size),
            "n_beamwidth": int(self.beamwidths.size),
            "p_min_w": float(self.powers[0]),
            "p_max_w": float(self.powers[-1]),
            "phi_min_rad": float(self.beamwidths[0]),
            "phi_max_rad": float(self.beamwidths[-1]),
        }


def build_grid(n_p: int, n_phi: int, p_min: float, p_max: float,
               phi_min: float, phi_max: float, scheme: str = RECIPROCAL_SQUARE,
               radio: RadioParams | None = None) -> ActionGrid:
    """Build the action menu; optionally validate it against radio constraints.

    Powers are uniform in watts over [p_min, p_max]. Beamwidths cover
    [phi_min, phi_max]: uniformly in 1/phi^2 for the reciprocal-square
    scheme, uniformly in phi for the uniform scheme. Both lists are stored
    ascending with the configured bounds as exact endpoints. When `radio`
    is given, every action (including the worst-case narrowest pair) must
    satisfy the constraint set or construction fails.
    """
    if n_p < 2 or n_phi < 2:
        raise ValueError("need at least two values per dimension")
    if not (0 < p_min < p_max):
        raise ValueError("power bounds must satisfy 0 < p_min < p_max")
    if not (0 < phi_min < phi_max):
        raise ValueError("beamwidth bounds must satisfy 0 < phi_min < phi_max")
    powers = np.linspace(p_min, p_max, n_p)
    if scheme == RECIPROCAL_SQUARE:
        u = np.linspace(1.0 / phi_max**2, 1.0 / phi_min**2, n_phi)
        beamwidths = np.sort(1.0 / np.sqrt(u))
        # pin the endpoints bit-exactly; 1/sqrt(1/phi^2) can be off by an ulp
        beamwidths[0], beamwidths[-1] = phi_min, phi_max
    elif scheme == UNIFORM:
        beamwidths = np.linspace(phi_min, phi_max, n_phi)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    grid = ActionGrid(powers=powers, beamwidths=beamwidths, scheme=scheme)
    if radio is not None:
        validate_grid(grid, radio)
    return grid


def validate_grid(grid: ActionGrid, radio: RadioParams) -> None:
    """Require every grid action, paired with the worst partner, to be feasible.

    The binding pairwise case is the narrowest beamwidth against itself; a
    two-link decision at (phi_min, phi_min) with the extreme powers covers
    all constraint families at once.
    """
    worst = Decision(power=np.array([grid.powers[0], grid.powers[-1]]),
                     beamwidth=np.array([grid.beamwidths[0], grid.beamwidths[0]]))
    ok, violations = feasible(worst, radio)
    if not ok:
        raise ValueError("action grid violates constraints: " + "; ".join(violations))


def decode(grid: ActionGrid, index: int) -> tuple[float, float]:
    """Action index -> (power W, beamwidth rad); inverse of encode."""
    n_phi = grid.beamwidths.size
    if not 0 <= index < grid.n_actions:
        raise IndexError(f"action index {index} outside [0, {grid.n_actions})")
    return float(grid.powers[index // n_phi]), float(grid.beamwidths[index % n_phi])


def encode(grid: ActionGrid, p_idx: int, phi_idx: int) -> int:
    """(power index, beamwidth index) -> flat power-major action index."""
    n_phi = grid.beamwidths.size
    if not (0 <= p_idx < grid.powers.size and 0 <= phi_idx < n_phi):
        raise IndexError("sub-index out of range")
    return p_idx * n_phi + phi_idx


def decode_many(grid: ActionGrid, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decode: (M,) indices -> ((M,) powers, (M,) beamwidths)."""
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= grid.n_actions):
        raise IndexError("action index outside the grid")
    n_phi = grid.beamwidths.size
    return grid.powers[indices // n_phi], grid.beamwidths[indices % n_phi]


def joint_decision(grid: ActionGrid, indices: np.ndarray) -> Decision:
    """Per-link action indices -> joint Decision."""
    p, phi = decode_many(grid, indices)
    return Decision(power=p, beamwidth=phi)
