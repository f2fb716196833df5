"""Fourth-order per-axis agent model with a snap-level tracking law.

State is (4, n): position, velocity, acceleration, jerk rows. The control
commands snap from the state and a held desired position; coordinates never
mix, so an n-dimensional agent is n independent scalar chains. Arrays with
a leading batch axis, shape (N, 4, n), integrate all agents at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Diverged

DIVERGENCE_THRESHOLD = 1e6


@dataclass(frozen=True)
class Gains:
    k1: float
    k2: float
    k3: float
    k4: float


# Quadruple pole at -2: settles in roughly 3-4 s, comfortably inside a
# 25 s mission window.
DEFAULT_GAINS = Gains(8.0, 24.0, 32.0, 16.0)


def check_hurwitz(gains: Gains) -> bool:
    """Routh-Hurwitz test for s^4 + k1 s^3 + k2 s^2 + k3 s + k4."""
    k1, k2, k3, k4 = gains.k1, gains.k2, gains.k3, gains.k4
    if min(k1, k2, k3, k4) <= 0.0:
        return False
    return k1 * k2 > k3 and (k1 * k2 - k3) * k3 > k1 * k1 * k4


def initial_state(position) -> np.ndarray:
    """State at rest at ``position``: all derivatives zero."""
    pos = np.asarray(position, dtype=float)
    state = np.zeros(pos.shape[:-1] + (4,) + pos.shape[-1:])
    state[..., 0, :] = pos
    return state


def virtual_control(state: np.ndarray, r_d, gains: Gains) -> np.ndarray:
    """Snap command: -k1*jerk - k2*accel - k3*vel + k4*(r_d - pos)."""
    state = np.asarray(state, dtype=float)
    r_d = np.asarray(r_d, dtype=float)
    return (
        -gains.k1 * state[..., 3, :]
        - gains.k2 * state[..., 2, :]
        - gains.k3 * state[..., 1, :]
        + gains.k4 * (r_d - state[..., 0, :])
    )


def _deriv(state: np.ndarray, r_d: np.ndarray, gains: Gains) -> np.ndarray:
    v = virtual_control(state, r_d, gains)
    return np.concatenate([state[..., 1:, :], v[..., None, :]], axis=-2)


def step(
    state: np.ndarray,
    r_d,
    gains: Gains,
    dt: float,
    threshold: float = DIVERGENCE_THRESHOLD,
) -> np.ndarray:
    """One fixed-step RK4 update with ``r_d`` held across the stages."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    state = np.asarray(state, dtype=float)
    r_d = np.asarray(r_d, dtype=float)
    s1 = _deriv(state, r_d, gains)
    s2 = _deriv(state + 0.5 * dt * s1, r_d, gains)
    s3 = _deriv(state + 0.5 * dt * s2, r_d, gains)
    s4 = _deriv(state + dt * s3, r_d, gains)
    out = state + (dt / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
    if not np.all(np.isfinite(out)) or float(np.max(np.abs(out))) > threshold:
        raise Diverged(f"state magnitude exceeded {threshold:g}")
    return out
