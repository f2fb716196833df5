"""Convex communication weights: barycentric endpoints and the time blend.

Each mentee carries two weight vectors over its n+1 mentors: one expressing
its initial position in the mentors' initial positions, one expressing its
final position in the mentors' final positions. At run time the two are
blended by a minimum-jerk quintic ramp, so the weights stay nonnegative and
sum to one for every t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import BadInterval, DegenerateMentorSimplex, DegenerateSimplex
from .formation import Formation, LayeredGraph
from .targets import DesiredPositions

# Solver noise more negative than this is treated as a genuine violation.
NEGATIVE_WEIGHT_TOL = 1e-9


def beta(t: float, t0: float, tf: float) -> float:
    """Minimum-jerk quintic ramp: 0 at t0, 1 at tf, clamped outside.

    First and second derivatives vanish at both endpoints.
    """
    if tf <= t0:
        raise BadInterval(f"blend interval must satisfy t0 < tf, got [{t0}, {tf}]")
    tau = (t - t0) / (tf - t0)
    tau = min(max(tau, 0.0), 1.0)
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


@dataclass(frozen=True)
class WeightSchedule:
    """Initial and final weight vectors per mentee plus the blend horizon."""

    omega: dict[int, np.ndarray]  # mentee -> initial weights
    varpi: dict[int, np.ndarray]  # mentee -> final weights
    t0: float
    tf: float


def _clean(w: np.ndarray, agent_id: int) -> np.ndarray:
    """Zero out solver-noise negatives and renormalize to unit sum."""
    if float(w.min()) < -NEGATIVE_WEIGHT_TOL:
        raise ValueError(
            f"agent {agent_id}: barycentric weight {w.min():.3e} below tolerance; "
            "the point lies outside its mentor simplex"
        )
    w = np.where(w < 0.0, 0.0, w)
    return w / w.sum()


def initial_weights(graph: LayeredGraph, formation: Formation) -> dict[int, np.ndarray]:
    """Barycentric weights of each mentee's initial position in its mentors'."""
    out: dict[int, np.ndarray] = {}
    for a in sorted(graph.mentors):
        mentors = graph.mentors[a]
        verts = np.array([formation.position(m) for m in mentors])
        try:
            w = geometry.barycentric(formation.position(a), verts)
        except DegenerateSimplex as exc:
            raise DegenerateSimplex(f"agent {a}: {exc}") from exc
        out[a] = _clean(w, a)
    return out


def final_weights(graph: LayeredGraph, desired: DesiredPositions) -> dict[int, np.ndarray]:
    """Barycentric weights of each mentee's final position in its mentors'."""
    out: dict[int, np.ndarray] = {}
    for a in sorted(graph.mentors):
        mentors = graph.mentors[a]
        verts = np.array([desired.p[m] for m in mentors])
        try:
            w = geometry.barycentric(desired.p[a], verts)
        except DegenerateSimplex as exc:
            raise DegenerateMentorSimplex(f"agent {a}: {exc}") from exc
        out[a] = _clean(w, a)
    return out


def build_schedule(
    graph: LayeredGraph,
    formation: Formation,
    desired: DesiredPositions,
    t0: float,
    tf: float,
) -> WeightSchedule:
    if tf <= t0:
        raise BadInterval(f"blend interval must satisfy t0 < tf, got [{t0}, {tf}]")
    return WeightSchedule(
        omega=initial_weights(graph, formation),
        varpi=final_weights(graph, desired),
        t0=float(t0),
        tf=float(tf),
    )


def weights_at(schedule: WeightSchedule, t: float) -> dict[int, np.ndarray]:
    """Per-mentee convex blend of the endpoint weights at time t."""
    b = beta(t, schedule.t0, schedule.tf)
    return {
        a: (1.0 - b) * schedule.omega[a] + b * schedule.varpi[a]
        for a in schedule.omega
    }
