"""Target abstraction: map sampled target points to per-agent final positions.

Final positions are assigned layer by layer. Hull agents take explicit or
ring-generated anchor positions, the core and clamped agents hold their
initial positions, and every mentee averages the target samples that fall
inside the simplex spanned by its mentors' final positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import BadConfig, DegenerateMentorSimplex, DegenerateSimplex
from .formation import Formation, LayeredGraph, topological_order


@dataclass(frozen=True)
class TargetSet:
    """Finite target sample set plus the zone outline used for scoring."""

    samples: np.ndarray  # (S, n)
    zone: np.ndarray | None = None  # polygon outline; hull of samples when absent

    def zone_polygon(self) -> np.ndarray:
        if self.zone is not None:
            zone = np.asarray(self.zone, dtype=float)
            return geometry.ensure_ccw(zone) if zone.shape[1] == 2 else zone.copy()
        if len(self.samples) >= 3:
            hull = geometry.convex_hull(self.samples)
            return self.samples[hull]
        raise BadConfig("target set has no zone polygon and too few samples for a hull")

    def center(self) -> np.ndarray:
        zone = self.zone_polygon()
        if zone.shape[1] == 2:
            return geometry.polygon_centroid(zone)
        return zone.mean(axis=0)


@dataclass(frozen=True)
class DesiredPositions:
    """Final desired position per agent plus the sample capture bookkeeping."""

    p: dict[int, np.ndarray]
    captured: dict[int, tuple[int, ...]]  # mentee -> indices into the sample list
    fallback_ids: tuple[int, ...]  # mentees whose simplex captured nothing

    def uncovered_samples(self, n_samples: int) -> tuple[int, ...]:
        seen: set[int] = set()
        for idx in self.captured.values():
            seen.update(idx)
        return tuple(i for i in range(n_samples) if i not in seen)


def equal_arclength_points(polygon, count: int) -> np.ndarray:
    """``count`` points spaced at equal arc length along a closed polygon.

    Walks the boundary counterclockwise starting at vertex 0.
    """
    poly = geometry.ensure_ccw(polygon)
    seg = np.roll(poly, -1, axis=0) - poly
    lengths = np.linalg.norm(seg, axis=1)
    total = float(lengths.sum())
    if total <= 0:
        raise BadConfig("zone polygon has zero perimeter")
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    out = np.empty((count, poly.shape[1]))
    for k in range(count):
        s = total * k / count
        j = int(np.searchsorted(cum, s, side="right") - 1)
        j = min(j, len(poly) - 1)
        frac = (s - cum[j]) / lengths[j] if lengths[j] > 0 else 0.0
        out[k] = poly[j] + frac * seg[j]
    return out


def leader_final_positions(
    formation: Formation,
    targets: TargetSet,
    *,
    explicit: dict[int, np.ndarray] | None = None,
    scale: float = 1.1,
) -> dict[int, np.ndarray]:
    """Anchor positions for the hull agents.

    Either passed through verbatim (``explicit``) or generated at equal arc
    length along the zone outline scaled by ``scale`` about the zone
    centroid, preserving the hull's cyclic order. The generated placement is
    a convention of this artifact, not part of the underlying method.
    """
    boundary = formation.boundary_ids
    if explicit is not None:
        missing = [b for b in boundary if b not in explicit]
        if missing:
            raise BadConfig(f"explicit leader positions missing agents {missing}")
        extra = [i for i in explicit if i not in set(boundary)]
        if extra:
            raise BadConfig(f"explicit leader positions name non-boundary agents {extra}")
        return {b: np.asarray(explicit[b], dtype=float) for b in boundary}
    if formation.dim != 2:
        raise BadConfig("generated leader placement is only available in 2-D")
    zone = targets.zone_polygon()
    ring = geometry.scale_polygon(zone, scale, about=geometry.polygon_centroid(zone))
    pts = equal_arclength_points(ring, len(boundary))
    return {b: pts[k] for k, b in enumerate(boundary)}


def compute_desired(
    graph: LayeredGraph,
    formation: Formation,
    targets: TargetSet,
    leader_p: dict[int, np.ndarray],
) -> DesiredPositions:
    """Per-agent final desired positions, processed in topological order.

    Each mentee captures the samples inside its mentors' final simplex and
    averages them. A mentee whose simplex captures nothing falls back to the
    simplex centroid (equal weights), which keeps the final weights solvable;
    such agents are reported in ``fallback_ids``.
    """
    samples = np.asarray(targets.samples, dtype=float)
    p: dict[int, np.ndarray] = {}
    for b in formation.boundary_ids:
        if b not in leader_p:
            raise BadConfig(f"leader position missing for boundary agent {b}")
        p[b] = np.asarray(leader_p[b], dtype=float)
    p[graph.core_id] = formation.position(graph.core_id).copy()
    for u in sorted(formation.uncooperative_ids):
        p[u] = formation.position(u).copy()

    captured: dict[int, tuple[int, ...]] = {}
    fallback: list[int] = []
    for a in topological_order(graph):
        mentors = graph.mentors_of(a)
        if not mentors:
            continue
        verts = np.array([p[m] for m in mentors])
        try:
            if len(samples):
                weights = geometry.barycentric_many(samples, verts)
                inside = np.where(weights.min(axis=1) >= -geometry.CONTAINMENT_TOL)[0]
            else:
                inside = np.empty(0, dtype=int)
        except DegenerateSimplex as exc:
            raise DegenerateMentorSimplex(
                f"agent {a}: mentors {mentors} have affinely dependent final positions"
            ) from exc
        captured[a] = tuple(int(i) for i in inside)
        if len(inside):
            p[a] = samples[inside].mean(axis=0)
        else:
            p[a] = verts.mean(axis=0)
            fallback.append(a)
    return DesiredPositions(p=p, captured=captured, fallback_ids=tuple(fallback))
