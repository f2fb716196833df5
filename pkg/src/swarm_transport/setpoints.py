"""Global desired set-points through the layered communication matrix.

The communication matrix has -1 on the diagonal, zero off-diagonals on
anchor rows (hull agents, core, clamped agents) and the mentor weights on
follower rows, so follower rows sum to zero. Because mentors always sit in
strictly earlier layers, ordering agents by (layer, id) makes the follower
block lower-triangular and the set-point system solvable by forward
substitution; the dense partitioned solve is kept as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import SingularFollowerBlock
from .formation import LayeredGraph, topological_order
from .targets import DesiredPositions
from .weights import WeightSchedule, weights_at


@dataclass(frozen=True)
class CommMatrix:
    t: float
    order: tuple[int, ...]  # row/column agent ids, sorted by (layer, id)
    matrix: scipy.sparse.csr_matrix  # (N, N)
    n_anchors: int  # layer-0 row count; anchor rows come first


@dataclass(frozen=True)
class SetpointField:
    t: float
    s: dict[int, np.ndarray]


def agent_order(graph: LayeredGraph) -> tuple[int, ...]:
    """Matrix ordering: agents sorted by (layer, id), anchors first."""
    return tuple(sorted(graph.layer_index, key=lambda a: (graph.layer_index[a], a)))


def anchor_positions(graph: LayeredGraph, desired: DesiredPositions) -> dict[int, np.ndarray]:
    """Final positions of every layer-0 agent, the boundary data of the solve."""
    return {a: desired.p[a] for a in sorted(graph.layers[0])}


def build_comm_matrix(graph: LayeredGraph, schedule: WeightSchedule, t: float) -> CommMatrix:
    order = agent_order(graph)
    col = {a: k for k, a in enumerate(order)}
    n = len(order)
    w = weights_at(schedule, t)
    rows = list(range(n))
    cols = list(range(n))
    vals = [-1.0] * n
    for a, weights in sorted(w.items()):
        r = col[a]
        for m, wm in zip(graph.mentors[a], weights):
            rows.append(r)
            cols.append(col[m])
            vals.append(float(wm))
    matrix = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return CommMatrix(t=float(t), order=order, matrix=matrix, n_anchors=len(graph.layers[0]))


def propagate_setpoints(
    graph: LayeredGraph,
    schedule: WeightSchedule,
    leaders_p: dict[int, np.ndarray],
    t: float,
) -> SetpointField:
    """Forward substitution in topological order (the primary path)."""
    w = weights_at(schedule, t)
    s: dict[int, np.ndarray] = {}
    for a in topological_order(graph):
        mentors = graph.mentors_of(a)
        if not mentors:
            s[a] = np.asarray(leaders_p[a], dtype=float)
        else:
            s[a] = np.einsum("m,mn->n", w[a], np.array([s[m] for m in mentors]))
    return SetpointField(t=float(t), s=s)


def solve_setpoints_dense(
    graph: LayeredGraph,
    schedule: WeightSchedule,
    leaders_p: dict[int, np.ndarray],
    t: float,
) -> SetpointField:
    """Partitioned dense solve: anchors clamped, follower block inverted.

    Exists as the uniqueness oracle for ``propagate_setpoints``; intended
    for team sizes up to a few hundred.
    """
    comm = build_comm_matrix(graph, schedule, t)
    dense = comm.matrix.toarray()
    n0 = comm.n_anchors
    s_anchor = np.array([leaders_p[a] for a in comm.order[:n0]], dtype=float)
    lower_left = dense[n0:, :n0]
    follower = dense[n0:, n0:]
    try:
        s_follow = np.linalg.solve(follower, -lower_left @ s_anchor)
    except np.linalg.LinAlgError as exc:
        raise SingularFollowerBlock(str(exc)) from exc
    s: dict[int, np.ndarray] = {}
    for k, a in enumerate(comm.order[:n0]):
        s[a] = s_anchor[k]
    for k, a in enumerate(comm.order[n0:]):
        s[a] = s_follow[k]
    return SetpointField(t=float(t), s=s)


def setpoint_residual(
    graph: LayeredGraph,
    schedule: WeightSchedule,
    leaders_p: dict[int, np.ndarray],
    field: SetpointField,
) -> float:
    """Max-norm residual of the stacked linear relation at the field's time."""
    comm = build_comm_matrix(graph, schedule, field.t)
    s = np.array([field.s[a] for a in comm.order], dtype=float)
    offset = np.zeros_like(s)
    for k, a in enumerate(comm.order[: comm.n_anchors]):
        offset[k] = leaders_p[a]
    return float(np.max(np.abs(comm.matrix @ s + offset)))
