"""Independent inner-distance estimators.

These deliberately avoid the path construction's machinery: a proximity
graph over sampled variety points gives one upper bound on the inner
distance, and local curve shortening with projection gives another.  Both
are estimates with stated tolerances, never certificates, and both can
only tighten the sandwich

    outer distance <= shortened length <= constructed length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .numkernel import frobenius_distance, frobenius_norm
from .paths import PiecewisePath, build_path
from .variety import VarietyDescriptor, membership_residual, project, sample_stratum

_RESIDUAL_CEILING = 1e-8


@dataclass(frozen=True)
class OracleConfig:
    n_samples: int = 64
    edge_membership_tol: float = 1e-6
    midpoint_checks_per_edge: int = 3
    shorten_iterations: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1 or self.midpoint_checks_per_edge < 1:
            raise ValueError("sample and check counts must be positive")
        if self.shorten_iterations < 1:
            raise ValueError("shorten_iterations must be positive")
        if not 0.0 < self.edge_membership_tol < 1.0:
            raise ValueError("edge_membership_tol must lie in (0, 1)")


def proximity_graph_distance(
    nodes: list[np.ndarray],
    source: int,
    target: int,
    residual_of: Callable[[np.ndarray], float],
    tol: float,
    checks_per_edge: int,
) -> float:
    """Shortest path between two nodes of a residual-tube proximity graph.

    Two nodes are joined when every one of ``checks_per_edge`` equispaced
    interior points of their segment has residual at most ``tol``; edge
    weights are Euclidean.  Returns ``math.inf`` when the sampled graph
    leaves the endpoints disconnected (a sampling artifact, not a
    statement about the space).
    """
    count = len(nodes)
    offsets = np.arange(1, checks_per_edge + 1) / (checks_per_edge + 1)
    rows, cols, weights = [], [], []
    for i in range(count):
        for j in range(i + 1, count):
            step = nodes[j] - nodes[i]
            if step.any() and any(
                residual_of(nodes[i] + s * step) > tol for s in offsets
            ):
                continue
            rows.append(i)
            cols.append(j)
            weights.append(float(np.linalg.norm(step)))
    graph = csr_matrix((weights, (rows, cols)), shape=(count, count))
    dist = dijkstra(graph, directed=False, indices=source)
    return float(dist[target])


def graph_upper_bound(p, q, d: VarietyDescriptor, cfg: OracleConfig) -> float:
    """Inner-distance upper bound from a sampled on-variety proximity graph.

    Samples ``cfg.n_samples`` stratum points (ranks cycling through the
    nonzero strata) inside the ball of radius twice the larger endpoint
    norm, always adding p, q and the cone point 0.  Any finite value is an
    upper bound on the inner distance up to the edge-tube tolerance, and
    no value can undercut the outer distance.
    """
    p = np.asarray(p, dtype=d.field.dtype)
    q = np.asarray(q, dtype=d.field.dtype)
    rng = np.random.default_rng(cfg.seed)
    ball = 2.0 * max(frobenius_norm(p), frobenius_norm(q))
    nodes = [p, q, np.zeros(d.shape, dtype=d.field.dtype)]
    ranks = list(range(1, d.t)) or [0]
    if ball > 0.0:
        for i in range(cfg.n_samples):
            rank = ranks[i % len(ranks)]
            radius = ball * float(rng.uniform(0.0, 1.0))
            seed = int(rng.integers(0, 2**63 - 1))
            if rank == 0 or radius == 0.0:
                continue
            nodes.append(sample_stratum(d, rank, radius, seed))
    return proximity_graph_distance(
        nodes,
        source=0,
        target=1,
        residual_of=lambda x: membership_residual(x, d),
        tol=cfg.edge_membership_tol,
        checks_per_edge=cfg.midpoint_checks_per_edge,
    )


def _total_length(points: list[np.ndarray]) -> float:
    return float(sum(np.linalg.norm(b - a) for a, b in zip(points, points[1:])))


def _smoothing_sweep(points: list[np.ndarray], d: VarietyDescriptor) -> bool:
    """One left-to-right pass of corner cutting; returns True on any change."""
    changed = False
    for i in range(1, len(points) - 1):
        candidate = project(0.5 * (points[i - 1] + points[i + 1]), d)
        if membership_residual(candidate, d) > _RESIDUAL_CEILING:
            continue
        current = np.linalg.norm(points[i] - points[i - 1]) + np.linalg.norm(
            points[i + 1] - points[i]
        )
        proposed = np.linalg.norm(candidate - points[i - 1]) + np.linalg.norm(
            points[i + 1] - candidate
        )
        if proposed < current:
            points[i] = candidate
            changed = True
    return changed


_MAX_BREAKPOINTS = 4097


def shorten(path: PiecewisePath, d: VarietyDescriptor, cfg: OracleConfig) -> PiecewisePath:
    """Locally shorten an on-variety polyline without leaving the variety.

    Each round refines the polyline (segment midpoints inserted and every
    interior breakpoint projected back onto the variety) and then sweeps a
    corner-cutting move that replaces an interior breakpoint by the
    projected midpoint of its neighbors whenever that strictly shortens
    the polyline and keeps the residual under 1e-8.  A round's output is
    only accepted if it did not lengthen the path, so the length is
    non-increasing across rounds and the endpoints never move.
    """
    current = [b.copy() for b in path.breakpoints]
    for _ in range(cfg.shorten_iterations):
        if len(current) < 2:
            break
        insert = len(current) * 2 - 1 <= _MAX_BREAKPOINTS
        candidate: list[np.ndarray] = []
        for a, b in zip(current, current[1:]):
            candidate.append(a)
            if insert:
                candidate.append(0.5 * (a + b))
        candidate.append(current[-1])
        for i in range(1, len(candidate) - 1):
            candidate[i] = project(candidate[i], d)
        for _ in range(2):
            if not _smoothing_sweep(candidate, d):
                break
        if _total_length(candidate) <= _total_length(current):
            current = candidate
        elif not _smoothing_sweep(current, d):
            break
    return PiecewisePath(tuple(current))


@dataclass(frozen=True)
class Sandwich:
    """Outer distance and the two inner-distance upper bounds around it."""

    outer: float
    shortened: float
    constructed: float


def sandwich(p, q, d: VarietyDescriptor, cfg: OracleConfig) -> Sandwich:
    """outer <= shortened <= constructed, all for the same pair of members."""
    path, cert = build_path(p, q, d)
    shorter = shorten(path, d, cfg)
    return Sandwich(
        outer=frobenius_distance(p, q),
        shortened=shorter.length(),
        constructed=cert.length,
    )
