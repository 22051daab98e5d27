"""Density-based clustering of filtered point positions.

Plain DBSCAN on 2-D Euclidean distance: a point with at least ``min_pts``
neighbors within ``eps`` (itself included) is a core point; clusters are
the density-connected components of cores plus their border points.
Neighbor queries go through a uniform grid with cell size ``eps``, so a
query only inspects the 3x3 surrounding cells.

Output is permutation-stable: points are processed in ascending id order,
cluster ids count up in the order their first core point is reached, and
a border point in reach of several clusters ends up in the one with the
lowest id.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence as Seq

from .data_model import PointId, RadarPoint

_NOISE = -1


@dataclass(frozen=True)
class ClusterConfig:
    eps: float = 1.0      # m, neighborhood radius
    min_pts: int = 4      # neighbors (incl. self) required for a core point

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be strictly positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")


@dataclass(frozen=True)
class Cluster:
    id: int
    member_ids: frozenset[PointId]
    centroid: tuple[float, float]


def dbscan(
    points: Seq[RadarPoint], cfg: ClusterConfig = ClusterConfig()
) -> tuple[list[Cluster], set[PointId]]:
    """Cluster points by position; returns (clusters, noise ids)."""
    pts = sorted(points, key=lambda p: p.id)
    n = len(pts)
    if n == 0:
        return [], set()

    eps2 = cfg.eps * cfg.eps
    # pad the cell size: a pair separated by a hair more than eps can land
    # two cells apart while its float distance^2 still rounds to eps^2,
    # which the inclusive test counts as within
    cell_size = cfg.eps * (1.0 + 1e-9)
    grid: dict[tuple[int, int], list[int]] = {}
    cells = []
    for i, p in enumerate(pts):
        cell = (math.floor(p.x / cell_size), math.floor(p.y / cell_size))
        cells.append(cell)
        grid.setdefault(cell, []).append(i)

    def neighbors(i: int) -> list[int]:
        px, py = pts[i].x, pts[i].y
        cx, cy = cells[i]
        out = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in grid.get((cx + dx, cy + dy), ()):
                    q = pts[j]
                    if (q.x - px) ** 2 + (q.y - py) ** 2 <= eps2:
                        out.append(j)
        return out

    labels: list[int | None] = [None] * n
    next_id = 0
    for i in range(n):
        if labels[i] is not None:
            continue
        seed_neighbors = neighbors(i)
        if len(seed_neighbors) < cfg.min_pts:
            labels[i] = _NOISE
            continue
        cid = next_id
        next_id += 1
        labels[i] = cid
        queue = deque(seed_neighbors)
        while queue:
            j = queue.popleft()
            if labels[j] == _NOISE:
                labels[j] = cid            # noise becomes a border point
                continue
            if labels[j] is not None:
                continue
            labels[j] = cid
            j_neighbors = neighbors(j)
            if len(j_neighbors) >= cfg.min_pts:
                queue.extend(j_neighbors)

    members: dict[int, list[RadarPoint]] = {}
    noise: set[PointId] = set()
    for i, lbl in enumerate(labels):
        if lbl == _NOISE:
            noise.add(pts[i].id)
        else:
            members.setdefault(lbl, []).append(pts[i])  # type: ignore[arg-type]

    clusters = []
    for cid in sorted(members):
        group = members[cid]
        cx = sum(p.x for p in group) / len(group)
        cy = sum(p.y for p in group) / len(group)
        clusters.append(
            Cluster(id=cid, member_ids=frozenset(p.id for p in group), centroid=(cx, cy))
        )
    return clusters, noise


def clustered_ids(clusters: Seq[Cluster]) -> set[PointId]:
    """Union of all cluster members."""
    out: set[PointId] = set()
    for c in clusters:
        out |= c.member_ids
    return out
