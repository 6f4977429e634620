"""Topological and spatial statistics of a confront graph.

Everything runs on the collapsed undirected simple view except density,
which uses the directed edge count. Distances are unweighted hops;
unreachable pairs are infinite. Spatial statistics (rank correlation,
distance profile) consider only vertex pairs where both ends carry
coordinates, and treat infinite hop distances as one tied block of
maximal ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.stats import rankdata

from .errors import InsufficientCoordinates, NoFinitePairs
from .graph import ConfrontGraph


@dataclass(frozen=True)
class GraphSummary:
    n: int
    m: int
    delta: float
    property_count: int
    property_coverage: float
    components: int
    d_max: int
    d_harm: float
    rho_d: float


@dataclass(frozen=True)
class ProfileBucket:
    graph_distance: float  # hop count, math.inf for the disconnected bucket
    count: int
    mean_spatial: float
    std_spatial: float


@dataclass(frozen=True)
class DistanceProfile:
    buckets: tuple[ProfileBucket, ...]  # finite ascending, infinite last

    def pair_count(self) -> int:
        return sum(b.count for b in self.buckets)


@dataclass(frozen=True)
class DistanceTable:
    ids: tuple[str, ...]
    matrix: np.ndarray  # (n, n) float64, hops, inf when unreachable

    def get(self, u: str, v: str) -> float:
        i = self.ids.index(u)
        j = self.ids.index(v)
        return float(self.matrix[i, j])


def density(g: ConfrontGraph) -> float:
    if g.n < 2:
        return 0.0
    return g.m / (g.n * (g.n - 1))


def _sparse_adjacency(g: ConfrontGraph) -> csr_matrix:
    pairs = g.undirected_pairs()
    rows = [i for i, _ in pairs] + [j for _, j in pairs]
    cols = [j for _, j in pairs] + [i for i, _ in pairs]
    data = np.ones(len(rows), dtype=np.int8)
    return csr_matrix((data, (rows, cols)), shape=(g.n, g.n))


def all_pairs_graph_distance(g: ConfrontGraph) -> DistanceTable:
    ids = tuple(g.vertex_ids())
    if g.n == 0:
        return DistanceTable(ids, np.zeros((0, 0)))
    matrix = shortest_path(_sparse_adjacency(g), method="D", directed=False,
                           unweighted=True)
    return DistanceTable(ids, matrix)


def _pair_distances(matrix: np.ndarray) -> np.ndarray:
    """Upper-triangle entries (unordered distinct pairs)."""
    iu = np.triu_indices(matrix.shape[0], k=1)
    return matrix[iu]


def finite_diameter(g: ConfrontGraph) -> int:
    dists = _pair_distances(all_pairs_graph_distance(g).matrix)
    finite = dists[np.isfinite(dists)]
    if finite.size == 0:
        raise NoFinitePairs("every vertex pair is disconnected")
    return int(finite.max())


def harmonic_mean_distance(g: ConfrontGraph) -> float:
    """P / sum(1/d) over the P unordered pairs, disconnected pairs
    contributing zero reciprocal; inf when nothing is connected."""
    dists = _pair_distances(all_pairs_graph_distance(g).matrix)
    if dists.size == 0:
        return math.inf
    with np.errstate(divide="ignore"):
        inv = np.where(np.isfinite(dists), 1.0 / dists, 0.0)
    total = float(inv.sum())
    if total == 0.0:
        return math.inf
    return dists.size / total


def rank_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman rho with average ranks for ties; infinite values rank as
    one tied maximal block. NaN when either side is constant."""
    rx = rankdata(np.asarray(x, dtype=float))
    ry = rankdata(np.asarray(y, dtype=float))
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = math.sqrt(float((rx * rx).sum()) * float((ry * ry).sum()))
    if denom == 0.0:
        return math.nan
    return float((rx * ry).sum() / denom)


def _coordinate_pairs(g: ConfrontGraph) -> tuple[np.ndarray, np.ndarray]:
    """(graph hops, Euclidean metres) over located vertex pairs."""
    index = g.vertex_index()
    located = [(index[v.id], v.coord) for v in g.vertices.values()
               if v.coord is not None]
    if len(located) < 2:
        raise InsufficientCoordinates(
            f"need at least 2 located vertices, have {len(located)}")
    idx = np.array([i for i, _ in located])
    xy = np.array([c for _, c in located], dtype=float)
    matrix = all_pairs_graph_distance(g).matrix[np.ix_(idx, idx)]
    graph_d = _pair_distances(matrix)
    diff = xy[:, None, :] - xy[None, :, :]
    spatial = _pair_distances(np.hypot(diff[..., 0], diff[..., 1]))
    return graph_d, spatial


def spearman_distance_correlation(g: ConfrontGraph) -> float:
    graph_d, spatial = _coordinate_pairs(g)
    return rank_correlation(graph_d, spatial)


def distance_profile(g: ConfrontGraph) -> DistanceProfile:
    graph_d, spatial = _coordinate_pairs(g)
    buckets: list[ProfileBucket] = []
    finite_mask = np.isfinite(graph_d)
    for h in sorted(set(graph_d[finite_mask].tolist())):
        sel = spatial[graph_d == h]
        buckets.append(ProfileBucket(
            graph_distance=float(h), count=int(sel.size),
            mean_spatial=float(sel.mean()), std_spatial=float(sel.std())))
    infinite = spatial[~finite_mask]
    if infinite.size:
        buckets.append(ProfileBucket(
            graph_distance=math.inf, count=int(infinite.size),
            mean_spatial=float(infinite.mean()),
            std_spatial=float(infinite.std())))
    return DistanceProfile(tuple(buckets))


def summarize(g: ConfrontGraph, baseline: int | None = None) -> GraphSummary:
    """The full statistic row for one graph.

    Degenerate cases collapse to zeros: a graph with no finite pair has
    d_max 0, fewer than two vertices give d_harm 0, fewer than two
    located vertices give rho_d NaN.
    """
    properties = g.property_count()
    coverage = properties / baseline if baseline else 0.0
    if g.n < 2:
        return GraphSummary(
            n=g.n, m=g.m, delta=0.0, property_count=properties,
            property_coverage=coverage, components=len(g.components()),
            d_max=0, d_harm=0.0, rho_d=math.nan)
    try:
        d_max = finite_diameter(g)
    except NoFinitePairs:
        d_max = 0
    try:
        rho = spearman_distance_correlation(g)
    except InsufficientCoordinates:
        rho = math.nan
    return GraphSummary(
        n=g.n, m=g.m, delta=density(g), property_count=properties,
        property_coverage=coverage, components=len(g.components()),
        d_max=d_max, d_harm=harmonic_mean_distance(g), rho_d=rho)
