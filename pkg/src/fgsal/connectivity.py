"""Superpixel graph, foreground connectivity and the optimization weights."""
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DegenerateMask

EPS = 1e-6


@dataclass(frozen=True)
class RegionGraph:
    """Undirected region adjacency graph.

    ``edges`` holds unique ``(i, j)`` pairs with ``i < j``; ``weights`` the
    Lab distance between the two region means; ``boundary`` flags regions
    touching the image border.
    """

    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray
    boundary: np.ndarray

    def adjacency(self, values=None):
        """Symmetric sparse matrix with ``values`` (default: edge weights) on each edge.

        Zero values are stored explicitly so that shortest-path routines still
        see zero-cost edges.
        """
        values = self.weights if values is None else np.asarray(values, dtype=np.float64)
        i, j = self.edges[:, 0], self.edges[:, 1]
        return csr_matrix(
            (np.concatenate([values, values]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n_nodes, self.n_nodes),
        )


@dataclass(frozen=True)
class WeightVectors:
    foreground: np.ndarray
    background: np.ndarray
    smoothness: np.ndarray


def build_graph(seg, stats):
    """Connect regions sharing a 4-adjacent pixel pair, weighted by mean-Lab distance."""
    labels = seg.labels
    pairs = np.concatenate([
        np.stack([labels[:, :-1].ravel(), labels[:, 1:].ravel()], axis=1),
        np.stack([labels[:-1, :].ravel(), labels[1:, :].ravel()], axis=1),
    ])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs.sort(axis=1)
    edges = np.unique(pairs, axis=0).astype(np.int64).reshape(-1, 2)
    mean = np.asarray(stats.mean_lab, dtype=np.float64)
    weights = np.linalg.norm(mean[edges[:, 0]] - mean[edges[:, 1]], axis=1)

    boundary = np.zeros(seg.n_regions, dtype=bool)
    boundary[np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))] = True
    return RegionGraph(seg.n_regions, edges, weights, boundary)


def shortest_distances(graph, sources=None):
    """Dijkstra shortest-path distances from ``sources`` (default: all nodes).

    Returns an array of shape ``(len(sources), n_nodes)``.
    """
    if sources is None:
        sources = np.arange(graph.n_nodes)
    return dijkstra(graph.adjacency(), directed=False, indices=np.asarray(sources))


def foreground_connectivity(graph, foreground, dist=None, eps=EPS):
    """Ratio of shortest-path distance mass to foreground versus background regions.

    ``FG(R) = sum_k d(R, R_k) fg_k / max(sum_k d(R, R_k) (1 - fg_k), eps)``.
    Small values mean the region is tightly connected to the estimated
    foreground.

    Raises
    ------
    DegenerateMask
        If ``foreground`` is all true or all false.
    """
    fg = np.asarray(getattr(foreground, "foreground", foreground), dtype=bool)
    if fg.all() or not fg.any():
        raise DegenerateMask("mask needs at least one foreground and one background region")
    if dist is None:
        dist = shortest_distances(graph)
    num = dist @ fg.astype(np.float64)
    den = dist @ (~fg).astype(np.float64)
    return num / np.maximum(den, eps)


def foreground_weights(fg, eps=EPS):
    """Reciprocal connectivity, scaled so the largest weight is 1."""
    w = 1.0 / (np.asarray(fg, dtype=np.float64) + eps)
    return w / w.max()


def background_weights(graph, dist=None, sigma_clr=10.0, sigma_b=1.0):
    """Boundary-connectivity background probability per region.

    Each region's soft area is ``sum_k exp(-d(R, R_k)**2 / (2 sigma_clr**2))``
    over geodesic distances, its boundary length the same sum over border
    regions only. ``BndCon = Len / sqrt(Area)`` and the weight is
    ``1 - exp(-BndCon**2 / (2 sigma_b**2))``.
    """
    if dist is None:
        dist = shortest_distances(graph)
    sim = np.exp(-dist ** 2 / (2 * sigma_clr ** 2))
    area = sim.sum(axis=1)
    length = sim @ graph.boundary.astype(np.float64)
    bndcon = length / np.sqrt(area)
    return 1.0 - np.exp(-bndcon ** 2 / (2 * sigma_b ** 2))


def smoothness_weights(graph, sigma_clr=10.0, mu=0.1):
    return np.exp(-graph.weights ** 2 / (2 * sigma_clr ** 2)) + mu
