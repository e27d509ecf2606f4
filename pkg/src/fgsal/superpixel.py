"""SLIC superpixels and per-region statistics."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionMismatch, ParamError


@dataclass(frozen=True)
class Segmentation:
    """Pixel to region map with labels in the contiguous range ``0..n_regions-1``."""

    labels: np.ndarray
    n_regions: int

    @classmethod
    def from_labels(cls, labels):
        labels = np.asarray(labels)
        if labels.ndim != 2:
            raise DimensionMismatch(f"label map must be 2-D, got shape {labels.shape}")
        labels = labels.astype(np.intp, copy=False)
        n = int(labels.max()) + 1 if labels.size else 0
        if labels.min() < 0 or np.bincount(labels.ravel(), minlength=n).min() == 0:
            raise ParamError("labels must cover the contiguous range 0..N-1")
        return cls(labels, n)

    @property
    def shape(self):
        return self.labels.shape

    def pixel_counts(self):
        return np.bincount(self.labels.ravel(), minlength=self.n_regions)


@dataclass(frozen=True)
class RegionStats:
    """Per-region statistics stored column-wise, one row per region.

    ``centroid`` holds ``(x, y)`` pixel coordinates.
    """

    mean_lab: np.ndarray
    centroid: np.ndarray
    pixel_count: np.ndarray

    def __len__(self):
        return len(self.pixel_count)


def region_stats(lab, seg):
    lab = np.asarray(lab, dtype=np.float64)
    if lab.shape[:2] != seg.shape:
        raise DimensionMismatch(f"image {lab.shape[:2]} vs segmentation {seg.shape}")
    flat = seg.labels.ravel()
    n = seg.n_regions
    counts = np.bincount(flat, minlength=n)
    mean_lab = np.stack(
        [np.bincount(flat, weights=lab[..., c].ravel(), minlength=n) for c in range(lab.shape[2])],
        axis=1,
    ) / counts[:, None]
    ys, xs = np.indices(seg.shape)
    centroid = np.stack(
        [np.bincount(flat, weights=xs.ravel(), minlength=n),
         np.bincount(flat, weights=ys.ravel(), minlength=n)],
        axis=1,
    ) / counts[:, None]
    return RegionStats(mean_lab, centroid, counts)


def lab_gradient(lab):
    """Squared central-difference Lab gradient used to nudge SLIC seeds."""
    p = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode="edge")
    dx = p[1:-1, 2:] - p[1:-1, :-2]
    dy = p[2:, 1:-1] - p[:-2, 1:-1]
    return (dx ** 2).sum(axis=2) + (dy ** 2).sum(axis=2)


def grid_seeds(lab, step):
    """Regular seed grid, each seed moved to the lowest-gradient pixel of its 3x3 cell.

    Returns an ``(K, 5)`` array of ``(L, a, b, x, y)`` centers.
    """
    h, w = lab.shape[:2]
    nx = max(1, int(round(w / step)))
    ny = max(1, int(round(h / step)))
    xs = (np.arange(nx) + 0.5) * w / nx - 0.5
    ys = (np.arange(ny) + 0.5) * h / ny - 0.5
    grad = lab_gradient(lab)

    centers = []
    for sy in ys:
        for sx in xs:
            px, py = int(math.floor(sx + 0.5)), int(math.floor(sy + 0.5))
            y0, y1 = max(py - 1, 0), min(py + 2, h)
            x0, x1 = max(px - 1, 0), min(px + 2, w)
            window = grad[y0:y1, x0:x1]
            iy, ix = np.unravel_index(np.argmin(window), window.shape)
            # only move on a strict improvement, keeps flat-image seeds on the grid
            if window[iy, ix] < grad[py, px]:
                px, py = x0 + ix, y0 + iy
                sx, sy = float(px), float(py)
            centers.append([*lab[py, px], sx, sy])
    return np.array(centers, dtype=np.float64)


def slic_segment(lab, target_regions=300, compactness=20.0, iterations=10):
    """Segment a Lab image into roughly ``target_regions`` SLIC superpixels.

    Clustering runs k-means in ``(L, a, b, x, y)`` with the distance
    ``sqrt(d_lab**2 + (compactness / S)**2 * d_xy**2)`` where
    ``S = sqrt(W * H / target_regions)``, each center searching a ``2S x 2S``
    window. Afterwards every 4-connected component smaller than ``S**2 / 4``
    is absorbed into its largest neighbour, so the returned region count can
    differ from ``target_regions``.

    Raises
    ------
    ParamError
        If ``target_regions`` is outside ``[2, W*H/16]`` or
        ``compactness <= 0``.
    """
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    n_pix = h * w
    if not 2 <= target_regions <= n_pix // 16:
        raise ParamError(f"target_regions={target_regions} outside [2, {n_pix // 16}] for a {w}x{h} image")
    if compactness <= 0:
        raise ParamError(f"compactness must be positive, got {compactness}")

    step = math.sqrt(n_pix / target_regions)
    spatial = (compactness / step) ** 2
    centers = grid_seeds(lab, step)
    ys, xs = np.indices((h, w), dtype=np.float64)
    labels = np.full((h, w), -1, dtype=np.intp)

    for _ in range(iterations):
        dist = np.full((h, w), np.inf)
        for k, (cl, ca, cb, cx, cy) in enumerate(centers):
            y0, y1 = max(int(math.floor(cy - step)), 0), min(int(math.ceil(cy + step)) + 1, h)
            x0, x1 = max(int(math.floor(cx - step)), 0), min(int(math.ceil(cx + step)) + 1, w)
            if y0 >= y1 or x0 >= x1:
                continue
            patch = lab[y0:y1, x0:x1]
            d = ((patch[..., 0] - cl) ** 2 + (patch[..., 1] - ca) ** 2 + (patch[..., 2] - cb) ** 2
                 + spatial * ((xs[y0:y1, x0:x1] - cx) ** 2 + (ys[y0:y1, x0:x1] - cy) ** 2))
            better = d < dist[y0:y1, x0:x1]
            dist[y0:y1, x0:x1][better] = d[better]
            labels[y0:y1, x0:x1][better] = k

        assigned = labels >= 0
        flat = labels[assigned]
        k = len(centers)
        counts = np.bincount(flat, minlength=k)
        feats = np.concatenate([lab, xs[..., None], ys[..., None]], axis=2)[assigned]
        sums = np.stack([np.bincount(flat, weights=feats[:, c], minlength=k) for c in range(5)], axis=1)
        live = counts > 0
        centers[live] = sums[live] / counts[live, None]

    return enforce_connectivity(labels, min_size=step * step / 4.0)


def _components(labels):
    """4-connected components of equal-label pixels, as a component-id map."""
    h, w = labels.shape
    idx = np.arange(h * w).reshape(h, w)
    right = labels[:, :-1] == labels[:, 1:]
    down = labels[:-1, :] == labels[1:, :]
    rows = np.concatenate([idx[:, :-1][right], idx[:-1, :][down]])
    cols = np.concatenate([idx[:, 1:][right], idx[1:, :][down]])
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(h * w, h * w))
    n, comp = connected_components(graph, directed=False)
    return n, comp.reshape(h, w)


def _adjacent_pairs(comp):
    pairs = np.concatenate([
        np.stack([comp[:, :-1].ravel(), comp[:, 1:].ravel()], axis=1),
        np.stack([comp[:-1, :].ravel(), comp[1:, :].ravel()], axis=1),
    ])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs.sort(axis=1)
    return np.unique(pairs, axis=0)


def enforce_connectivity(labels, min_size):
    """Relabel so that every region is one 4-connected component.

    Components below ``min_size`` pixels, and pixels no cluster claimed
    (label -1), are merged into their largest neighbouring component,
    smallest first. Output labels are numbered in raster order of first
    appearance.
    """
    n, comp = _components(labels)
    size_arr = np.bincount(comp.ravel(), minlength=n)
    first = np.full(n, comp.size, dtype=np.int64)
    np.minimum.at(first, comp.ravel(), np.arange(comp.size))
    orphan = (labels.ravel()[first] < 0).tolist()
    size = size_arr.tolist()
    order = np.lexsort((np.arange(n), size_arr)).tolist()

    neighbours = [set() for _ in range(n)]
    for a, b in _adjacent_pairs(comp).tolist():
        neighbours[a].add(b)
        neighbours[b].add(a)

    parent = list(range(n))

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for c in order:
        r = find(c)
        if not (orphan[r] or size[r] < min_size):
            continue
        roots = {find(x) for x in neighbours[r]}
        roots.discard(r)
        if not roots:
            continue
        # prefer a real region over an orphan, then the largest, then the lowest id
        target = min(roots, key=lambda x: (orphan[x], -size[x], x))
        parent[r] = target
        size[target] += size[r]
        if len(neighbours[r]) > len(neighbours[target]):
            neighbours[r], neighbours[target] = neighbours[target], neighbours[r]
        neighbours[target] |= neighbours[r]
        neighbours[r] = set()

    roots = np.array([find(c) for c in range(n)])
    merged = roots[comp]
    _, first_idx, inverse = np.unique(merged.ravel(), return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first_idx))
    out = rank[inverse].reshape(labels.shape)
    return Segmentation(out.astype(np.intp), len(first_idx))
