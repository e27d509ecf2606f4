"""Objectness proposals and the per-superpixel foreground estimate.

Windows are scored BING-style: the normed-gradient map is resized so that
an 8x8 window covers one quantized window size, and every 8x8 patch is
scored by its inner product with a fixed Laplacian-of-Gaussian filter in
place of a learned model. The kept proposals are spread back onto pixels
as Gaussian bumps, summed per superpixel and thresholded with Otsu's
method.
"""
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BoundsError, DegenerateForeground, DimensionMismatch, ParamError

PATCH = 8
BASE_SIZES = (16, 32, 64, 128, 256, 512)


def make_log_filter(sigma=1.4):
    """8x8 zero-sum Laplacian-of-Gaussian filter centred at (3.5, 3.5).

    The centre is negative and the weight rises towards the patch border,
    so windows whose gradient energy sits on their outline score highest.
    Weights are scaled to a maximum magnitude of 1.
    """
    if not sigma > 0:
        raise ParamError(f"sigma must be positive, got {sigma}")
    c = np.arange(PATCH) - (PATCH - 1) / 2.0
    r2 = c[:, None] ** 2 + c[None, :] ** 2
    s2 = sigma * sigma
    log = (r2 - 2 * s2) / (s2 * s2) * np.exp(-r2 / (2 * s2))
    log -= log.mean()
    log /= np.abs(log).max()
    # re-centre after scaling to remove rounding drift
    log -= log.mean()
    return log


def default_window_sizes(width, height):
    """Quantized ``(w, h)`` pairs from ``BASE_SIZES``, clipped to the image."""
    ws = sorted({min(s, width) for s in BASE_SIZES})
    hs = sorted({min(s, height) for s in BASE_SIZES})
    return [(w, h) for w in ws for h in hs]


@dataclass(frozen=True)
class Proposals:
    """Scored windows, one row per window.

    ``rects`` rows are ``(x, y, width, height)`` in original-image pixels and
    ``size_index`` points into the size list the windows were scored with.
    """

    rects: np.ndarray
    scores: np.ndarray
    size_index: np.ndarray

    def __len__(self):
        return len(self.scores)

    def __getitem__(self, idx):
        return Proposals(self.rects[idx], self.scores[idx], self.size_index[idx])

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 4), dtype=np.int64), np.zeros(0), np.zeros(0, dtype=np.int64))

    @classmethod
    def concat(cls, parts):
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(np.concatenate([p.rects for p in parts]),
                   np.concatenate([p.scores for p in parts]),
                   np.concatenate([p.size_index for p in parts]))


def resample_matrix(n_in, n_out):
    """Row-stochastic ``(n_out, n_in)`` bilinear resampling matrix.

    The triangle kernel is widened by the shrink factor when downsampling,
    so every input sample contributes (area-like antialiasing).
    """
    scale = n_in / n_out
    support = max(scale, 1.0)
    centers = (np.arange(n_out) + 0.5) * scale - 0.5
    taps = np.arange(n_in)
    weights = np.clip(1.0 - np.abs(taps[None, :] - centers[:, None]) / support, 0.0, None)
    return weights / weights.sum(axis=1, keepdims=True)


def resize_map(values, width, height):
    """Resize a 2-D float map to ``height x width`` in float64."""
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    return resample_matrix(h, height) @ values @ resample_matrix(w, width).T


def score_size(ng, filt, size, size_index):
    """Score every window of one quantized size with stride 1 in resized coordinates."""
    h, w = ng.shape
    win_w, win_h = size
    rw = max(PATCH, int(round(w * PATCH / win_w)))
    rh = max(PATCH, int(round(h * PATCH / win_h)))
    if (rw, rh) == (w, h):
        resized = np.asarray(ng, dtype=np.float64)
    else:
        resized = resize_map(ng, rw, rh)
    patches = sliding_window_view(resized, (PATCH, PATCH))
    scores = np.tensordot(patches, filt, axes=([2, 3], [0, 1]))

    ys, xs = np.indices(scores.shape)
    x0 = np.minimum(np.rint(xs * (w / rw)).astype(np.int64), w - win_w)
    y0 = np.minimum(np.rint(ys * (h / rh)).astype(np.int64), h - win_h)
    rects = np.stack([x0.ravel(), y0.ravel(),
                      np.full(x0.size, win_w), np.full(x0.size, win_h)], axis=1)
    return Proposals(rects, scores.ravel(), np.full(x0.size, size_index, dtype=np.int64))


def score_windows(ng, filt, sizes=None):
    """Score sliding windows of every quantized size on a normed-gradient map.

    Parameters
    ----------
    ng : ndarray, shape (H, W)
        Normed-gradient map.
    filt : ndarray, shape (8, 8)
        Scoring filter.
    sizes : list of (int, int), optional
        Window ``(width, height)`` pairs; defaults to
        :func:`default_window_sizes`. The list position is each window's
        ``size_index``.

    Returns
    -------
    Proposals
        Every window, unsorted and without re-ranking.
    """
    ng = np.asarray(ng, dtype=np.float64)
    h, w = ng.shape
    if sizes is None:
        sizes = default_window_sizes(w, h)
    if not sizes:
        raise ParamError("at least one window size is required")
    for sw, sh in sizes:
        if sw < PATCH or sh < PATCH:
            raise ParamError(f"window size {sw}x{sh} is below {PATCH}x{PATCH}")
        if sw > w or sh > h:
            raise ParamError(f"window size {sw}x{sh} exceeds the {w}x{h} map")
    return Proposals.concat([score_size(ng, filt, s, i) for i, s in enumerate(sizes)])


def iou(rect, rects):
    """IoU of one ``(x, y, w, h)`` rect against an array of rects."""
    rects = np.asarray(rects)
    ix = np.minimum(rect[0] + rect[2], rects[:, 0] + rects[:, 2]) - np.maximum(rect[0], rects[:, 0])
    iy = np.minimum(rect[1] + rect[3], rects[:, 1] + rects[:, 3]) - np.maximum(rect[1], rects[:, 1])
    inter = np.clip(ix, 0, None) * np.clip(iy, 0, None)
    union = rect[2] * rect[3] + rects[:, 2] * rects[:, 3] - inter
    return inter / union


def nms_select(proposals, k=100, iou_threshold=0.7):
    """Greedy non-maximum suppression keeping at most ``k`` windows.

    Candidates are visited by descending score, ties going to the smaller
    size index, then smaller y, then smaller x. A candidate survives when
    its IoU with every window kept so far is below ``iou_threshold``.
    """
    if k < 1:
        raise ParamError(f"k must be at least 1, got {k}")
    if not 0 < iou_threshold < 1:
        raise ParamError(f"iou_threshold must lie in (0, 1), got {iou_threshold}")
    if len(proposals) == 0:
        return Proposals.empty()

    rects = proposals.rects
    order = np.lexsort((rects[:, 0], rects[:, 1], proposals.size_index, -proposals.scores))
    kept = []
    kept_rects = np.empty((k, 4), dtype=rects.dtype)
    for i in order:
        if kept and iou(rects[i], kept_rects[:len(kept)]).max() >= iou_threshold:
            continue
        kept_rects[len(kept)] = rects[i]
        kept.append(i)
        if len(kept) == k:
            break
    return proposals[np.array(kept, dtype=np.int64)]


def gaussian_window(width, height, spread=4.0):
    """Separable Gaussian over a ``height x width`` window, peak 1 at its centre."""
    def axis(n):
        t = np.arange(n) - (n - 1) / 2.0
        s = n / spread
        return np.exp(-t * t / (2 * s * s))
    return np.outer(axis(height), axis(width))


def pixel_objectness(proposals, width, height, spread=4.0):
    """Sum of ``score * gaussian`` bumps over all proposals covering each pixel.

    Negative scores are clamped to zero. Proposals are accumulated in their
    given order.
    """
    out = np.zeros((height, width))
    rects = np.asarray(proposals.rects)
    if len(rects) and ((rects[:, :2] < 0).any()
                       or (rects[:, 0] + rects[:, 2] > width).any()
                       or (rects[:, 1] + rects[:, 3] > height).any()):
        raise BoundsError(f"proposal outside the {width}x{height} image")
    for (x, y, w, h), s in zip(rects.tolist(), proposals.scores.tolist()):
        if s <= 0:
            continue
        out[y:y + h, x:x + w] += s * gaussian_window(w, h, spread)
    return out


def region_objectness(pix, seg):
    """Per-region sum of pixel objectness."""
    pix = np.asarray(pix, dtype=np.float64)
    if pix.shape != seg.shape:
        raise DimensionMismatch(f"objectness map {pix.shape} vs segmentation {seg.shape}")
    return np.bincount(seg.labels.ravel(), weights=pix.ravel(), minlength=seg.n_regions)


def otsu_threshold(values):
    """Exact Otsu threshold over a small set of scalars.

    Returns the largest value of the lower class for the split that
    maximizes between-class variance; the first maximum wins ties.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    uniq, counts = np.unique(v, return_counts=True)
    if len(uniq) < 2:
        raise DegenerateForeground("all region scores are equal")
    sums = uniq * counts
    n0 = np.cumsum(counts)[:-1].astype(np.float64)
    s0 = np.cumsum(sums)[:-1]
    n1 = len(v) - n0
    s1 = sums.sum() - s0
    between = n0 * n1 * (s0 / n0 - s1 / n1) ** 2
    return uniq[int(np.argmax(between))]


@dataclass(frozen=True)
class ForegroundMask:
    """Thresholded per-region foreground estimate."""

    foreground: np.ndarray
    objectness: np.ndarray
    threshold: float


def adaptive_threshold(region_scores, seg, area_norm=True):
    """Split regions into foreground and background with Otsu's method.

    With ``area_norm`` the region sums are divided by region pixel counts
    first, so large regions are not favoured for their size alone.

    Raises
    ------
    DegenerateForeground
        When every region lands on the same side of the threshold.
    """
    scores = np.asarray(region_scores, dtype=np.float64)
    if len(scores) != seg.n_regions:
        raise DimensionMismatch(f"{len(scores)} scores for {seg.n_regions} regions")
    if len(scores) < 2:
        raise DegenerateForeground("need at least two regions")
    values = scores / seg.pixel_counts() if area_norm else scores
    t = otsu_threshold(values)
    fg = values > t
    if fg.all() or not fg.any():
        raise DegenerateForeground("threshold leaves a single class")
    return ForegroundMask(fg, scores, float(t))
