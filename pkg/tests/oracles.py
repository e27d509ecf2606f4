"""Brute-force reference implementations, kept independent of the package code."""
import itertools
import math

import numpy as np


def floyd_warshall(n, edges, weights):
    d = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0.0
    for (i, j), w in zip(edges, weights):
        d[i][j] = min(d[i][j], w)
        d[j][i] = min(d[j][i], w)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return np.array(d)


def fg_connectivity_direct(n, edges, weights, delta, eps=1e-6):
    d = floyd_warshall(n, edges, weights)
    out = []
    for r in range(n):
        num = sum(d[r][k] * delta[k] for k in range(n))
        den = sum(d[r][k] * (1 - delta[k]) for k in range(n))
        out.append(num / max(den, eps))
    return np.array(out)


def random_connected_graph(rng, n, extra=0.4):
    """Random spanning tree plus random extra edges, unit-free positive weights."""
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.add((j, i))
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < extra:
            edges.add((i, j))
    edges = sorted(edges)
    weights = rng.uniform(0.1, 20.0, len(edges))
    return edges, weights


def rect_iou(a, b):
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    iw = max(0, min(ax0 + aw, bx0 + bw) - max(ax0, bx0))
    ih = max(0, min(ay0 + ah, by0 + bh) - max(ay0, by0))
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter)


def greedy_nms(rects, scores, size_index, k, thr):
    """Plain O(n^2) greedy NMS returning kept indices in keep order."""
    order = sorted(range(len(scores)),
                   key=lambda i: (-scores[i], size_index[i], rects[i][1], rects[i][0]))
    kept = []
    for i in order:
        if all(rect_iou(rects[i], rects[j]) < thr for j in kept):
            kept.append(i)
        if len(kept) == k:
            break
    return kept


def window_scores_direct(ng, filt):
    h, w = ng.shape
    out = np.zeros((h - 7, w - 7))
    for y in range(h - 7):
        for x in range(w - 7):
            s = 0.0
            for dy in range(8):
                for dx in range(8):
                    s += ng[y + dy, x + dx] * filt[dy, dx]
            out[y, x] = s
    return out


def otsu_exhaustive(values):
    """Try every cut between sorted distinct values; return the foreground flags."""
    values = list(values)
    best, best_t = -1.0, None
    for t in sorted(set(values))[:-1]:
        lo = [v for v in values if v <= t]
        hi = [v for v in values if v > t]
        w0, w1 = len(lo) / len(values), len(hi) / len(values)
        var = w0 * w1 * (sum(lo) / len(lo) - sum(hi) / len(hi)) ** 2
        if var > best:
            best, best_t = var, t
    return [v > best_t for v in values]


def mae_loop(s, g):
    h, w = s.shape
    total = 0.0
    for y in range(h):
        for x in range(w):
            total += abs(float(s[y, x]) - float(g[y, x]))
    return total / (w * h)


def pr_counts_loop(s, g):
    """Per-threshold (selected, hits, positives) by pixel enumeration."""
    h, w = s.shape
    rows = []
    pos = sum(1 for y in range(h) for x in range(w) if g[y, x])
    for t in range(256):
        sel = hits = 0
        for y in range(h):
            for x in range(w):
                if 255.0 * s[y, x] > t:
                    sel += 1
                    hits += bool(g[y, x])
        rows.append((sel, hits, pos))
    return rows


def is_4connected(mask):
    """Flood fill from the first pixel of ``mask`` and check it reaches all of it."""
    pts = np.argwhere(mask)
    if len(pts) == 0:
        return True
    seen = np.zeros_like(mask, dtype=bool)
    stack = [tuple(pts[0])]
    seen[stack[0]] = True
    h, w = mask.shape
    while stack:
        y, x = stack.pop()
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                seen[ny, nx] = True
                stack.append((ny, nx))
    return bool(seen[mask].all())


def saliency_cost_direct(t, w_fg, w_bg, edges, w_smooth):
    c = 0.0
    for i in range(len(t)):
        c += w_fg[i] * (t[i] - 1) ** 2 + w_bg[i] * t[i] ** 2
    for (i, j), w in zip(edges, w_smooth):
        c += w * (t[i] - t[j]) ** 2
    return c
