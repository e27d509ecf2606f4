"""Quadratic saliency optimization and per-pixel rendering.

The cost over region saliencies ``t``::

    sum_i fg_i (t_i - 1)**2 + sum_i bg_i t_i**2 + sum_(i,j) w_ij (t_i - t_j)**2

with the last sum over graph edges, is minimized by solving
``(diag(fg) + diag(bg) + L) t = fg`` where ``L`` is the ``w_ij``-weighted
graph Laplacian.
"""
import warnings

import numpy as np
import scipy.linalg
from scipy.sparse import diags

from .errors import DimensionMismatch, SingularSystemWarning

DIRECT_MAX_NODES = 2000


def saliency_system(weights, graph):
    """Sparse system matrix and right-hand side of the saliency cost."""
    w = graph.adjacency(weights.smoothness)
    laplacian = diags(np.asarray(w.sum(axis=1)).ravel()) - w
    a = laplacian + diags(weights.foreground + weights.background)
    return a.tocsr(), np.asarray(weights.foreground, dtype=np.float64)


def saliency_cost(t, weights, graph):
    t = np.asarray(t, dtype=np.float64)
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    return float(np.sum(weights.foreground * (t - 1) ** 2)
                 + np.sum(weights.background * t ** 2)
                 + np.sum(weights.smoothness * (t[i] - t[j]) ** 2))


def conjugate_gradient(a, b, x0=None, tol=1e-10, maxiter=None):
    """Conjugate gradients for a symmetric positive definite ``a``.

    Stops once ``||b - a x|| <= tol * ||b||`` or after ``maxiter``
    iterations (default ``10 * n``).
    """
    n = len(b)
    maxiter = 10 * n if maxiter is None else maxiter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - a @ x
    p = r.copy()
    rr = r @ r
    stop = (tol * np.linalg.norm(b)) ** 2
    for _ in range(maxiter):
        if rr <= stop:
            break
        ap = a @ p
        alpha = rr / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x


def solve_unclamped(weights, graph, method="auto"):
    """Exact minimizer of the saliency cost, before clamping.

    ``method`` is ``"direct"`` (dense Cholesky), ``"cg"`` or ``"auto"``,
    which picks Cholesky up to ``DIRECT_MAX_NODES`` regions.
    """
    n = graph.n_nodes
    for name in ("foreground", "background"):
        if len(getattr(weights, name)) != n:
            raise DimensionMismatch(f"{name} weights have length {len(getattr(weights, name))}, graph has {n} nodes")
    if not np.any(weights.foreground + weights.background > 0):
        warnings.warn("all unary weights are zero; returning uniform 0.5 saliency", SingularSystemWarning)
        return np.full(n, 0.5)

    a, b = saliency_system(weights, graph)
    if method == "auto":
        method = "direct" if n <= DIRECT_MAX_NODES else "cg"
    if method == "cg":
        return conjugate_gradient(a, b)
    try:
        factor = scipy.linalg.cho_factor(a.toarray())
    except np.linalg.LinAlgError:
        warnings.warn("saliency system is singular; returning uniform 0.5 saliency", SingularSystemWarning)
        return np.full(n, 0.5)
    return scipy.linalg.cho_solve(factor, b)


def solve_saliency(weights, graph, method="auto"):
    """Per-region saliency in ``[0, 1]``."""
    return np.clip(solve_unclamped(weights, graph, method), 0.0, 1.0)


def render_map(t, seg, normalize=True):
    """Paint each region's value onto its pixels.

    With ``normalize`` a non-constant map is min-max stretched to ``[0, 1]``.
    """
    t = np.asarray(t, dtype=np.float64)
    if len(t) != seg.n_regions:
        raise DimensionMismatch(f"{len(t)} values for {seg.n_regions} regions")
    out = t[seg.labels]
    if normalize:
        lo, hi = out.min(), out.max()
        if hi > lo:
            out = (out - lo) / (hi - lo)
    return out


def to_uint8(saliency):
    return np.rint(np.clip(saliency, 0.0, 1.0) * 255.0).astype(np.uint8)
