"""End-to-end saliency computation for a single image."""
from dataclasses import asdict, dataclass, fields
import logging

import numpy as np
from PIL import Image

from . import connectivity, objectness, optimize, superpixel
from .errors import DegenerateForeground, DegenerateMask, ParamError
from .imgproc import check_rgb, normed_gradient, rgb_to_lab

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    superpixels: int = 300
    compactness: float = 20.0
    log_sigma: float = 1.4
    proposals: int = 100
    nms_iou: float = 0.7
    gaussian_spread: float = 4.0
    eps: float = 1e-6
    sigma_clr: float = 10.0
    sigma_b: float = 1.0
    mu: float = 0.1
    area_norm: bool = True
    normalize: bool = True
    max_side: int | None = None
    dump_superpixels: bool = False
    dump_proposals: bool = False
    dump_objectness: bool = False
    dump_weights: bool = False

    def validate(self):
        checks = [
            (self.superpixels >= 2, "superpixels must be at least 2"),
            (self.compactness > 0, "compactness must be positive"),
            (self.log_sigma > 0, "log_sigma must be positive"),
            (self.proposals >= 1, "proposals must be at least 1"),
            (0 < self.nms_iou < 1, "nms_iou must lie in (0, 1)"),
            (self.gaussian_spread > 0, "gaussian_spread must be positive"),
            (self.eps > 0, "eps must be positive"),
            (self.sigma_clr > 0 and self.sigma_b > 0, "sigma_clr and sigma_b must be positive"),
            (self.mu >= 0, "mu must be non-negative"),
            (self.max_side is None or self.max_side >= 8, "max_side must be at least 8"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParamError(msg)
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParamError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()


@dataclass
class SaliencyResult:
    """Final map plus the intermediate products of every stage."""

    saliency: np.ndarray
    segmentation: superpixel.Segmentation
    proposals: objectness.Proposals
    pixel_objectness: np.ndarray
    region_objectness: np.ndarray
    mask: objectness.ForegroundMask | None
    fg_connectivity: np.ndarray | None
    weights: connectivity.WeightVectors
    region_saliency: np.ndarray
    graph: connectivity.RegionGraph


def _shrink(rgb, max_side):
    h, w = rgb.shape[:2]
    scale = max_side / max(h, w)
    if scale >= 1:
        return rgb
    size = (max(8, int(round(w * scale))), max(8, int(round(h * scale))))
    return np.asarray(Image.fromarray(rgb).resize(size, Image.LANCZOS))


def _grow(values, width, height):
    return np.clip(objectness.resize_map(values, width, height), 0.0, 1.0)


def compute_saliency(rgb, config=None):
    """Run superpixels, objectness, connectivity and optimization on one RGB image."""
    config = (config or PipelineConfig()).validate()
    rgb = check_rgb(rgb)
    full_h, full_w = rgb.shape[:2]
    if config.max_side is not None:
        rgb = _shrink(rgb, config.max_side)
    h, w = rgb.shape[:2]

    lab = rgb_to_lab(rgb)
    n_target = min(config.superpixels, h * w // 16)
    seg = superpixel.slic_segment(lab, n_target, config.compactness)
    stats = superpixel.region_stats(lab, seg)

    ng = normed_gradient(rgb)
    filt = objectness.make_log_filter(config.log_sigma)
    candidates = objectness.score_windows(ng, filt)
    kept = objectness.nms_select(candidates, config.proposals, config.nms_iou)
    pix = objectness.pixel_objectness(kept, w, h, config.gaussian_spread)
    region_obj = objectness.region_objectness(pix, seg)

    graph = connectivity.build_graph(seg, stats)
    dist = connectivity.shortest_distances(graph)

    mask = fg = None
    try:
        mask = objectness.adaptive_threshold(region_obj, seg, config.area_norm)
        fg = connectivity.foreground_connectivity(graph, mask, dist, config.eps)
        w_fg = connectivity.foreground_weights(fg, config.eps)
    except (DegenerateForeground, DegenerateMask) as exc:
        log.warning("no usable foreground estimate (%s); using background cues only", exc)
        w_fg = np.zeros(seg.n_regions)

    weights = connectivity.WeightVectors(
        w_fg,
        connectivity.background_weights(graph, dist, config.sigma_clr, config.sigma_b),
        connectivity.smoothness_weights(graph, config.sigma_clr, config.mu),
    )
    t = optimize.solve_saliency(weights, graph)
    sal = optimize.render_map(t, seg, normalize=config.normalize)
    if (h, w) != (full_h, full_w):
        sal = _grow(sal, full_w, full_h)
    return SaliencyResult(sal, seg, kept, pix, region_obj, mask, fg, weights, t, graph)
