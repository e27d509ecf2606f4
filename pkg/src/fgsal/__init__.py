"""Salient object detection from objectness proposals and foreground connectivity."""
from .pipeline import PipelineConfig, SaliencyResult, compute_saliency

__all__ = ["PipelineConfig", "SaliencyResult", "compute_saliency"]
__version__ = "0.1.0"
