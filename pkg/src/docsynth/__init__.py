"""Synthetic layered document datasets for multi-class segmentation, and the metrics to score them."""

from .compositor import CompositeConfig, Sample, assemble_sample, composite_layer, composite_layers, extract_label, paste_at
from .metrics import (
    MetricsReport,
    PredictionStack,
    binarize,
    dice_coefficient,
    dice_loss,
    evaluate_images,
    f_measure,
    fp_percent,
    iou,
    pf_measure,
)
from .patchwork import PatchGrid, join_patches, pad_to_multiple, split_patches
from .raster import LabelStack, Layer, Raster, max_intensity, to_grayscale
from .rng import RngStream
from .skeleton import skeletonize

__version__ = "0.1.0"
