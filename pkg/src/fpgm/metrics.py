"""Segmentation evaluation: Dice, Jaccard, HD95, ASD with report aggregation.

Distance metrics use exact nearest-boundary search over explicit boundary
point sets (small at 256x256); a distance transform would be the
optimization seam if this ever becomes hot.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidInput, UndefinedDistance

STATUS_OK = "ok"
STATUS_EMPTY = "empty_mask"


@dataclass
class ImageMetrics:
    image_id: str
    dice: float  # percent
    jaccard: float  # percent
    hd95: float  # pixels; nan when undefined
    asd: float  # pixels; nan when undefined
    status: str = STATUS_OK


@dataclass
class SegMetricsReport:
    per_image: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)


def _check_pair(pred, gt):
    p = np.asarray(pred)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise InvalidInput(f"mask shapes differ: {p.shape} vs {g.shape}")
    if p.ndim != 2:
        raise InvalidInput("masks must be 2D")
    return p.astype(bool), g.astype(bool)


def dice_jaccard(pred, gt):
    """Overlap metrics as fractions in [0,1]; both-empty counts as perfect."""
    p, g = _check_pair(pred, gt)
    inter = int(np.logical_and(p, g).sum())
    np_, ng = int(p.sum()), int(g.sum())
    if np_ == 0 and ng == 0:
        return 1.0, 1.0
    union = np_ + ng - inter
    dice = 2.0 * inter / (np_ + ng)
    jaccard = inter / union if union else 0.0
    return dice, jaccard


def boundary_points(mask):
    """Foreground pixels with a 4-neighbor background pixel (image border
    counts as background). Returns an (N, 2) array of (row, col)."""
    m = np.asarray(mask).astype(bool)
    padded = np.pad(m, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return np.argwhere(m & ~interior)


def hd95_asd(pred, gt):
    """95th-percentile and mean of the pooled symmetric boundary distances."""
    p, g = _check_pair(pred, gt)
    bp, bg = boundary_points(p), boundary_points(g)
    if len(bp) == 0 or len(bg) == 0:
        raise UndefinedDistance("boundary distances need both masks nonempty")
    d = cdist(bp.astype(np.float64), bg.astype(np.float64))
    pooled = np.concatenate([d.min(axis=1), d.min(axis=0)])
    return float(np.percentile(pooled, 95)), float(pooled.mean())


def evaluate_pair(image_id, pred, gt):
    dice, jaccard = dice_jaccard(pred, gt)
    try:
        hd95, asd = hd95_asd(pred, gt)
        status = STATUS_OK
    except UndefinedDistance:
        hd95, asd = float("nan"), float("nan")
        status = STATUS_EMPTY
    return ImageMetrics(image_id, 100.0 * dice, 100.0 * jaccard, hd95, asd, status)


def build_report(pairs):
    """Evaluate (id, pred, gt) triples; aggregate means over status=ok rows."""
    report = SegMetricsReport()
    for image_id, pred, gt in pairs:
        report.per_image.append(evaluate_pair(image_id, pred, gt))
    ok = [r for r in report.per_image if r.status == STATUS_OK]
    if ok:
        report.aggregate = {
            "dice": float(np.mean([r.dice for r in ok])),
            "jaccard": float(np.mean([r.jaccard for r in ok])),
            "hd95": float(np.mean([r.hd95 for r in ok])),
            "asd": float(np.mean([r.asd for r in ok])),
            "n": len(ok),
        }
    else:
        report.aggregate = {"dice": float("nan"), "jaccard": float("nan"),
                            "hd95": float("nan"), "asd": float("nan"), "n": 0}
    return report
