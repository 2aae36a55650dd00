"""Forward-only loss kernels and pseudo-labeling for consistency training.

Probability maps are (H, W, K) arrays with K >= 2 classes summing to 1 per
pixel. Dice/CE operate on the foreground class (index 1) of binary maps;
targets may be plain 0/1 masks or PseudoLabels carrying a validity mask.
No gradients here: these kernels exist to make the loss algebra executable
and testable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyTarget, InvalidInput

DEFAULT_TAU_C = 0.95
DEFAULT_SMOOTH = 1.0
PROB_CLAMP = 1e-7


@dataclass
class PseudoLabel:
    """Per-pixel argmax labels plus a 0/1 confidence-pass mask."""

    labels: np.ndarray
    valid: np.ndarray


@dataclass
class LossWeights:
    lambda_unsup: float = 0.5
    lambda_freq: float = 0.5
    tau_c: float = DEFAULT_TAU_C

    def __post_init__(self):
        if self.lambda_unsup < 0 or self.lambda_freq < 0:
            raise InvalidInput("loss weights must be nonnegative")
        if not 0.0 < self.tau_c <= 1.0:
            raise InvalidInput("tau_c must be in (0,1]")


def _check_probs(probs):
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 3 or p.shape[2] < 2:
        raise InvalidInput(f"probability map must be (H,W,K>=2), got {p.shape}")
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=2) - 1.0) > 1e-6):
        raise InvalidInput("per-pixel probabilities must be >=0 and sum to 1")
    return p


def _target_and_valid(target, shape):
    """Normalize a target (mask array or PseudoLabel) to (labels, valid)."""
    if isinstance(target, PseudoLabel):
        labels = np.asarray(target.labels)
        valid = np.asarray(target.valid).astype(bool)
    else:
        labels = np.asarray(target)
        valid = np.ones(labels.shape, dtype=bool)
    if labels.shape != shape:
        raise InvalidInput(f"target shape {labels.shape} != probs {shape}")
    return labels, valid


def pseudo_label(probs, tau_c=DEFAULT_TAU_C):
    """Argmax labels masked by a confidence threshold on the max probability.

    Argmax ties break to the lowest class index.
    """
    if not 0.0 < tau_c <= 1.0:
        raise InvalidInput(f"tau_c must be in (0,1], got {tau_c}")
    p = _check_probs(probs)
    confidence = p.max(axis=2)
    return PseudoLabel(
        labels=p.argmax(axis=2),
        valid=(confidence >= tau_c).astype(np.uint8),
    )


def soft_dice_loss(probs, target, smooth=DEFAULT_SMOOTH):
    """1 - soft Dice between the foreground probability and a binary target.

    Pixels with valid=0 (PseudoLabel targets) are excluded entirely.
    """
    p = _check_probs(probs)
    labels, valid = _target_and_valid(target, p.shape[:2])
    if not valid.any():
        raise EmptyTarget("target has zero valid pixels")
    p_fg = p[:, :, 1][valid]
    t = (labels[valid] == 1).astype(np.float64)
    inter = float((p_fg * t).sum())
    denom = float(p_fg.sum() + t.sum())
    return 1.0 - (2.0 * inter + smooth) / (denom + smooth)


def cross_entropy_loss(probs, target):
    """Mean -log p(target class) over valid pixels, probabilities clamped."""
    p = _check_probs(probs)
    labels, valid = _target_and_valid(target, p.shape[:2])
    if not valid.any():
        raise EmptyTarget("target has zero valid pixels")
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    rows, cols = np.nonzero(valid)
    picked = p[rows, cols, labels[rows, cols]]
    return float(np.mean(-np.log(picked)))


def supervised_loss(probs, target, smooth=DEFAULT_SMOOTH):
    """Balanced CE + Dice combination."""
    return 0.5 * (cross_entropy_loss(probs, target) + soft_dice_loss(probs, target, smooth))


def total_loss(sup, unsup, freq, weights=None):
    """Weighted sum of the supervised and the two consistency terms."""
    if weights is None:
        weights = LossWeights()
    return sup + weights.lambda_unsup * unsup + weights.lambda_freq * freq
