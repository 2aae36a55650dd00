"""Stage I: learn a radial frequency prior from labeled edge regions.

Per sample: Sobel the mask to find the object boundary, dilate it into an
edge band, keep only the grayscale image inside that band, and take the
radial profile of its amplitude spectrum. Samples are folded into a single
prior with EMA (order-dependent) or a running mean (order-free).
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import EmptyEdgeRegion, InvalidInput, NoUsableSamples
from .spectral import forward_spectrum, radial_profile

log = logging.getLogger("fpgm")

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

# broadcast-standard luma weights, fixed for determinism
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

DEFAULT_MOMENTUM = 0.999
DEFAULT_DILATION_RADIUS = 2


@dataclass
class FrequencyPrior:
    """An aggregated radial profile plus the state needed to keep updating it.

    The profile is stored raw (unnormalized); shape normalization happens at
    alignment time.
    """

    profile: np.ndarray = field(default_factory=lambda: np.zeros(0))
    momentum: float = DEFAULT_MOMENTUM
    samples_seen: int = 0
    source_dims: tuple = (0, 0)
    aggregation_mode: str = "ema"


def to_grayscale(img):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 1:
        return arr[:, :, 0]
    if arr.ndim == 3 and arr.shape[2] == 3:
        return arr @ LUMA_WEIGHTS
    raise InvalidInput(f"cannot grayscale-convert shape {arr.shape}")


def _check_binary(mask):
    m = np.asarray(mask)
    if m.ndim != 2:
        raise InvalidInput(f"mask must be 2D, got shape {m.shape}")
    if not np.isin(m, (0, 1)).all():
        raise InvalidInput("mask must contain only 0/1 values")
    return m.astype(np.float64)


def edge_mask(mask, dilation_radius=DEFAULT_DILATION_RADIUS):
    """Binary boundary band of a mask: Sobel gradient magnitude, binarized,
    then dilated with a (2r+1)-square structuring element.

    All-zero and all-one masks have no boundary and return an all-zero mask.
    """
    m = _check_binary(mask)
    gx = ndimage.convolve(m, SOBEL_X, mode="nearest")
    gy = ndimage.convolve(m, SOBEL_Y, mode="nearest")
    grad = np.hypot(gx, gy)
    edges = grad > 0
    if dilation_radius > 0 and edges.any():
        side = 2 * int(dilation_radius) + 1
        edges = ndimage.binary_dilation(edges, structure=np.ones((side, side), bool))
    return edges.astype(np.uint8)


def edge_signature(img, mask, dilation_radius=DEFAULT_DILATION_RADIUS):
    """Radial amplitude profile of the grayscale image restricted to the edge band."""
    gray = to_grayscale(img)
    m = np.asarray(mask)
    if gray.shape != m.shape:
        raise InvalidInput(f"image {gray.shape} and mask {m.shape} dims differ")
    band = edge_mask(m, dilation_radius)
    if not band.any():
        raise EmptyEdgeRegion("mask yields no edge pixels")
    spec = forward_spectrum(gray * band)
    return radial_profile(spec.amplitude[:, :, 0])


def update_prior(prior, sample):
    """Fold one sample profile into the prior; returns a new FrequencyPrior.

    EMA cold-starts from the first sample (a zero init would dominate at
    momentum 0.999). Mean mode keeps a running arithmetic mean.
    """
    sample = np.asarray(sample, dtype=np.float64)
    if prior.samples_seen == 0:
        profile = sample.copy()
    else:
        if prior.profile.shape != sample.shape:
            raise InvalidInput(
                f"profile length {prior.profile.size} != sample length {sample.size}"
            )
        if prior.aggregation_mode == "ema":
            profile = (1.0 - prior.momentum) * sample + prior.momentum * prior.profile
        elif prior.aggregation_mode == "mean":
            n = prior.samples_seen
            profile = (prior.profile * n + sample) / (n + 1)
        else:
            raise InvalidInput(f"unknown aggregation mode {prior.aggregation_mode!r}")
    return replace(prior, profile=profile, samples_seen=prior.samples_seen + 1)


def learn_prior(
    dataset,
    momentum=DEFAULT_MOMENTUM,
    dilation_radius=DEFAULT_DILATION_RADIUS,
    mode="ema",
):
    """Aggregate edge signatures of an ordered (image, mask) dataset.

    Samples whose edge mask is empty are skipped (count logged). Raises
    NoUsableSamples when nothing survives.
    """
    prior = FrequencyPrior(momentum=momentum, aggregation_mode=mode)
    skipped = 0
    for img, mask in dataset:
        try:
            sig = edge_signature(img, mask, dilation_radius)
        except EmptyEdgeRegion:
            skipped += 1
            continue
        if prior.samples_seen == 0:
            gray = to_grayscale(img)
            prior = replace(prior, source_dims=gray.shape)
        prior = update_prior(prior, sig)
    if skipped:
        log.info("learn_prior: skipped %d sample(s) with empty edge regions", skipped)
    if prior.samples_seen == 0:
        raise NoUsableSamples("no sample produced a nonempty edge region")
    return prior


def generic_prior(length):
    """Pink-noise-style 1/(r+1) profile."""
    r = np.arange(int(length), dtype=np.float64)
    return 1.0 / (r + 1.0)


def lowpass_prior(length, r_c):
    """Ideal low-pass profile: 1 for r <= r_c, else 0."""
    length = int(length)
    if r_c >= length:
        raise InvalidInput(f"cutoff {r_c} must be < profile length {length}")
    values = np.zeros(length, dtype=np.float64)
    values[: int(r_c) + 1] = 1.0
    return values
