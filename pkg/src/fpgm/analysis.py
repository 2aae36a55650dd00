"""Empirical frequency-signature studies.

Three reproducible analyses over (image, mask) datasets: split-half
signature consistency, whole-dataset mean/std signatures, and edge-vs-
background specificity with matched pixel counts. All randomness is seeded.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import NoUsableSamples
from .prior import DEFAULT_DILATION_RADIUS, edge_mask, edge_signature, to_grayscale
from .spectral import forward_spectrum, radial_profile

log = logging.getLogger("fpgm")

DEFAULT_N_IMAGES = 500


@dataclass
class SignatureSummary:
    label: str
    mean: np.ndarray
    std: np.ndarray  # population std
    n: int


def _summarize(profiles, label):
    stack = np.stack(profiles)
    return SignatureSummary(
        label=label,
        mean=stack.mean(axis=0),
        std=stack.std(axis=0),
        n=stack.shape[0],
    )


def _collect_signatures(dataset, dilation_radius):
    profiles = []
    skipped = 0
    for img, mask in dataset:
        try:
            profiles.append(edge_signature(img, mask, dilation_radius))
        except Exception:
            skipped += 1
    if skipped:
        log.info("signature collection skipped %d sample(s)", skipped)
    return profiles


def dataset_signature(dataset, label, dilation_radius=DEFAULT_DILATION_RADIUS):
    """Mean and population std of edge signatures over all usable samples."""
    profiles = _collect_signatures(dataset, dilation_radius)
    if not profiles:
        raise NoUsableSamples("no sample produced an edge signature")
    return _summarize(profiles, label)


def subset_consistency(dataset, seed=0, dilation_radius=DEFAULT_DILATION_RADIUS):
    """Signatures of two disjoint random halves of the dataset."""
    dataset = list(dataset)
    profiles = _collect_signatures(dataset, dilation_radius)
    if len(profiles) < 2:
        raise NoUsableSamples("need at least 2 usable samples to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(profiles))
    half = len(profiles) // 2
    first = [profiles[i] for i in order[:half]]
    second = [profiles[i] for i in order[half : 2 * half]]
    return _summarize(first, "subset_a"), _summarize(second, "subset_b")


def specificity_study(
    dataset,
    n_images=DEFAULT_N_IMAGES,
    seed=0,
    dilation_radius=DEFAULT_DILATION_RADIUS,
):
    """Edge-band signatures vs matched-count background-pixel signatures.

    For each sampled image the background pool excludes the dilated foreground
    mask; exactly as many background pixels are drawn as the edge band holds.
    Images with too few background pixels (or no edge) are skipped.
    """
    dataset = list(dataset)
    if n_images > len(dataset):
        n_images = len(dataset)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(dataset), size=n_images, replace=False)
    side = 2 * int(dilation_radius) + 1
    edge_profiles, bg_profiles = [], []
    skipped = 0
    for idx in picks:
        img, mask = dataset[idx]
        gray = to_grayscale(img)
        band = edge_mask(mask, dilation_radius)
        k = int(band.sum())
        if k == 0:
            skipped += 1
            continue
        dilated = ndimage.binary_dilation(
            np.asarray(mask).astype(bool), structure=np.ones((side, side), bool)
        )
        bg_flat = np.flatnonzero(~dilated & ~band.astype(bool))
        if bg_flat.size < k:
            skipped += 1
            continue
        chosen = rng.choice(bg_flat, size=k, replace=False)
        bg_ind = np.zeros(gray.shape, dtype=np.float64)
        bg_ind.ravel()[chosen] = 1.0
        edge_profiles.append(
            radial_profile(forward_spectrum(gray * band).amplitude[:, :, 0])
        )
        bg_profiles.append(
            radial_profile(forward_spectrum(gray * bg_ind).amplitude[:, :, 0])
        )
    if skipped:
        log.info("specificity_study skipped %d image(s)", skipped)
    if not edge_profiles:
        raise NoUsableSamples("no image was usable for the specificity study")
    return _summarize(edge_profiles, "edge"), _summarize(bg_profiles, "background")
