"""Stage II: spectral shape alignment.

The image's amplitude spectrum is condensed to a radial profile, split into
total energy and a normalized shape, the shape is pulled toward the prior's
shape by a convex interpolation, rescaled back to the original energy, and
re-expanded to a 2D amplitude. Phase is never touched.

Two amplitude reconstruction modes:
  radial_broadcast  - replace the amplitude with the broadcast perturbed
                      profile (discards angular amplitude structure);
  annulus_gain      - multiply each annulus by perturbed/original profile
                      ratio (keeps angular structure).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, UnusablePrior
from .spectral import (
    CenteredSpectrum,
    broadcast_profile,
    corner_radius,
    forward_spectrum,
    inverse_spectrum,
    radial_profile,
    radius_bins,
)

DEFAULT_GAMMA = 0.05
DEFAULT_EPSILON = 1e-8

MODES = ("radial_broadcast", "annulus_gain")


@dataclass
class AlignmentConfig:
    gamma: float = DEFAULT_GAMMA
    epsilon: float = DEFAULT_EPSILON
    mode: str = "radial_broadcast"
    clip_output: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidInput(f"gamma must be in [0,1], got {self.gamma}")
        if self.epsilon <= 0:
            raise InvalidInput("epsilon must be > 0")
        if self.mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}, got {self.mode!r}")


def shape_energy(profile, epsilon=DEFAULT_EPSILON):
    """Split a radial profile into (total L1 energy, normalized shape)."""
    p = np.asarray(profile, dtype=np.float64)
    if np.any(p < 0):
        raise InvalidInput("profile must be nonnegative")
    energy = float(p.sum())
    return energy, p / (energy + epsilon)


def align_shape(shape_u, shape_prior, gamma):
    """Convex interpolation of a shape toward the prior shape."""
    a = np.asarray(shape_u, dtype=np.float64)
    b = np.asarray(shape_prior, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInput(f"shape lengths differ: {a.size} vs {b.size}")
    return (1.0 - gamma) * a + gamma * b


def resample_prior(prior, target_length):
    """Linearly resample a prior's profile to a different radius count.

    Radii are rescaled proportionally so the profile's shape carries over to
    grids of other sizes. Same-length calls return the profile unchanged.
    """
    target_length = int(target_length)
    if target_length < 2:
        raise InvalidInput("target_length must be >= 2")
    values = np.asarray(prior.profile, dtype=np.float64)
    if values.size < 2:
        raise InvalidInput("prior profile must have length >= 2")
    if values.size == target_length:
        return values.copy()
    src_pos = np.arange(values.size, dtype=np.float64)
    dst_pos = np.arange(target_length, dtype=np.float64) * (
        (values.size - 1) / (target_length - 1)
    )
    return np.interp(dst_pos, src_pos, values)


def perturb_amplitude(amplitude, prior_shape, cfg):
    """Align one channel's 2D amplitude grid toward the prior shape.

    Returns (new amplitude, per-channel energy E_u).
    """
    p_u = radial_profile(amplitude)
    energy, shape_u = shape_energy(p_u, cfg.epsilon)
    shape_pert = align_shape(shape_u, prior_shape, cfg.gamma)
    p_pert = shape_pert * energy
    h, w = amplitude.shape
    if cfg.mode == "radial_broadcast":
        new_amp = broadcast_profile(p_pert, h, w)
    else:
        gain = p_pert / (p_u + cfg.epsilon)
        bins, _ = radius_bins(h, w)
        new_amp = amplitude * gain[bins]
    return new_amp, energy


def _prior_shape_for(prior, height, width, epsilon):
    if prior.samples_seen == 0:
        raise UnusablePrior("prior has no accumulated samples")
    target_len = corner_radius(height, width) + 1
    resampled = resample_prior(prior, target_len)
    _, shape = shape_energy(resampled, epsilon)
    return shape


def fpgm_augment(img, prior, cfg=None, return_info=False):
    """Full spectral shape alignment of an image against a learned prior.

    Channels are processed independently against the same prior shape. The
    original phase is kept; output is the real part of the inverse transform,
    clipped to [0,1] when cfg.clip_output.
    """
    if cfg is None:
        cfg = AlignmentConfig()
    spec = forward_spectrum(img)
    prior_shape = _prior_shape_for(prior, spec.height, spec.width, cfg.epsilon)
    new_amp = np.empty_like(spec.amplitude)
    energies = []
    for c in range(spec.channels):
        new_amp[:, :, c], e_u = perturb_amplitude(spec.amplitude[:, :, c], prior_shape, cfg)
        energies.append(e_u)
    out = inverse_spectrum(
        CenteredSpectrum(new_amp, spec.phase, squeeze_channel=spec.squeeze_channel)
    )
    if cfg.clip_output:
        out = np.clip(out, 0.0, 1.0)
    if return_info:
        return out, {"mode": cfg.mode, "gamma": cfg.gamma, "energy": energies}
    return out


def augment_batch(images, prior, cfg=None, seed=None):
    """Apply fpgm_augment to each image; deterministic regardless of seed.

    The seed is reserved for optional per-image gamma jitter (off by default).
    Per-image failures are re-raised with the image's index attached.
    """
    out = []
    for idx, img in enumerate(images):
        try:
            out.append(fpgm_augment(img, prior, cfg))
        except Exception as exc:
            raise type(exc)(f"image {idx}: {exc}") from exc
    return out
