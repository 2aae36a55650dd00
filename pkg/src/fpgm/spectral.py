"""Core 2D frequency-domain primitives.

Images are plain float arrays of shape (H, W) or (H, W, C) with C in {1, 3}.
Spectra are kept centered (DC at (H//2, W//2)) so radial binning can measure
distance from the grid center directly.

Conventions: forward transform is unnormalized, the inverse carries the
1/(H*W) factor. Radial bins use round-half-up to integer radii; the radial
broadcast interpolates linearly between neighboring radii.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


@dataclass
class CenteredSpectrum:
    """Per-channel amplitude/phase of a centered 2D Fourier transform.

    amplitude and phase always have shape (H, W, C); squeeze_channel records
    whether the source image was 2D so the inverse can restore its shape.
    """

    amplitude: np.ndarray
    phase: np.ndarray
    squeeze_channel: bool = False

    @property
    def height(self):
        return self.amplitude.shape[0]

    @property
    def width(self):
        return self.amplitude.shape[1]

    @property
    def channels(self):
        return self.amplitude.shape[2]

    @property
    def dc(self):
        return self.height // 2, self.width // 2


def _as_channels(img):
    """Return a (H, W, C) float view of an image plus a had-no-channel flag."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return arr[:, :, None], True
    if arr.ndim == 3 and arr.shape[2] in (1, 3):
        return arr, False
    raise InvalidInput(f"expected (H,W) or (H,W,C) with C in {{1,3}}, got shape {arr.shape}")


def _validate_image(arr):
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise InvalidInput(f"image dims must be >= 2, got {arr.shape[:2]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("image contains non-finite values")


def corner_radius(height, width):
    """Largest integer radius on a grid centered at (H//2, W//2)."""
    dc_r, dc_c = height // 2, width // 2
    return int(np.floor(np.hypot(dc_r, dc_c)))


def radius_map(height, width):
    """Continuous distance of every bin from the grid center."""
    dc_r, dc_c = height // 2, width // 2
    rows = np.arange(height, dtype=np.float64) - dc_r
    cols = np.arange(width, dtype=np.float64) - dc_c
    return np.hypot(rows[:, None], cols[None, :])


def radius_bins(height, width):
    """Integer annulus index per bin (round-half-up, clamped to the corner radius).

    Clamping matters only on non-square grids where a corner bin's rounded
    distance can exceed floor(corner distance) by one.
    """
    r_max = corner_radius(height, width)
    bins = np.floor(radius_map(height, width) + 0.5).astype(np.int64)
    np.minimum(bins, r_max, out=bins)
    return bins, r_max


def forward_spectrum(img):
    """Centered per-channel amplitude/phase decomposition of an image."""
    arr, squeeze = _as_channels(img)
    _validate_image(arr)
    spec = np.fft.fftshift(np.fft.fft2(arr, axes=(0, 1)), axes=(0, 1))
    return CenteredSpectrum(
        amplitude=np.abs(spec), phase=np.angle(spec), squeeze_channel=squeeze
    )


def inverse_spectrum(spec, return_residue=False):
    """Invert a centered spectrum back to the spatial domain.

    Returns the real part (unclipped). With return_residue=True also returns
    the max absolute imaginary component as a conjugate-symmetry diagnostic.
    """
    if spec.amplitude.shape != spec.phase.shape:
        raise InvalidInput("amplitude/phase shape mismatch")
    complex_spec = spec.amplitude * np.exp(1j * spec.phase)
    spatial = np.fft.ifft2(np.fft.ifftshift(complex_spec, axes=(0, 1)), axes=(0, 1))
    img = spatial.real
    if spec.squeeze_channel:
        img = img[:, :, 0]
    if return_residue:
        return img, float(np.max(np.abs(spatial.imag)))
    return img


def radial_profile(amplitude, dc=None):
    """Mean amplitude per integer-radius annulus around the spectrum center.

    Empty annuli (possible near the corner radius on non-square grids) get 0.
    """
    amp = np.asarray(amplitude, dtype=np.float64)
    if amp.ndim != 2:
        raise InvalidInput(f"expected a 2D amplitude grid, got shape {amp.shape}")
    if np.any(amp < 0):
        raise InvalidInput("amplitude must be nonnegative")
    h, w = amp.shape
    if dc is not None and tuple(dc) != (h // 2, w // 2):
        raise InvalidInput("dc must be the grid center (H//2, W//2)")
    bins, r_max = radius_bins(h, w)
    flat = bins.ravel()
    sums = np.bincount(flat, weights=amp.ravel(), minlength=r_max + 1)
    counts = np.bincount(flat, minlength=r_max + 1)
    profile = np.zeros(r_max + 1, dtype=np.float64)
    nonempty = counts > 0
    profile[nonempty] = sums[nonempty] / counts[nonempty]
    return profile


def broadcast_profile(profile, height, width):
    """Expand a radial profile to a full 2D amplitude grid.

    Each bin gets the profile linearly interpolated at its continuous radius;
    radii beyond the profile's last entry clamp to that entry. The result is
    radially symmetric by construction.
    """
    values = np.asarray(profile, dtype=np.float64)
    if values.ndim != 1 or values.size < 1:
        raise InvalidInput("profile must be a nonempty 1D array")
    d = radius_map(height, width)
    last = values.size - 1
    np.minimum(d, last, out=d)
    lo = np.floor(d).astype(np.int64)
    hi = np.minimum(lo + 1, last)
    frac = d - lo
    return values[lo] * (1.0 - frac) + values[hi] * frac
