"""fpgm: frequency-prior guided spectral-shape-alignment augmentation toolkit."""

from .augment import AlignmentConfig, align_shape, augment_batch, fpgm_augment, shape_energy
from .prior import (
    FrequencyPrior,
    edge_mask,
    edge_signature,
    generic_prior,
    learn_prior,
    lowpass_prior,
    update_prior,
)
from .spectral import (
    CenteredSpectrum,
    broadcast_profile,
    forward_spectrum,
    inverse_spectrum,
    radial_profile,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentConfig",
    "CenteredSpectrum",
    "FrequencyPrior",
    "align_shape",
    "augment_batch",
    "broadcast_profile",
    "edge_mask",
    "edge_signature",
    "forward_spectrum",
    "fpgm_augment",
    "generic_prior",
    "inverse_spectrum",
    "learn_prior",
    "lowpass_prior",
    "radial_profile",
    "shape_energy",
    "update_prior",
    "__version__",
]
