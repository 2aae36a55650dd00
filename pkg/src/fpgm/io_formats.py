"""Deterministic file I/O: PNG images/masks, prior JSON, FloatGrid binaries,
CSV reports, JSON-lines sidecars, and dataset manifests.

All writes go through a temp file + atomic rename so partial files never
appear under the target path.
"""

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import InvalidInput, UnsupportedFormat, UnsupportedVersion
from .prior import FrequencyPrior, to_grayscale

PRIOR_FORMAT_VERSION = 1
FLOATGRID_MAGIC = b"FPGMGRID"
IMAGE_EXTENSIONS = (".png",)


@dataclass
class DatasetManifest:
    """Ordered (id, image_path, mask_path) entries; order is lexicographic by
    id so EMA folds are reproducible across platforms."""

    root: str = ""
    entries: list = field(default_factory=list)  # (id, image_path, mask_path|None)


def _atomic_write(path, data: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fpgm-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resize_bilinear(arr, size):
    """Bilinear resize of a float array (per channel) to size x size."""
    if arr.ndim == 2:
        return np.asarray(
            Image.fromarray(arr.astype(np.float32), mode="F").resize(
                (size, size), Image.BILINEAR
            ),
            dtype=np.float64,
        )
    return np.stack(
        [_resize_bilinear(arr[:, :, c], size) for c in range(arr.shape[2])], axis=2
    )


def load_image(path, resize=None):
    """Load an 8- or 16-bit PNG as float intensities in [0,1].

    resize, when given, bilinearly resamples to resize x resize.
    """
    try:
        im = Image.open(path)
        im.load()
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise UnsupportedFormat(f"{path}: cannot decode ({exc})") from exc
    if im.format != "PNG":
        raise UnsupportedFormat(f"{path}: expected PNG, got {im.format}")
    if im.mode in ("L", "RGB"):
        arr = np.asarray(im, dtype=np.float64) / 255.0
    elif im.mode in ("I", "I;16"):
        arr = np.asarray(im, dtype=np.float64) / 65535.0
    else:
        raise UnsupportedFormat(f"{path}: unsupported PNG mode {im.mode}")
    if resize is not None:
        arr = _resize_bilinear(arr, int(resize))
    return arr


def load_mask(path, threshold=0.5, resize=None):
    """Load a mask PNG (grayscale or RGB via luma) and binarize at threshold."""
    arr = load_image(path, resize=resize)
    gray = to_grayscale(arr)
    return (gray >= threshold).astype(np.uint8)


def save_image(img, path):
    """Write an image as 8-bit PNG; values clipped to [0,1] and rounded."""
    arr = np.asarray(img, dtype=np.float64)
    quant = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if quant.ndim == 3 and quant.shape[2] == 1:
        quant = quant[:, :, 0]
    mode = "L" if quant.ndim == 2 else "RGB"
    import io

    buf = io.BytesIO()
    Image.fromarray(quant, mode=mode).save(buf, format="PNG")
    _atomic_write(path, buf.getvalue())


def save_prior(prior, path):
    """Persist a FrequencyPrior as versioned JSON (atomic, bit-exact floats)."""
    doc = {
        "format_version": PRIOR_FORMAT_VERSION,
        "aggregation_mode": prior.aggregation_mode,
        "momentum": prior.momentum,
        "samples_seen": prior.samples_seen,
        "source_height": int(prior.source_dims[0]),
        "source_width": int(prior.source_dims[1]),
        "r_max": int(len(prior.profile) - 1),
        "values": [float(v) for v in prior.profile],
    }
    _atomic_write(path, (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode())


def load_prior(path):
    with open(path, "rb") as fh:
        doc = json.loads(fh.read())
    version = doc.get("format_version")
    if version != PRIOR_FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: unknown prior format_version {version!r}")
    values = np.asarray(doc["values"], dtype=np.float64)
    if values.size != doc["r_max"] + 1:
        raise InvalidInput(f"{path}: r_max inconsistent with values length")
    return FrequencyPrior(
        profile=values,
        momentum=float(doc["momentum"]),
        samples_seen=int(doc["samples_seen"]),
        source_dims=(int(doc["source_height"]), int(doc["source_width"])),
        aggregation_mode=doc["aggregation_mode"],
    )


def write_float_grid(path, arr):
    """Binary float32 grid: magic, u32 H/W/C little-endian, row-major payload."""
    a = np.asarray(arr, dtype=np.float32)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3:
        raise InvalidInput(f"FloatGrid needs a 2D or 3D array, got ndim {a.ndim}")
    h, w, c = a.shape
    header = FLOATGRID_MAGIC + struct.pack("<III", h, w, c)
    _atomic_write(path, header + np.ascontiguousarray(a).astype("<f4").tobytes())


def read_float_grid(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != FLOATGRID_MAGIC:
        raise UnsupportedFormat(f"{path}: bad FloatGrid magic")
    h, w, c = struct.unpack("<III", blob[8:20])
    payload = blob[20:]
    if len(payload) != h * w * c * 4:
        raise InvalidInput(f"{path}: payload length mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w, c).astype(np.float64)


def write_csv(path, header, rows):
    """Write a CSV with one header row; values pre-formatted by the caller."""
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def write_jsonl(path, records):
    lines = [json.dumps(rec, sort_keys=True) for rec in records]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def write_json(path, obj):
    _atomic_write(path, (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode())


def build_manifest(images_dir, masks_dir=None):
    """Pair images with masks by shared basename stem, sorted by id.

    Unmatched images (when a masks dir is given) are skipped; the caller can
    compare entry count against the directory listing if it cares.
    """
    manifest = DatasetManifest(root=str(images_dir))
    images = {}
    for name in sorted(os.listdir(images_dir)):
        stem, ext = os.path.splitext(name)
        if ext.lower() in IMAGE_EXTENSIONS:
            images[stem] = os.path.join(images_dir, name)
    masks = {}
    if masks_dir is not None:
        for name in sorted(os.listdir(masks_dir)):
            stem, ext = os.path.splitext(name)
            if ext.lower() in IMAGE_EXTENSIONS:
                masks[stem] = os.path.join(masks_dir, name)
    for stem in sorted(images):
        if masks_dir is not None and stem not in masks:
            continue
        manifest.entries.append((stem, images[stem], masks.get(stem)))
    return manifest
