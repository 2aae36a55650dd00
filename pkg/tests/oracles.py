"""Independent brute-force oracles used to freeze expected values.

Everything here is deliberately slow, loop-based, and separate from the
library's code paths.
"""

import math

import numpy as np


def dft2_bruteforce(img):
    """Direct O(N^2 M^2) 2D DFT, centered, returning (amplitude, phase)."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.zeros((h, w), dtype=complex)
    for u in range(h):
        for v in range(w):
            acc = 0.0j
            for m in range(h):
                for n in range(w):
                    acc += img[m, n] * np.exp(-2j * math.pi * (u * m / h + v * n / w))
            out[u, v] = acc
    centered = np.roll(np.roll(out, h // 2, axis=0), w // 2, axis=1)
    return np.abs(centered), np.angle(centered)


def radial_binning_oracle(amp):
    """Hash-map annulus binning with round-half-up radii, clamped to R_max."""
    amp = np.asarray(amp, dtype=np.float64)
    h, w = amp.shape
    dc_r, dc_c = h // 2, w // 2
    r_max = int(math.floor(math.hypot(dc_r, dc_c)))
    buckets = {}
    for u in range(h):
        for v in range(w):
            r = int(math.floor(math.hypot(u - dc_r, v - dc_c) + 0.5))
            r = min(r, r_max)
            buckets.setdefault(r, []).append(amp[u, v])
    profile = np.zeros(r_max + 1)
    for r, vals in buckets.items():
        profile[r] = sum(vals) / len(vals)
    return profile


def sobel_edge_dilate_oracle(mask, dilation_radius):
    """Pixelwise Sobel (replicate border) -> binarize -> Chebyshev dilation."""
    mask = np.asarray(mask, dtype=np.float64)
    h, w = mask.shape
    sx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    sy = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]

    def at(r, c):
        return mask[min(max(r, 0), h - 1), min(max(c, 0), w - 1)]

    edges = np.zeros((h, w), dtype=bool)
    for r in range(h):
        for c in range(w):
            gx = gy = 0.0
            for i in range(3):
                for j in range(3):
                    v = at(r + i - 1, c + j - 1)
                    gx += sx[i][j] * v
                    gy += sy[i][j] * v
            edges[r, c] = math.hypot(gx, gy) > 0
    out = np.zeros((h, w), dtype=np.uint8)
    rad = int(dilation_radius)
    for r in range(h):
        for c in range(w):
            for rr in range(max(0, r - rad), min(h, r + rad + 1)):
                for cc in range(max(0, c - rad), min(w, c + rad + 1)):
                    if edges[rr, cc]:
                        out[r, c] = 1
    return out


def boundary_oracle(mask):
    """4-neighbor boundary pixels of a binary mask (border = background)."""
    mask = np.asarray(mask).astype(bool)
    h, w = mask.shape
    pts = []
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if rr < 0 or rr >= h or cc < 0 or cc >= w or not mask[rr, cc]:
                    pts.append((r, c))
                    break
    return pts


def percentile_linear(values, q):
    """Linear-interpolation percentile between closest order statistics."""
    vals = sorted(values)
    if len(vals) == 1:
        return vals[0]
    pos = (q / 100.0) * (len(vals) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(vals) - 1)
    frac = pos - lo
    return vals[lo] * (1 - frac) + vals[hi] * frac


def hd95_asd_bruteforce(pred, gt):
    """All-pairs directed boundary distances pooled symmetrically."""
    bp = boundary_oracle(pred)
    bg = boundary_oracle(gt)
    assert bp and bg
    pooled = []
    for a_set, b_set in ((bp, bg), (bg, bp)):
        for a in a_set:
            pooled.append(min(math.dist(a, b) for b in b_set))
    return percentile_linear(pooled, 95), sum(pooled) / len(pooled)
