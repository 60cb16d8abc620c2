"""Patch extraction, augmentation, and dataset splitting.

Coordinate convention: positions are continuous, measured from the top-left
corner of the enclosing patch or window; a point at normalized coordinate
``c`` lies at pixel offset ``c * side``. A horizontal flip therefore maps
``x`` to ``side - x``.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..validation import PATCH_SIZE, check_rgb_image, check_window_in_image

LABEL_KERNEL = "kernel"
LABEL_NON_KERNEL = "non_kernel"

AUGMENT_OPS = ("flip_h", "flip_v", "color_jitter")


@dataclass
class PatchSample:
    """A normalized patch with its label and, for kernels, the center annotation
    in patch pixel coordinates."""

    patch: np.ndarray
    label: str
    center: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.label not in (LABEL_KERNEL, LABEL_NON_KERNEL):
            raise ValueError(f"unknown label {self.label!r}")
        if self.center is not None and self.label != LABEL_KERNEL:
            raise ValueError("only kernel samples carry a center annotation")


def bilinear_resize(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with half-pixel-center mapping; identity when sizes match."""
    img = np.asarray(image, dtype=np.float32)
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0).astype(np.float32)[:, None, None]
    fx = (xs - x0).astype(np.float32)[None, :, None]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bot = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def extract_patch(image, window, size: int = PATCH_SIZE) -> np.ndarray:
    """Crop a window, resize to ``size`` x ``size``, normalize to [0, 1] float32."""
    image = check_rgb_image(image)
    check_window_in_image(window, image.shape)
    crop = image[window.y:window.y + window.height, window.x:window.x + window.width]
    return bilinear_resize(crop.astype(np.float32) / 255.0, size, size)


def extract_patches(image, xs, ys, width: int, height: int, size: int = PATCH_SIZE) -> np.ndarray:
    """Batched version of :func:`extract_patch` for same-sized windows.

    ``xs``/``ys`` are equal-length arrays of top-left corners. The bilinear
    sampling grid is precomputed once, so this matches extract_patch exactly
    while staying fully vectorized.
    """
    image = check_rgb_image(image)
    xs = np.asarray(xs, dtype=np.intp)
    ys = np.asarray(ys, dtype=np.intp)
    h, w = image.shape[:2]
    if len(xs) == 0:
        return np.empty((0, size, size, 3), dtype=np.float32)
    if xs.min() < 0 or ys.min() < 0 or (xs + width).max() > w or (ys + height).max() > h:
        raise ValueError("window batch extends outside the image")
    crops = _gather_crops(image, xs, ys, width, height).astype(np.float32) / 255.0
    if (height, width) == (size, size):
        return crops
    sy = np.clip((np.arange(size) + 0.5) * (height / size) - 0.5, 0.0, height - 1.0)
    sx = np.clip((np.arange(size) + 0.5) * (width / size) - 0.5, 0.0, width - 1.0)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    y1 = np.minimum(y0 + 1, height - 1)
    x1 = np.minimum(x0 + 1, width - 1)
    fy = (sy - y0).astype(np.float32)[None, :, None, None]
    fx = (sx - x0).astype(np.float32)[None, None, :, None]
    c00 = crops[:, y0][:, :, x0]
    c01 = crops[:, y0][:, :, x1]
    c10 = crops[:, y1][:, :, x0]
    c11 = crops[:, y1][:, :, x1]
    top = c00 * (1 - fx) + c01 * fx
    bot = c10 * (1 - fx) + c11 * fx
    return top * (1 - fy) + bot * fy


def _gather_crops(image, xs, ys, width, height):
    rows = ys[:, None, None] + np.arange(height)[None, :, None]
    cols = xs[:, None, None] + np.arange(width)[None, None, :]
    return image[rows, cols]


def flip_patch_h(patch, center=None):
    """Mirror left-right; a center at x moves to side - x."""
    flipped = np.ascontiguousarray(patch[:, ::-1])
    if center is None:
        return flipped, None
    side = patch.shape[1]
    return flipped, (side - center[0], center[1])


def flip_patch_v(patch, center=None):
    """Mirror top-bottom; a center at y moves to side - y."""
    flipped = np.ascontiguousarray(patch[::-1])
    if center is None:
        return flipped, None
    side = patch.shape[0]
    return flipped, (center[0], side - center[1])


def color_jitter(patch, factors):
    """Scale each channel by its factor, clamped back into [0, 1]."""
    factors = np.asarray(factors, dtype=np.float32)
    if factors.shape != (3,):
        raise ValueError(f"need one factor per channel, got shape {factors.shape}")
    return np.clip(patch * factors, 0.0, 1.0)


def augment(sample: PatchSample, ops, seed: int) -> PatchSample:
    """Apply the requested ops; flips transform the center annotation with the pixels.

    Jitter factors are drawn from the seed in [0.8, 1.2] per channel, so the
    same (sample, ops, seed) triple always produces the same output.
    """
    rng = np.random.default_rng(seed)
    patch, center = sample.patch, sample.center
    for op in ops:
        if op == "flip_h":
            patch, center = flip_patch_h(patch, center)
        elif op == "flip_v":
            patch, center = flip_patch_v(patch, center)
        elif op == "color_jitter":
            patch = color_jitter(patch, rng.uniform(0.8, 1.2, size=3))
        else:
            raise ValueError(f"unknown augmentation op {op!r} (choose from {AUGMENT_OPS})")
    return PatchSample(patch=patch, label=sample.label, center=center)


def expand_with_augmentation(X, y=None, centers=None, fraction=0.7, seed=0):
    """Append augmented copies of a random ``fraction`` of the samples.

    Each selected sample gets a random non-empty combination of flips plus
    color jitter. Flips rewrite the (normalized) center targets when given.
    Returns the grown arrays in original-then-augmented order.
    """
    X = np.asarray(X)
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    n_aug = int(round(fraction * n))
    chosen = rng.choice(n, size=n_aug, replace=False) if n_aug else np.empty(0, dtype=np.intp)
    side = X.shape[1]
    aug_patches = np.empty((n_aug,) + X.shape[1:], dtype=X.dtype)
    aug_centers = None if centers is None else np.empty((n_aug, 2), dtype=np.float64)
    for row, i in enumerate(chosen):
        patch = X[i]
        center = None
        if centers is not None:
            center = (centers[i][0] * side, centers[i][1] * side)
        do_h, do_v = rng.random() < 0.5, rng.random() < 0.5
        if not (do_h or do_v):
            do_h = True
        if do_h:
            patch, center = flip_patch_h(patch, center)
        if do_v:
            patch, center = flip_patch_v(patch, center)
        patch = color_jitter(patch, rng.uniform(0.8, 1.2, size=3))
        aug_patches[row] = patch
        if aug_centers is not None:
            aug_centers[row] = (center[0] / side, center[1] / side)
    out = [np.concatenate([X, aug_patches], axis=0)]
    if y is not None:
        y = np.asarray(y)
        out.append(np.concatenate([y, y[chosen]], axis=0))
    if centers is not None:
        out.append(np.concatenate([np.asarray(centers, dtype=np.float64), aug_centers], axis=0))
    return tuple(out) if len(out) > 1 else out[0]


def split_indices(n: int, test_fraction: float, seed: int):
    """Disjoint, exhaustive (train, test) index split; test size is the
    nearest integer to n * fraction."""
    if n < 1:
        raise ValueError("cannot split an empty dataset")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test fraction must be in (0, 1), got {test_fraction}")
    n_test = int(np.floor(n * test_fraction + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])
