"""Input validation helpers shared by the estimators and the pipeline."""

import numpy as np

PATCH_SIZE = 32


def check_rgb_image(image, name="image"):
    """Validate an (h, w, 3) uint8 image and return it as an ndarray."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name} must have shape (h, w, 3), got {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {arr.dtype}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got {arr.shape[:2]}")
    return arr


def check_patch_batch(X, name="X"):
    """Validate patches as (n, 32, 32, 3) floats in [0, 1]; promotes a single patch."""
    arr = np.asarray(X, dtype=np.float32)
    if arr.ndim == 3:
        arr = arr[None, ...]
    if arr.ndim != 4 or arr.shape[1:] != (PATCH_SIZE, PATCH_SIZE, 3):
        raise ValueError(
            f"{name} must have shape (n, {PATCH_SIZE}, {PATCH_SIZE}, 3), got {np.asarray(X).shape}"
        )
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < -1e-6 or arr.max() > 1.0 + 1e-6:
        raise ValueError(f"{name} values must lie in [0, 1]")
    return arr


def check_binary_labels(y, n=None, name="y"):
    """Validate 0/1 labels and return them as an int array."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} entries for {n} samples")
    if arr.dtype == bool:
        arr = arr.astype(np.int64)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def check_centers(C, n=None, name="targets"):
    """Validate normalized (x, y) targets as an (n, 2) float array in [0, 1]^2."""
    arr = np.asarray(C, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {np.asarray(C).shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} entries for {n} samples")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} must lie in [0, 1]^2 (patch-relative coordinates)")
    return arr


def check_window_in_image(window, image_shape):
    """Validate that a (x, y, width, height) window lies inside the image."""
    h, w = image_shape[0], image_shape[1]
    if window.width <= 0 or window.height <= 0:
        raise ValueError(f"window has non-positive size: {window}")
    if window.x < 0 or window.y < 0 or window.x + window.width > w or window.y + window.height > h:
        raise ValueError(f"window {window} does not fit inside a {w}x{h} image")
