"""Training losses. Each returns the scalar and its gradient w.r.t. predictions."""

from dataclasses import dataclass

import numpy as np

PROB_EPS = 1e-7  # clamp floor for log loss probabilities


@dataclass
class LossValue:
    value: float
    grad: np.ndarray


def bce_loss(predictions, targets, eps=PROB_EPS):
    """Mean binary cross-entropy over the batch.

    Predictions are probabilities; they are clamped to [eps, 1-eps] before
    the logs, and the gradient is zero wherever the clamp was active.
    """
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"prediction shape {p.shape} != target shape {t.shape}")
    if not np.isin(t, (0.0, 1.0)).all():
        raise ValueError("log loss targets must be 0 or 1")
    pc = np.clip(p, eps, 1.0 - eps)
    n = p.size
    value = float(-(t * np.log(pc) + (1.0 - t) * np.log(1.0 - pc)).mean())
    grad = np.where((p > eps) & (p < 1.0 - eps), (pc - t) / (pc * (1.0 - pc) * n), 0.0)
    return LossValue(value, grad.astype(np.asarray(predictions).dtype, copy=False))


def smooth_l1_loss(predictions, targets):
    """Mean smooth L1: quadratic inside |d| < 1, linear beyond.

    The per-element gradient is clip(d, -1, 1) scaled by the mean.
    """
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"prediction shape {p.shape} != target shape {t.shape}")
    d = p - t
    ad = np.abs(d)
    value = float(np.where(ad < 1.0, 0.5 * d * d, ad - 0.5).mean())
    grad = np.clip(d, -1.0, 1.0) / d.size
    return LossValue(value, grad.astype(np.asarray(predictions).dtype, copy=False))
