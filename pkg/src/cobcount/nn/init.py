"""Weight initialization."""

import numpy as np


def fan_in_out(shape):
    """Fan-in/fan-out of a weight tensor.

    2D weights are (in, out); 4D convolution weights are (k, k, in, out)
    with fans scaled by the receptive field size.
    """
    shape = tuple(shape)
    if len(shape) == 2:
        return shape[0], shape[1]
    if len(shape) == 4:
        receptive = shape[0] * shape[1]
        return receptive * shape[2], receptive * shape[3]
    raise ValueError(f"no well-defined fan-in/fan-out for shape {shape}")


def xavier_uniform(shape, rng, dtype=np.float32):
    """Uniform samples in +-sqrt(6 / (fan_in + fan_out))."""
    fan_in, fan_out = fan_in_out(shape)
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)
