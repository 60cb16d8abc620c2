"""Layers for the patch networks.

All spatial tensors are channels-last: ``(batch, height, width, channels)``.
Convolutions are valid (no padding). Inference-mode forward never mutates
layer state, so a fitted network can be read concurrently; training-mode
forward caches whatever backward needs and is single-writer.
"""

import numpy as np

from .init import xavier_uniform


class Param:
    """A weight array together with its gradient buffer."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name, value):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)


class Layer:
    kind = "layer"

    def __init__(self):
        self.name = self.kind
        self._cache = None

    def params(self):
        return []

    def state_arrays(self):
        """Everything that must survive serialization: params plus buffers."""
        return [(p.name, p.value) for p in self.params()]

    def set_state_array(self, suffix, value):
        for p in self.params():
            if p.name == suffix:
                if p.value.shape != value.shape:
                    raise ValueError(
                        f"{self.name}.{suffix}: expected shape {p.value.shape}, "
                        f"file has {value.shape}"
                    )
                p.value[...] = value
                return
        raise KeyError(f"{self.name} has no state array {suffix!r}")

    def forward(self, x, training=False):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def _take_cache(self):
        if self._cache is None:
            raise RuntimeError(
                f"{self.name}: backward() called without a training-mode forward()"
            )
        cache = self._cache
        self._cache = None
        return cache


def _require(cond, message):
    if not cond:
        raise ValueError(message)


class Conv2D(Layer):
    """Valid 2D convolution with one bias per filter.

    Weights are ``(k, k, in_channels, filters)``; forward/backward are nine
    shifted GEMMs (one per kernel offset), which keeps memory flat compared
    to im2col while still running on BLAS.
    """

    kind = "conv2d"

    def __init__(self, in_channels, filters, size=3, stride=1, rng=None, dtype=np.float32):
        super().__init__()
        _require(size >= 1 and stride >= 1, "filter size and stride must be >= 1")
        self.in_channels = in_channels
        self.filters = filters
        self.size = size
        self.stride = stride
        self.dtype = np.dtype(dtype)
        if rng is None:
            rng = np.random.default_rng(0)
        w = xavier_uniform((size, size, in_channels, filters), rng, dtype=self.dtype)
        self.w = Param("w", w)
        self.b = Param("b", np.zeros(filters, dtype=self.dtype))

    def params(self):
        return [self.w, self.b]

    def output_shape(self, input_shape):
        h, w, c = input_shape
        _require(c == self.in_channels,
                 f"{self.name}: input has {c} channels, expected {self.in_channels}")
        _require(h >= self.size and w >= self.size,
                 f"{self.name}: input {h}x{w} smaller than {self.size}x{self.size} filter")
        return ((h - self.size) // self.stride + 1,
                (w - self.size) // self.stride + 1,
                self.filters)

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=self.dtype)
        _require(x.ndim == 4, f"{self.name}: expected (batch, h, w, c) input, got shape {x.shape}")
        n, h, w, c = x.shape
        ho, wo, co = self.output_shape((h, w, c))
        k, s = self.size, self.stride
        out = np.zeros((n * ho * wo, co), dtype=self.dtype)
        wmat = self.w.value
        for a in range(k):
            for b in range(k):
                xs = x[:, a:a + (ho - 1) * s + 1:s, b:b + (wo - 1) * s + 1:s, :]
                out += xs.reshape(-1, c) @ wmat[a, b]
        out += self.b.value
        if training:
            self._cache = x
        return out.reshape(n, ho, wo, co)

    def backward(self, dy):
        x = self._take_cache()
        n, h, w, c = x.shape
        k, s = self.size, self.stride
        ho, wo, co = dy.shape[1], dy.shape[2], dy.shape[3]
        dy2 = dy.reshape(-1, co)
        self.b.grad[...] = dy2.sum(axis=0)
        dx = np.zeros_like(x)
        wmat = self.w.value
        for a in range(k):
            for b in range(k):
                xs = x[:, a:a + (ho - 1) * s + 1:s, b:b + (wo - 1) * s + 1:s, :]
                self.w.grad[a, b] = xs.reshape(-1, c).T @ dy2
                dx[:, a:a + (ho - 1) * s + 1:s, b:b + (wo - 1) * s + 1:s, :] += (
                    dy2 @ wmat[a, b].T).reshape(n, ho, wo, c)
        return dx


class _Pool2D(Layer):
    def __init__(self, size, stride):
        super().__init__()
        _require(size >= 1 and stride >= 1, "pool size and stride must be >= 1")
        self.size = size
        self.stride = stride

    def output_shape(self, input_shape):
        h, w, c = input_shape
        _require(self.size <= h and self.size <= w,
                 f"{self.name}: {self.size}x{self.size} pool window larger than {h}x{w} input")
        return ((h - self.size) // self.stride + 1,
                (w - self.size) // self.stride + 1,
                c)

    def _windows(self, x):
        n, h, w, c = x.shape
        ho, wo, _ = self.output_shape((h, w, c))
        win = np.lib.stride_tricks.sliding_window_view(x, (self.size, self.size), axis=(1, 2))
        return win[:, ::self.stride, ::self.stride], (ho, wo)


class AvgPool2D(_Pool2D):
    """Average pooling; supports overlapping windows."""

    kind = "avgpool"

    def forward(self, x, training=False):
        x = np.asarray(x)
        _require(x.ndim == 4, f"{self.name}: expected (batch, h, w, c) input, got shape {x.shape}")
        win, _ = self._windows(x)
        out = win.mean(axis=(-2, -1))
        if training:
            self._cache = x.shape
        return out

    def backward(self, dy):
        shape = self._take_cache()
        k, s = self.size, self.stride
        ho, wo = dy.shape[1], dy.shape[2]
        dx = np.zeros(shape, dtype=dy.dtype)
        share = dy / (k * k)
        for a in range(k):
            for b in range(k):
                dx[:, a:a + (ho - 1) * s + 1:s, b:b + (wo - 1) * s + 1:s, :] += share
        return dx


class MaxPool2D(_Pool2D):
    """Max pooling; the winner index per window is cached for backward."""

    kind = "maxpool"

    def forward(self, x, training=False):
        x = np.asarray(x)
        _require(x.ndim == 4, f"{self.name}: expected (batch, h, w, c) input, got shape {x.shape}")
        win, (ho, wo) = self._windows(x)
        n, _, _, c = x.shape
        flat = win.reshape(n, ho, wo, c, self.size * self.size)
        idx = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        if training:
            self._cache = (x.shape, idx)
        return out

    def backward(self, dy):
        shape, idx = self._take_cache()
        n, h, w, c = shape
        k, s = self.size, self.stride
        ho, wo = dy.shape[1], dy.shape[2]
        dx = np.zeros(shape, dtype=dy.dtype)
        if s == k:
            # non-overlapping: winners can be scattered with one vectorized write
            dwin = np.zeros((n, ho, wo, c, k * k), dtype=dy.dtype)
            np.put_along_axis(dwin, idx[..., None], dy[..., None], axis=-1)
            block = dwin.reshape(n, ho, wo, c, k, k).transpose(0, 1, 4, 2, 5, 3)
            dx[:, :ho * k, :wo * k, :] = block.reshape(n, ho * k, wo * k, c)
        else:
            rows = (np.arange(ho) * s)[None, :, None, None] + idx // k
            cols = (np.arange(wo) * s)[None, None, :, None] + idx % k
            batch = np.arange(n)[:, None, None, None]
            chan = np.arange(c)[None, None, None, :]
            np.add.at(dx, (batch, rows, cols, chan), dy)
        return dx


class BatchNorm(Layer):
    """Per-channel batch normalization with exponential running statistics.

    Works on ``(n, h, w, c)`` and ``(n, c)`` inputs alike: every axis except
    the last is treated as part of the batch. Inference before any training
    batch has been seen is rejected.
    """

    kind = "batchnorm"

    def __init__(self, channels, momentum=0.9, eps=1e-5, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.dtype = np.dtype(dtype)
        self.gamma = Param("gamma", np.ones(channels, dtype=self.dtype))
        self.beta = Param("beta", np.zeros(channels, dtype=self.dtype))
        self.running_mean = np.zeros(channels, dtype=self.dtype)
        self.running_var = np.ones(channels, dtype=self.dtype)
        self.batches_seen = 0

    def params(self):
        return [self.gamma, self.beta]

    def state_arrays(self):
        return [
            ("gamma", self.gamma.value),
            ("beta", self.beta.value),
            ("running_mean", self.running_mean),
            ("running_var", self.running_var),
            ("batches_seen", np.array([self.batches_seen], dtype=self.dtype)),
        ]

    def set_state_array(self, suffix, value):
        if suffix == "running_mean":
            _require(value.shape == self.running_mean.shape,
                     f"{self.name}.running_mean: shape mismatch {value.shape}")
            self.running_mean[...] = value
        elif suffix == "running_var":
            _require(value.shape == self.running_var.shape,
                     f"{self.name}.running_var: shape mismatch {value.shape}")
            self.running_var[...] = value
        elif suffix == "batches_seen":
            self.batches_seen = int(value.reshape(-1)[0])
        else:
            super().set_state_array(suffix, value)

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=self.dtype)
        _require(x.shape[-1] == self.channels,
                 f"{self.name}: input has {x.shape[-1]} channels, expected {self.channels}")
        axes = tuple(range(x.ndim - 1))
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.running_mean[...] = m * self.running_mean + (1.0 - m) * mean
            self.running_var[...] = m * self.running_var + (1.0 - m) * var
            self.batches_seen += 1
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean) * inv_std
            self._cache = (xhat, inv_std, x[..., 0].size)
        else:
            if self.batches_seen == 0:
                raise RuntimeError(
                    f"{self.name}: inference requested before any training statistics exist"
                )
            xhat = (x - self.running_mean) / np.sqrt(self.running_var + self.eps)
        return self.gamma.value * xhat + self.beta.value

    def backward(self, dy):
        xhat, inv_std, m = self._take_cache()
        axes = tuple(range(dy.ndim - 1))
        self.gamma.grad[...] = (dy * xhat).sum(axis=axes)
        self.beta.grad[...] = dy.sum(axis=axes)
        # gradient through the batch statistics
        scale = self.gamma.value * inv_std / m
        dx = scale * (m * dy - xhat * self.gamma.grad - self.beta.grad)
        return dx


class Dense(Layer):
    """Affine map on flattened features; no activation of its own."""

    kind = "dense"

    def __init__(self, in_features, out_features, rng=None, dtype=np.float32):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.dtype = np.dtype(dtype)
        if rng is None:
            rng = np.random.default_rng(0)
        self.w = Param("w", xavier_uniform((in_features, out_features), rng, dtype=self.dtype))
        self.b = Param("b", np.zeros(out_features, dtype=self.dtype))

    def params(self):
        return [self.w, self.b]

    def output_shape(self, input_shape):
        _require(len(input_shape) == 1 and input_shape[0] == self.in_features,
                 f"{self.name}: expected {self.in_features} input features, got {input_shape}")
        return (self.out_features,)

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=self.dtype)
        _require(x.ndim == 2, f"{self.name}: expected (batch, features) input, got shape {x.shape}")
        _require(x.shape[1] == self.in_features,
                 f"{self.name}: input has {x.shape[1]} features, expected {self.in_features}")
        if training:
            self._cache = x
        return x @ self.w.value + self.b.value

    def backward(self, dy):
        x = self._take_cache()
        self.w.grad[...] = x.T @ dy
        self.b.grad[...] = dy.sum(axis=0)
        return dy @ self.w.value.T


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, training=False):
        x = np.asarray(x)
        if training:
            self._cache = x > 0
        return np.maximum(x, 0)

    def backward(self, dy):
        mask = self._take_cache()
        return dy * mask


class Sigmoid(Layer):
    kind = "sigmoid"

    def forward(self, x, training=False):
        out = sigmoid(np.asarray(x))
        if training:
            self._cache = out
        return out

    def backward(self, dy):
        out = self._take_cache()
        return dy * out * (1.0 - out)


class Flatten(Layer):
    """Row-major flatten of the spatial dimensions."""

    kind = "flatten"

    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)

    def forward(self, x, training=False):
        x = np.asarray(x)
        if training:
            self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        shape = self._take_cache()
        return dy.reshape(shape)


def sigmoid(x):
    """Numerically stable logistic function."""
    out = np.empty_like(x, dtype=x.dtype)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
