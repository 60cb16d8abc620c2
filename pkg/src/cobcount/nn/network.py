"""Ordered layer stacks with shape auditing and a backward pass."""

import numpy as np


class Network:
    """A sequence of layers sharing one dtype.

    Layers get stable names (``conv1``, ``bn1``, ...) on construction; those
    names key the weight file format. ``backward`` is only legal after a
    training-mode ``forward``.
    """

    def __init__(self, layers, dtype=np.float32):
        self.layers = list(layers)
        self.dtype = np.dtype(dtype)
        counts = {}
        short = {"conv2d": "conv", "batchnorm": "bn", "avgpool": "avgpool",
                 "maxpool": "maxpool", "dense": "fc"}
        for layer in self.layers:
            tag = short.get(layer.kind, layer.kind)
            counts[tag] = counts.get(tag, 0) + 1
            layer.name = f"{tag}{counts[tag]}"
        self._ready_for_backward = False

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim in (1, 3):
            # single sample: run as a batch of one
            out = self.forward(x[None, ...], training=training)
            return out[0]
        for layer in self.layers:
            x = layer.forward(x, training=training)
        if training:
            self._ready_for_backward = True
        return x

    def backward(self, loss_grad):
        if not self._ready_for_backward:
            raise RuntimeError("backward() called without a training-mode forward()")
        g = np.asarray(loss_grad, dtype=self.dtype)
        for layer in reversed(self.layers):
            g = layer.backward(g)
        self._ready_for_backward = False
        return g

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def zero_grads(self):
        for p in self.params():
            p.grad[...] = 0

    def state_items(self):
        """Flat (name, array) pairs in layer order, names ``layer.suffix``."""
        items = []
        for layer in self.layers:
            for suffix, arr in layer.state_arrays():
                items.append((f"{layer.name}.{suffix}", arr))
        return items

    def load_state_items(self, items):
        """Fill weights from (name, array) pairs; names and shapes must match."""
        by_name = {layer.name: layer for layer in self.layers}
        expected = [name for name, _ in self.state_items()]
        got = [name for name, _ in items]
        if expected != got:
            missing = sorted(set(expected) - set(got))
            extra = sorted(set(got) - set(expected))
            raise ValueError(
                "weight records do not match this architecture"
                + (f"; missing {missing}" if missing else "")
                + (f"; unexpected {extra}" if extra else "")
            )
        for name, arr in items:
            layer_name, suffix = name.split(".", 1)
            by_name[layer_name].set_state_array(suffix, np.asarray(arr, dtype=self.dtype))

    def shape_trace(self, input_shape):
        """Per-layer output shapes (sample shapes, no batch axis)."""
        shape = tuple(input_shape)
        trace = []
        for layer in self.layers:
            shape = layer.output_shape(shape)
            trace.append((layer.name, layer.kind, shape))
        return trace
