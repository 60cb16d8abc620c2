"""Binary weight files.

Layout (all integers little-endian):

    magic "KCW1" | version u32 | record count u32
    per record: name length u16 | name utf-8 | rank u8 | dims u32 each |
                float32 little-endian values, row-major
"""

import struct
from collections import OrderedDict

import numpy as np

MAGIC = b"KCW1"
VERSION = 1


def save_weights(network, path):
    """Write every state array of the network; values are stored as float32."""
    items = network.state_items()
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", VERSION, len(items))
    for name, arr in items:
        encoded = name.encode("utf-8")
        arr32 = np.ascontiguousarray(arr, dtype="<f4")
        blob += struct.pack("<H", len(encoded))
        blob += encoded
        blob += struct.pack("<B", arr32.ndim)
        blob += struct.pack(f"<{arr32.ndim}I", *arr32.shape)
        blob += arr32.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load_weights(path):
    """Read a weight file into an ordered name -> float32 array mapping.

    Any structural problem (bad magic, unknown version, truncation) raises
    ValueError before anything is returned, so callers never see a partial
    set of weights.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    view = memoryview(blob)
    pos = 0

    def take(n, what):
        nonlocal pos
        if pos + n > len(view):
            raise ValueError(f"truncated weight file: ran out of bytes reading {what}")
        chunk = view[pos:pos + n]
        pos += n
        return chunk

    if bytes(take(4, "magic")) != MAGIC:
        raise ValueError(f"not a weight file: bad magic (expected {MAGIC!r})")
    (version,) = struct.unpack("<I", take(4, "version"))
    if version != VERSION:
        raise ValueError(f"unsupported weight file version {version} (expected {VERSION})")
    (count,) = struct.unpack("<I", take(4, "record count"))
    records = OrderedDict()
    for i in range(count):
        (name_len,) = struct.unpack("<H", take(2, f"record {i} name length"))
        name = bytes(take(name_len, f"record {i} name")).decode("utf-8")
        (rank,) = struct.unpack("<B", take(1, f"{name}: rank"))
        dims = struct.unpack(f"<{rank}I", take(4 * rank, f"{name}: dims"))
        n_values = int(np.prod(dims, dtype=np.int64)) if rank else 1
        data = take(4 * n_values, f"{name}: values")
        records[name] = np.frombuffer(data, dtype="<f4").reshape(dims).copy()
    if pos != len(view):
        raise ValueError(f"weight file has {len(view) - pos} trailing bytes")
    return records


def load_weights_into(network, path):
    """Load a weight file into an existing network, validating names/shapes."""
    records = load_weights(path)
    network.load_state_items(list(records.items()))
    return network
