"""Binary feature files and their JSON sidecars.

Layout, all integers little-endian u32::

    magic "DFEXFTR1" | n_layers | dims
    per layer: d | n_paths | length | label_bytes | label JSON | values

``label JSON`` is the list of paths (each a list of atom labels) in
canonical order; ``values`` are ``n_paths * length**dims`` complex samples
stored as interleaved float64.  Non-contributing layers have ``n_paths = 0``.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .config import label_from_json, label_to_json
from .errors import ConfigError, ShapeError
from .network import FeatureVector
from .signal_io import atomic_write, deinterleave, interleave

FEATURE_MAGIC = b"DFEXFTR1"
_HEAD = struct.Struct("<8sII")
_BLOCK = struct.Struct("<IIII")


def features_to_bytes(phi: FeatureVector, lengths=None) -> bytes:
    """Serialize ``phi``; ``lengths[d]`` fills in the length of empty layers."""
    parts = [_HEAD.pack(FEATURE_MAGIC, phi.depth, phi.dims)]
    for d, layer in enumerate(phi.layers):
        paths = list(layer)
        if paths:
            n = layer[paths[0]].shape[0]
        else:
            n = 0 if lengths is None else int(lengths[d])
        labels = json.dumps([[label_to_json(x) for x in q] for q in paths], separators=(",", ":")).encode()
        parts.append(_BLOCK.pack(d, len(paths), n, len(labels)))
        parts.append(labels)
        for q in paths:
            v = layer[q]
            if v.shape != (n,) * phi.dims:
                raise ShapeError(f"layer {d} mixes shapes {v.shape} and {(n,) * phi.dims}")
            parts.append(interleave(v).tobytes())
    return b"".join(parts)


def features_from_bytes(data: bytes) -> FeatureVector:
    try:
        magic, n_layers, dims = _HEAD.unpack_from(data)
    except struct.error as exc:
        raise ConfigError("truncated feature file") from exc
    if magic != FEATURE_MAGIC:
        raise ConfigError(f"bad feature magic {magic!r}")
    off = _HEAD.size
    layers = []
    try:
        for expected in range(n_layers):
            d, n_paths, n, label_bytes = _BLOCK.unpack_from(data, off)
            off += _BLOCK.size
            if d != expected:
                raise ConfigError(f"feature block {expected} is labelled layer {d}")
            paths = json.loads(data[off : off + label_bytes].decode())
            off += label_bytes
            if len(paths) != n_paths:
                raise ConfigError(f"layer {d}: {len(paths)} labels for {n_paths} paths")
            count = n**dims
            raw = np.frombuffer(data, dtype="<f8", count=2 * count * n_paths, offset=off)
            off += raw.nbytes
            values = deinterleave(raw).reshape((n_paths,) + (n,) * dims)
            layers.append({tuple(label_from_json(x) for x in q): values[i].copy() for i, q in enumerate(paths)})
    except (struct.error, ValueError) as exc:
        raise ConfigError(f"corrupt feature file: {exc}") from exc
    if off != len(data):
        raise ConfigError(f"{len(data) - off} trailing bytes in feature file")
    return FeatureVector(layers, dims)


def sidecar(phi: FeatureVector, lengths=None, extra: dict | None = None) -> dict:
    layers = []
    for d, layer in enumerate(phi.layers):
        n = next(iter(layer.values())).shape[0] if layer else (None if lengths is None else int(lengths[d]))
        layers.append({"layer": d, "paths": len(layer), "length": n, "contributes": bool(layer)})
    doc = {
        "format": FEATURE_MAGIC.decode(),
        "depth": phi.depth,
        "dims": phi.dims,
        "dimension": phi.dimension,
        "norm": phi.norm(),
        "layer_norms": [phi.layer_norm(d) for d in range(phi.depth)],
        "layers": layers,
    }
    doc.update(extra or {})
    return doc


def write_features(path, phi: FeatureVector, lengths=None, extra: dict | None = None) -> str:
    """Write the feature file and ``<path>.json``; returns the sidecar path."""
    atomic_write(path, features_to_bytes(phi, lengths))
    side = f"{path}.json"
    atomic_write(side, (json.dumps(sidecar(phi, lengths, extra), sort_keys=True, indent=2) + "\n").encode())
    return side


def read_features(path) -> FeatureVector:
    with open(path, "rb") as fh:
        return features_from_bytes(fh.read())
