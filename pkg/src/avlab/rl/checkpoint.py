"""Versioned flat-file policy checkpoints.

Layout: 4-byte magic, little-endian uint16 format version, uint32 JSON
header length, the JSON header (algorithm tag, seed, config hash, layer
dims, action box), then the trunk parameters as little-endian float64 in
layer order.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from avlab.errors import CheckpointError
from avlab.rl.nets import Mlp
from avlab.rl.policy import GaussianPolicy

MAGIC = b"AVPK"
FORMAT_VERSION = 1


def save_checkpoint(path, policy: GaussianPolicy, algo: str, seed: int, config_hash: str) -> dict:
    header = {
        "format_version": FORMAT_VERSION,
        "algo": algo,
        "seed": int(seed),
        "config_hash": config_hash,
        "layer_dims": list(policy.trunk.dims),
        "a_max": policy.a_max,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(policy.trunk.params.astype("<f8").tobytes())
    return header


def load_checkpoint(path) -> tuple[GaussianPolicy, dict]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a policy checkpoint (bad magic {magic!r})")
        version, header_len = struct.unpack("<HI", fh.read(6))
        if version != FORMAT_VERSION:
            raise CheckpointError(
                f"{path}: format version {version} not supported (expected {FORMAT_VERSION})"
            )
        try:
            header = json.loads(fh.read(header_len).decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"{path}: corrupt header: {exc}") from exc
        dims = header["layer_dims"]
        net = Mlp(dims)
        raw = fh.read(net.n_params * 8)
        if len(raw) != net.n_params * 8:
            raise CheckpointError(f"{path}: truncated parameter payload")
        params = np.frombuffer(raw, dtype="<f8").astype(float)
    policy = GaussianPolicy(Mlp(dims, params), a_max=float(header["a_max"]))
    return policy, header
