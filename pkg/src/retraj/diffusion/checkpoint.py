"""Single-file checkpoint format.

Layout: magic b"VDCP", uint32 version, uint64 header length, UTF-8 JSON
header {config, tensors: [{name, shape}]}, then the tensor payloads in header
order as little-endian float32, row-major.
"""
from __future__ import annotations

import json
import struct

import numpy as np
import torch

from ..errors import FormatError
from .model import ModelConfig, VideoDiT

MAGIC = b"VDCP"
VERSION = 1


def save_checkpoint(model: VideoDiT, path, extra: dict | None = None):
    names = []
    payloads = []
    for name, p in model.state_dict().items():
        arr = p.detach().cpu().numpy().astype("<f4")
        names.append({"name": name, "shape": list(arr.shape)})
        payloads.append(arr.tobytes())
    header = {"config": model.cfg.to_dict(), "tensors": names}
    if extra:
        header["extra"] = extra
    hbytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(hbytes)))
        f.write(hbytes)
        for b in payloads:
            f.write(b)


def load_checkpoint(path) -> VideoDiT:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise FormatError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise FormatError(f"{path}: unsupported checkpoint version {version}")
        (hlen,) = struct.unpack("<Q", f.read(8))
        try:
            header = json.loads(f.read(hlen).decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise FormatError(f"{path}: corrupt checkpoint header ({e})") from e
        cfg = ModelConfig.from_dict(header["config"])
        model = VideoDiT(cfg)
        state = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = f.read(count * 4)
            if len(raw) != count * 4:
                raise FormatError(f"{path}: truncated payload for {spec['name']}")
            arr = np.frombuffer(raw, dtype="<f4").reshape(shape)
            state[spec["name"]] = torch.from_numpy(arr.copy())
        model.load_state_dict(state)
        return model
