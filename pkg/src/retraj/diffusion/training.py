"""Two-stage training loop.

Stage 1 (pairs and triplets used as pairs): optimize everything except the
reference cross-attention weights; reference tokens are never injected.
Stage 2 (triplets only): optimize only the cross-attention and patch
embedding weights, with reference tokens from the source video injected.
Both stages minimize ||eps_theta(x_t, t) - eps||^2 with t ~ U(0,1) and
Gaussian eps, and are bitwise deterministic per seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from ..errors import ValidationError
from .model import VideoDiT, is_cross_attention_param, is_patch_embed_param
from .schedule import CosineSchedule, forward_noise


@dataclass
class TrainOptions:
    steps: int = 2000
    batch_size: int = 4
    lr: float = 1e-3
    lr_decay: str = "cosine"  # "cosine" | "none"
    lr_floor_ratio: float = 0.05
    patch_lr_ratio: float = 1.0  # stage 2: patch-embedding lr = lr * ratio
    seed: int = 0
    log_every: int = 100


def to_tensors(item, dtype=torch.float32) -> dict:
    """Convert a TrainingPair/Triplet to (n, c, h, w) torch tensors."""
    out = {
        "target": torch.as_tensor(np.moveaxis(item.target_color, -1, 1), dtype=dtype),
        "render": torch.as_tensor(np.moveaxis(item.condition_color, -1, 1), dtype=dtype),
        "mask": torch.as_tensor(item.condition_mask[:, None], dtype=dtype),
    }
    src = getattr(item, "source_color", None)
    if src is not None:
        out["source"] = torch.as_tensor(np.moveaxis(src, -1, 1), dtype=dtype)
    return out


def item_loss(model: VideoDiT, batch: dict, t: torch.Tensor, eps: torch.Tensor,
              sched: CosineSchedule, use_ref: bool) -> torch.Tensor:
    x_t = forward_noise(batch["target"], t, eps, sched)
    ref = batch.get("source") if use_ref else None
    eps_hat = model(x_t, t, batch["render"], batch["mask"], ref)
    return ((eps_hat - eps) ** 2).mean()


def _stack(tensors, idxs, key):
    return torch.stack([tensors[i][key] for i in idxs])


def _run_loop(model, tensors, opts, sched, use_ref, groups, val_fn=None):
    torch.manual_seed(opts.seed)
    gen = torch.Generator().manual_seed(opts.seed)
    opt = torch.optim.Adam([{"params": g["params"], "lr": g["base_lr"]} for g in groups],
                           betas=(0.9, 0.999))
    base_lrs = [g["base_lr"] for g in groups]
    has_ref = use_ref and all("source" in t for t in tensors)
    history = []
    for step in range(opts.steps):
        if opts.lr_decay == "cosine":
            frac = step / max(opts.steps - 1, 1)
            scale = opts.lr_floor_ratio + (1 - opts.lr_floor_ratio) * 0.5 * (1 + math.cos(math.pi * frac))
            for group, base in zip(opt.param_groups, base_lrs):
                group["lr"] = base * scale
        idxs = torch.randint(len(tensors), (opts.batch_size,), generator=gen).tolist()
        target = _stack(tensors, idxs, "target")
        batch = {"target": target,
                 "render": _stack(tensors, idxs, "render"),
                 "mask": _stack(tensors, idxs, "mask")}
        if has_ref:
            batch["source"] = _stack(tensors, idxs, "source")
        t = torch.rand(opts.batch_size, generator=gen)
        eps = torch.randn(target.shape, generator=gen)
        loss = item_loss(model, batch, t, eps, sched, use_ref=has_ref)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % opts.log_every == 0 or step == opts.steps - 1:
            entry = {"step": step, "loss": float(loss.detach())}
            if val_fn is not None:
                entry["val_loss"] = val_fn(model)
            history.append(entry)
    return history


def train_stage1(model: VideoDiT, dataset, opts: TrainOptions,
                 sched: CosineSchedule | None = None, val_fn=None):
    """Train all parameters except Ref-DiT cross-attention; no reference
    injection. Returns loss history."""
    if not dataset:
        raise ValidationError("stage-1 dataset is empty")
    sched = sched or CosineSchedule()
    tensors = [to_tensors(it) if not isinstance(it, dict) else it for it in dataset]
    trainable = []
    for name, p in model.named_parameters():
        p.requires_grad_(not is_cross_attention_param(name))
        if p.requires_grad:
            trainable.append(p)
    return _run_loop(model, tensors, opts, sched, use_ref=False,
                     groups=[{"params": trainable, "base_lr": opts.lr}], val_fn=val_fn)


def train_stage2(model: VideoDiT, dataset, opts: TrainOptions,
                 sched: CosineSchedule | None = None, val_fn=None):
    """Train only cross-attention and patch embedding on triplets, with
    reference tokens from the source video injected."""
    if not dataset:
        raise ValidationError("stage-2 dataset is empty")
    sched = sched or CosineSchedule()
    tensors = [to_tensors(it) if not isinstance(it, dict) else it for it in dataset]
    if not all("source" in t for t in tensors):
        raise ValidationError("stage 2 requires triplets (items with source videos)")
    cross, patch = [], []
    for name, p in model.named_parameters():
        train_it = is_cross_attention_param(name) or is_patch_embed_param(name)
        p.requires_grad_(train_it)
        if is_cross_attention_param(name):
            cross.append(p)
        elif train_it:
            patch.append(p)
    groups = [{"params": cross, "base_lr": opts.lr},
              {"params": patch, "base_lr": opts.lr * opts.patch_lr_ratio}]
    return _run_loop(model, tensors, opts, sched, use_ref=True,
                     groups=groups, val_fn=val_fn)
