"""Deterministic DDIM-style reverse process on a uniform time grid."""
from __future__ import annotations

import torch

from ..errors import ValidationError
from .model import VideoDiT
from .schedule import CosineSchedule

EPS_FLOOR = 1e-6


@torch.no_grad()
def sample(model: VideoDiT, render: torch.Tensor, mask: torch.Tensor,
           ref: torch.Tensor | None = None, steps: int = 20, seed: int = 0,
           sched: CosineSchedule | None = None) -> torch.Tensor:
    """Denoise from t=1 to t=0 in `steps` uniform steps; output in [0, 1].

    Each step estimates x0 = (x_t - sigma*eps_hat) / max(alpha, eps_floor)
    and re-noises it to the next grid time with the same eps_hat.
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    sched = sched or CosineSchedule()
    was_training = model.training
    model.eval()
    unbatched = render.ndim == 4
    if unbatched:
        render, mask = render[None], mask[None]
        ref = None if ref is None else ref[None]
    gen = torch.Generator().manual_seed(seed)
    shape = (render.shape[0], model.cfg.frames, 3, model.cfg.height, model.cfg.width)
    x = torch.randn(shape, generator=gen, dtype=render.dtype)
    for k in range(steps):
        t_cur = 1.0 - k / steps
        t_next = 1.0 - (k + 1) / steps
        eps_hat = model(x, t_cur, render, mask, ref)
        x0_hat = (x - sched.sigma(t_cur) * eps_hat) / max(sched.alpha(t_cur), EPS_FLOOR)
        # pixel data lives in [0, 1]; clipping the estimate keeps the first
        # step (alpha(1) = 0, division by the floor) from exploding
        x0_hat = x0_hat.clamp(0.0, 1.0)
        x = sched.alpha(t_next) * x0_hat + sched.sigma(t_next) * eps_hat
    x = x.clamp(0.0, 1.0)
    if was_training:
        model.train()
    return x[0] if unbatched else x
