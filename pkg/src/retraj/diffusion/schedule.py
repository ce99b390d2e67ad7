"""Variance-preserving cosine noise schedule and the forward process."""
from __future__ import annotations

import math

import torch

from ..errors import ShapeError, ValidationError


class CosineSchedule:
    """alpha(t) = cos(pi*t/2), sigma(t) = sin(pi*t/2) on t in [0, 1].

    Satisfies alpha(0)=1, sigma(0)=0, alpha(1)=0, sigma(1)=1, alpha monotone
    non-increasing, sigma monotone non-decreasing, alpha^2 + sigma^2 = 1.
    """

    def alpha(self, t):
        if torch.is_tensor(t):
            return torch.cos(t * (math.pi / 2))
        return math.cos(t * math.pi / 2)

    def sigma(self, t):
        if torch.is_tensor(t):
            return torch.sin(t * (math.pi / 2))
        return math.sin(t * math.pi / 2)


def forward_noise(x0: torch.Tensor, t, eps: torch.Tensor, sched: CosineSchedule) -> torch.Tensor:
    """x_t = alpha(t)*x0 + sigma(t)*eps."""
    if x0.shape != eps.shape:
        raise ShapeError(f"x0 shape {tuple(x0.shape)} != eps shape {tuple(eps.shape)}")
    t_val = float(t) if not torch.is_tensor(t) or t.numel() == 1 else None
    if t_val is not None:
        if not (0.0 <= t_val <= 1.0):
            raise ValidationError(f"t must be in [0, 1], got {t_val}")
        return sched.alpha(t_val) * x0 + sched.sigma(t_val) * eps
    # per-sample t: broadcast over all non-batch dims
    t = t.reshape(-1, *([1] * (x0.ndim - 1))).to(x0.dtype)
    if ((t < 0) | (t > 1)).any():
        raise ValidationError("t must be in [0, 1]")
    return sched.alpha(t) * x0 + sched.sigma(t) * eps
