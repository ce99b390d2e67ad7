"""Toy dual-stream conditional diffusion transformer.

The noisy target video is concatenated channel-wise with the point-cloud
render and its mask (3+3+1=7 channels), patchified into view tokens, and
prefixed with a few learned text tokens. The stack interleaves standard
DiT blocks (joint self-attention over [text, view] with adaLN-zero timestep
conditioning) with reference blocks that additionally cross-attend from view
tokens to tokens of the clean source video. The cross-attention output
projection starts at zero, so injecting or omitting reference tokens is an
exact no-op at initialization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ShapeError, ValidationError

CHANNELS_NOISY = 3
CHANNELS_RENDER = 3
CHANNELS_MASK = 1
CHANNELS_IN = CHANNELS_NOISY + CHANNELS_RENDER + CHANNELS_MASK


@dataclass
class ModelConfig:
    d_model: int = 128
    n_heads: int = 4
    n_dit_blocks: int = 6
    refdit_positions: tuple = (2, 4)
    patch: tuple = (1, 4, 4)  # (pt, ph, pw)
    text_len: int = 4
    frames: int = 8
    height: int = 16
    width: int = 16
    channels_in: int = CHANNELS_IN
    mlp_ratio: int = 4
    time_embed_dim: int = 128

    def __post_init__(self):
        self.refdit_positions = tuple(int(p) for p in self.refdit_positions)
        self.patch = tuple(int(p) for p in self.patch)
        if self.d_model <= 0 or self.n_heads <= 0 or self.d_model % self.n_heads:
            raise ValidationError(f"n_heads {self.n_heads} must divide d_model {self.d_model}")
        if self.channels_in != CHANNELS_IN:
            raise ValidationError(f"channels_in is fixed at {CHANNELS_IN}")
        if any(p <= 0 for p in self.patch) or self.text_len <= 0 or self.n_dit_blocks <= 0:
            raise ValidationError("patch sizes, text_len, n_dit_blocks must be positive")
        if list(self.refdit_positions) != sorted(set(self.refdit_positions)):
            raise ValidationError(f"refdit_positions must be strictly increasing, got {self.refdit_positions}")
        if self.refdit_positions and not all(0 <= p <= self.n_dit_blocks for p in self.refdit_positions):
            raise ValidationError(f"refdit_positions must lie in [0, {self.n_dit_blocks}]")
        pt, ph, pw = self.patch
        if self.frames % pt or self.height % ph or self.width % pw:
            raise ValidationError(
                f"video {self.frames}x{self.height}x{self.width} not divisible by patch {self.patch}")

    @property
    def grid(self) -> tuple:
        pt, ph, pw = self.patch
        return (self.frames // pt, self.height // ph, self.width // pw)

    @property
    def n_view_tokens(self) -> int:
        g = self.grid
        return g[0] * g[1] * g[2]

    def to_dict(self) -> dict:
        return {"d_model": self.d_model, "n_heads": self.n_heads,
                "n_dit_blocks": self.n_dit_blocks,
                "refdit_positions": list(self.refdit_positions),
                "patch": list(self.patch), "text_len": self.text_len,
                "frames": self.frames, "height": self.height, "width": self.width,
                "channels_in": self.channels_in, "mlp_ratio": self.mlp_ratio,
                "time_embed_dim": self.time_embed_dim}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


def patchify_raw(video: torch.Tensor, patch) -> torch.Tensor:
    """(B, n, c, h, w) -> (B, n'*h'*w', c*pt*ph*pw); pure reshape, no params."""
    pt, ph, pw = patch
    b, n, c, h, w = video.shape
    if n % pt or h % ph or w % pw:
        raise ShapeError(f"video {n}x{h}x{w} not divisible by patch {patch}")
    x = video.reshape(b, n // pt, pt, c, h // ph, ph, w // pw, pw)
    x = x.permute(0, 1, 4, 6, 3, 2, 5, 7)  # b, n', h', w', c, pt, ph, pw
    return x.reshape(b, (n // pt) * (h // ph) * (w // pw), c * pt * ph * pw)


def unpatchify_raw(tokens: torch.Tensor, patch, grid, channels: int) -> torch.Tensor:
    """Inverse of patchify_raw for a known grid shape."""
    pt, ph, pw = patch
    nt, nh, nw = grid
    b = tokens.shape[0]
    x = tokens.reshape(b, nt, nh, nw, channels, pt, ph, pw)
    x = x.permute(0, 1, 5, 4, 2, 6, 3, 7)  # b, n', pt, c, h', ph, w', pw
    return x.reshape(b, nt * pt, channels, nh * ph, nw * pw)


def build_condition(noisy: torch.Tensor, render: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Channel-wise concat [noisy(3), render(3), mask(1)] -> 7 channels."""
    if noisy.shape != render.shape:
        raise ShapeError(f"noisy {tuple(noisy.shape)} vs render {tuple(render.shape)}")
    if mask.shape[-2:] != noisy.shape[-2:] or mask.shape[:-3] != noisy.shape[:-3] \
            or mask.shape[-3] != CHANNELS_MASK:
        raise ShapeError(f"mask shape {tuple(mask.shape)} incompatible with {tuple(noisy.shape)}")
    return torch.cat([noisy, render, mask], dim=-3)


def timestep_embedding(t: torch.Tensor, dim: int, max_period: float = 1e4) -> torch.Tensor:
    """Sinusoidal features of t in [0, 1] (scaled by 1000), shape (B, dim)."""
    half = dim // 2
    freqs = torch.exp(-math.log(max_period) * torch.arange(half, dtype=t.dtype) / half)
    args = t[:, None] * 1000.0 * freqs[None, :]
    return torch.cat([torch.cos(args), torch.sin(args)], dim=-1)


class SelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.proj = nn.Linear(d_model, d_model)

    def forward(self, x):
        b, t, d = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        q = q.view(b, t, self.n_heads, -1).transpose(1, 2)
        k = k.view(b, t, self.n_heads, -1).transpose(1, 2)
        v = v.view(b, t, self.n_heads, -1).transpose(1, 2)
        att = (q @ k.transpose(-2, -1)) / math.sqrt(q.shape[-1])
        out = att.softmax(dim=-1) @ v
        return self.proj(out.transpose(1, 2).reshape(b, t, d))


def _modulate(x, shift, scale):
    return x * (1 + scale[:, None, :]) + shift[:, None, :]


class DiTBlock(nn.Module):
    """Pre-norm self-attention + MLP with adaLN-zero timestep conditioning."""

    def __init__(self, d_model: int, n_heads: int, mlp_ratio: int = 4):
        super().__init__()
        self.norm1 = nn.LayerNorm(d_model, elementwise_affine=False)
        self.attn = SelfAttention(d_model, n_heads)
        self.norm2 = nn.LayerNorm(d_model, elementwise_affine=False)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, mlp_ratio * d_model),
            nn.GELU(),
            nn.Linear(mlp_ratio * d_model, d_model),
        )
        self.ada = nn.Linear(d_model, 6 * d_model)
        nn.init.zeros_(self.ada.weight)
        nn.init.zeros_(self.ada.bias)

    def forward(self, x, temb):
        sh1, sc1, g1, sh2, sc2, g2 = self.ada(F.silu(temb)).chunk(6, dim=-1)
        x = x + g1[:, None, :] * self.attn(_modulate(self.norm1(x), sh1, sc1))
        x = x + g2[:, None, :] * self.mlp(_modulate(self.norm2(x), sh2, sc2))
        return x


class RefDiTBlock(nn.Module):
    """DiT self-attention over [text, view], then cross-attention where view
    tokens query reference tokens. Skipped entirely when no reference is given
    (stage-1 behavior); the zero-initialized output projection makes that skip
    continuous."""

    def __init__(self, d_model: int, n_heads: int, text_len: int, mlp_ratio: int = 4):
        super().__init__()
        self.text_len = text_len
        self.n_heads = n_heads
        self.self_block = DiTBlock(d_model, n_heads, mlp_ratio)
        self.cross_norm_q = nn.LayerNorm(d_model, elementwise_affine=False)
        self.cross_norm_kv = nn.LayerNorm(d_model, elementwise_affine=False)
        self.cross_q = nn.Linear(d_model, d_model)
        self.cross_k = nn.Linear(d_model, d_model)
        self.cross_v = nn.Linear(d_model, d_model)
        self.cross_out = nn.Linear(d_model, d_model)
        nn.init.zeros_(self.cross_out.weight)
        nn.init.zeros_(self.cross_out.bias)

    def forward(self, x, temb, ref_tokens=None):
        x = self.self_block(x, temb)
        if ref_tokens is None:
            return x
        text, view = x[:, :self.text_len], x[:, self.text_len:]
        b, t, d = view.shape
        q = self.cross_q(self.cross_norm_q(view))
        kv = self.cross_norm_kv(ref_tokens)
        k = self.cross_k(kv)
        v = self.cross_v(kv)
        q = q.view(b, t, self.n_heads, -1).transpose(1, 2)
        k = k.view(b, ref_tokens.shape[1], self.n_heads, -1).transpose(1, 2)
        v = v.view(b, ref_tokens.shape[1], self.n_heads, -1).transpose(1, 2)
        att = (q @ k.transpose(-2, -1)) / math.sqrt(q.shape[-1])
        out = att.softmax(dim=-1) @ v
        view = view + self.cross_out(out.transpose(1, 2).reshape(b, t, d))
        return torch.cat([text, view], dim=1)


class VideoDiT(nn.Module):
    """Noise estimator over 8-frame toy videos; predicts epsilon."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        pt, ph, pw = cfg.patch
        patch_dim = cfg.channels_in * pt * ph * pw
        self.patch_embed = nn.Linear(patch_dim, cfg.d_model)
        self.pos_embed = nn.Parameter(torch.zeros(cfg.n_view_tokens, cfg.d_model))
        nn.init.normal_(self.pos_embed, std=0.02)
        self.text_tokens = nn.Parameter(torch.zeros(cfg.text_len, cfg.d_model))
        nn.init.normal_(self.text_tokens, std=0.02)
        self.time_mlp = nn.Sequential(
            nn.Linear(cfg.time_embed_dim, cfg.d_model),
            nn.SiLU(),
            nn.Linear(cfg.d_model, cfg.d_model),
        )
        blocks = []
        self._block_kinds = []
        for i in range(cfg.n_dit_blocks + 1):
            if i in cfg.refdit_positions:
                blocks.append(RefDiTBlock(cfg.d_model, cfg.n_heads, cfg.text_len, cfg.mlp_ratio))
                self._block_kinds.append("ref")
            if i < cfg.n_dit_blocks:
                blocks.append(DiTBlock(cfg.d_model, cfg.n_heads, cfg.mlp_ratio))
                self._block_kinds.append("dit")
        self.blocks = nn.ModuleList(blocks)
        self.norm_out = nn.LayerNorm(cfg.d_model, elementwise_affine=False)
        self.head = nn.Linear(cfg.d_model, CHANNELS_NOISY * pt * ph * pw)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def embed_video(self, cond: torch.Tensor) -> torch.Tensor:
        tokens = self.patch_embed(patchify_raw(cond, self.cfg.patch))
        return tokens + self.pos_embed[None]

    def forward(self, x_t, t, render, mask, ref=None):
        """Predict the injected noise. x_t/render: (B?, n, 3, h, w); mask
        (B?, n, 1, h, w); ref (B?, n, 3, h, w) or None; t scalar or (B,)."""
        unbatched = x_t.ndim == 4
        if unbatched:
            x_t, render, mask = x_t[None], render[None], mask[None]
            ref = None if ref is None else ref[None]
        cfg = self.cfg
        if x_t.shape[1:] != (cfg.frames, CHANNELS_NOISY, cfg.height, cfg.width):
            raise ShapeError(f"x_t shape {tuple(x_t.shape)} does not match config "
                             f"({cfg.frames}, 3, {cfg.height}, {cfg.width})")
        b = x_t.shape[0]
        if not torch.is_tensor(t):
            t = torch.full((b,), float(t), dtype=x_t.dtype)
        elif t.ndim == 0:
            t = t.expand(b).to(x_t.dtype)
        temb = self.time_mlp(timestep_embedding(t, cfg.time_embed_dim))

        cond = build_condition(x_t, render, mask)
        view = self.embed_video(cond)
        ref_tokens = None
        if ref is not None:
            ref_cond = build_condition(ref, ref, torch.ones_like(ref[..., :1, :, :]))
            ref_tokens = self.embed_video(ref_cond)
        x = torch.cat([self.text_tokens[None].expand(b, -1, -1), view], dim=1)
        for block, kind in zip(self.blocks, self._block_kinds):
            if kind == "ref":
                x = block(x, temb, ref_tokens)
            else:
                x = block(x, temb)
        out = self.head(self.norm_out(x[:, cfg.text_len:]))
        eps = unpatchify_raw(out, cfg.patch, cfg.grid, CHANNELS_NOISY)
        return eps[0] if unbatched else eps


def predict_noise(model: VideoDiT, x_t, t, render, mask, ref=None):
    return model(x_t, t, render, mask, ref)


def is_cross_attention_param(name: str) -> bool:
    return ".cross_" in name


def is_patch_embed_param(name: str) -> bool:
    return name.startswith("patch_embed")
