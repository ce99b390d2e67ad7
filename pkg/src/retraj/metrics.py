"""Reference-based quality metrics: PSNR, SSIM, and masked/video variants."""
from __future__ import annotations

import numpy as np

from .errors import ShapeError, ValidationError

PSNR_CAP = 99.0
LUMA = np.array([0.299, 0.587, 0.114])

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(a, b, mask=None) -> float:
    """10*log10(1/MSE) over (masked) pixels of [0,1] images/videos, capped at
    99 dB. mask, if given, is broadcast over the trailing color axis."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.shape[:mask.ndim]:
            raise ShapeError(f"mask shape {mask.shape} incompatible with {a.shape}")
        if not mask.any():
            raise ValidationError("mask selects no pixels")
        diff = (a - b)[mask]
    else:
        diff = a - b
    mse = float(np.mean(diff * diff))
    if mse <= 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def _gaussian_kernel(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax * ax) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def to_gray(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 3:
        return frame @ LUMA
    return frame


def ssim(a, b) -> float:
    """Windowed SSIM on the luma channel: 11x11 Gaussian window sigma=1.5,
    k1=0.01, k2=0.03, dynamic range 1.0, mean over all valid windows."""
    x = to_gray(a)
    y = to_gray(b)
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch {x.shape} vs {y.shape}")
    if x.shape[0] < SSIM_WINDOW or x.shape[1] < SSIM_WINDOW:
        raise ShapeError(f"frame {x.shape} smaller than {SSIM_WINDOW}x{SSIM_WINDOW} window")
    kern = _gaussian_kernel()

    def filt(img):
        win = np.lib.stride_tricks.sliding_window_view(img, (SSIM_WINDOW, SSIM_WINDOW))
        return np.tensordot(win, kern, axes=([2, 3], [0, 1]))

    mu_x = filt(x)
    mu_y = filt(y)
    var_x = filt(x * x) - mu_x * mu_x
    var_y = filt(y * y) - mu_y * mu_y
    cov = filt(x * y) - mu_x * mu_y
    c1 = SSIM_K1 * SSIM_K1
    c2 = SSIM_K2 * SSIM_K2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def video_report(pred, gt, mask=None) -> dict:
    """Per-frame metrics averaged over the clip. Returns
    {psnr, ssim_mean, coverage, per_frame: {psnr: [...], ssim: [...]}}."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"shape mismatch {pred.shape} vs {gt.shape}")
    n = pred.shape[0]
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if len(mask) != n:
            raise ShapeError(f"mask has {len(mask)} frames, video has {n}")
    frame_psnr = [psnr(pred[i], gt[i], None if mask is None else mask[i]) for i in range(n)]
    frame_ssim = [ssim(pred[i], gt[i]) for i in range(n)]
    coverage = 1.0 if mask is None else float(mask.mean())
    return {
        "psnr": float(np.mean(frame_psnr)),
        "ssim_mean": float(np.mean(frame_ssim)),
        "coverage": coverage,
        "per_frame": {"psnr": [float(v) for v in frame_psnr],
                      "ssim": [float(v) for v in frame_ssim]},
    }
