"""Evaluation reports: JSON summary, per-frame CSV, and matplotlib figures."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_report(report: dict, out_path, figures: bool = True):
    """Write report.json plus report.csv (per-frame metrics, delimited) and a
    figures/ directory with metric curves next to it."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(report, indent=2))

    per_frame = report.get("per_frame", {})
    psnr_vals = per_frame.get("psnr", [])
    ssim_vals = per_frame.get("ssim", [])
    csv_path = out_path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame", "psnr_db", "ssim"])
        for i, (p, s) in enumerate(zip(psnr_vals, ssim_vals)):
            writer.writerow([i, f"{p:.6f}", f"{s:.6f}"])

    if figures and psnr_vals:
        fig_dir = out_path.parent / "figures"
        fig_dir.mkdir(exist_ok=True)
        frames = range(len(psnr_vals))
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
        ax1.plot(frames, psnr_vals, marker="o", ms=3)
        ax1.axhline(report.get("psnr", 0), ls="--", lw=0.8, color="gray",
                    label=f"mean {report.get('psnr', 0):.2f} dB")
        ax1.set_xlabel("frame")
        ax1.set_ylabel("PSNR (dB)")
        ax1.legend(frameon=False, fontsize=8)
        ax2.plot(frames, ssim_vals, marker="o", ms=3, color="tab:orange")
        ax2.axhline(report.get("ssim_mean", 0), ls="--", lw=0.8, color="gray",
                    label=f"mean {report.get('ssim_mean', 0):.3f}")
        ax2.set_xlabel("frame")
        ax2.set_ylabel("SSIM")
        ax2.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        fig.savefig(fig_dir / "metrics.png", dpi=130)
        plt.close(fig)
