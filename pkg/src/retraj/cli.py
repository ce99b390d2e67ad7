"""Command-line surface for the full pipeline.

Subcommands: synth, lift, render, curate-mono, curate-mv, train, sample,
eval, serve. Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import clipio, curation, metrics, report, synthscene
from .errors import FormatError, ValidationError
from .geometry import CameraIntrinsics, PoseSE3, lift_video
from .renderer import render_trajectory
from .trajectory import Trajectory, TrajectorySpec, generate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _cmd_synth(args) -> int:
    scene = synthscene.make_scene(args.seed, {
        "n_layers": args.layers, "n": args.frames,
        "resolution": (args.width, args.height), "static": args.static,
        "motion_scale": args.motion_scale})
    colors, depths = synthscene.render_clip(scene)
    clipio.write_clip(args.out, colors, depths, scene.intrinsics,
                      extra_meta={"seed": args.seed, "static": args.static})
    scene.save(Path(args.out) / "scene.json")
    print(f"wrote {scene.n} frames to {args.out}")
    return 0


def _cmd_lift(args) -> int:
    colors, depths, k, _ = clipio.read_clip(args.clip)
    cloud = lift_video(colors, depths, k)
    payload = {}
    for i, f in enumerate(cloud.frames):
        payload[f"positions_{i:05d}"] = f.positions
        payload[f"colors_{i:05d}"] = f.colors
        payload[f"src_pixels_{i:05d}"] = f.src_pixels
    np.savez_compressed(args.out, frame_count=len(cloud), **payload)
    print(f"lifted {len(cloud)} frames, "
          f"{sum(len(f) for f in cloud.frames)} points -> {args.out}")
    return 0


def _load_trajectory(path, n: int) -> Trajectory:
    with open(path) as f:
        data = json.load(f)
    if "kind" in data:
        return generate(TrajectorySpec.from_dict(data), n)
    return Trajectory.from_dict(data)


def _cmd_render(args) -> int:
    colors, depths, k, _ = clipio.read_clip(args.clip)
    traj = _load_trajectory(args.traj, len(colors))
    cloud = lift_video(colors, depths, k)
    outputs = render_trajectory(cloud, traj, k, splat_radius=args.splat_radius)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "intrinsics.json").write_text(json.dumps(k.to_dict(), indent=2))
    (out / "meta.json").write_text(json.dumps(
        {"width": k.width, "height": k.height, "frame_count": len(outputs),
         "units": "arbitrary"}, indent=2))
    for i, r in enumerate(outputs):
        clipio.save_png(out / f"frame_{i:05d}.png", r.color)
        clipio.save_mask_png(out / f"mask_{i:05d}.png", r.mask)
        clipio.save_depth(out / f"frame_{i:05d}.depth", r.depth)
    print(f"rendered {len(outputs)} frames -> {args.out}")
    return 0


def _clip_dirs(root) -> list:
    root = Path(root)
    if (root / "meta.json").exists():
        return [root]
    dirs = sorted(d for d in root.iterdir() if (d / "meta.json").exists())
    if not dirs:
        raise FormatError(f"{root}: no clip directories found")
    return dirs


def _cmd_curate_mono(args) -> int:
    clips = _clip_dirs(args.clips)
    ranges = {"max_rotation_degrees": args.max_rot, "max_translation": args.max_trans}
    items = []
    for i in range(args.count):
        clip = clips[i % len(clips)]
        items.append(curation.make_monocular_pair(
            clip, seed=args.seed + i, ranges=ranges, splat_radius=args.splat_radius))
    manifest = curation.write_dataset(items, args.out)
    cov = float(np.mean([it.condition_mask.mean() for it in items]))
    print(f"wrote {manifest['count']} pairs to {args.out} (mean mask coverage {cov:.3f})")
    return 0


def _cmd_curate_mv(args) -> int:
    clips = _clip_dirs(args.clips)
    rng = np.random.default_rng(args.seed)
    items = []
    for i in range(args.count):
        clip = clips[i % len(clips)]
        scene_path = clip / "scene.json"
        if not scene_path.exists():
            raise FormatError(f"{clip}: curate-mv needs scene.json (synthetic clip)")
        scene = synthscene.SceneDescription.load(scene_path)
        n = scene.n
        shift = int(rng.integers(max(1, n // 4), max(2, n // 2 + 1)))
        path_len = n + shift
        total_deg = float(rng.uniform(args.min_yaw, args.max_yaw)) * rng.choice([-1, 1])
        _, d0 = synthscene.render_scene(scene, PoseSE3.identity(), None, 0)
        pivot = float(np.median(d0[d0 > 0]))
        path = generate(TrajectorySpec("orbit", {
            "axis": "y", "total_degrees": total_deg, "pivot_depth": pivot}), path_len)
        items.append(curation.make_multiview_triplet(
            scene, path.poses, (0, n), (shift, n), splat_radius=args.splat_radius))
        items[-1].meta["seed"] = args.seed + i
    manifest = curation.write_dataset(items, args.out)
    cov = float(np.mean([it.condition_mask.mean() for it in items]))
    print(f"wrote {manifest['count']} triplets to {args.out} (mean mask coverage {cov:.3f})")
    return 0


def _cmd_train(args) -> int:
    import torch

    from .diffusion import (ModelConfig, TrainOptions, VideoDiT, load_checkpoint,
                            save_checkpoint, train_stage1, train_stage2)

    cfg_dict = {}
    if args.config:
        with open(args.config) as f:
            cfg_dict = json.load(f)
    opts = TrainOptions(
        steps=args.steps if args.steps is not None else int(cfg_dict.get("steps", 2000)),
        batch_size=int(cfg_dict.get("batch_size", 4)),
        lr=float(cfg_dict.get("lr", 1e-3 if args.stage == 1 else 2e-4)),
        patch_lr_ratio=float(cfg_dict.get("patch_lr_ratio", 1.0)),
        seed=args.seed if args.seed is not None else int(cfg_dict.get("seed", 0)))
    items = curation.read_dataset(args.data)
    if args.init:
        model = load_checkpoint(args.init)
    else:
        model = VideoDiT(ModelConfig.from_dict(cfg_dict))
        torch.manual_seed(opts.seed)
        for name, p in model.named_parameters():
            if p.dim() > 1 and not name.startswith(("pos_embed", "text_tokens")) \
                    and p.abs().sum() > 0:
                torch.nn.init.normal_(p, std=0.02)
    if args.stage == 1:
        history = train_stage1(model, items, opts)
    else:
        triplets = [it for it in items if it.kind == "triplet"]
        history = train_stage2(model, triplets, opts)
    save_checkpoint(model, args.out, extra={"stage": args.stage, "history": history})
    print(f"stage {args.stage}: {opts.steps} steps, "
          f"final loss {history[-1]['loss']:.4f} -> {args.out}")
    return 0


def _cmd_sample(args) -> int:
    import torch

    from .diffusion import load_checkpoint, sample
    from .diffusion.training import to_tensors

    model = load_checkpoint(args.ckpt)
    items = curation.read_dataset(args.data)
    if not (0 <= args.item < len(items)):
        raise ValidationError(f"item {args.item} out of range [0, {len(items)})")
    item = items[args.item]
    ten = to_tensors(item)
    ref = ten.get("source") if not args.no_ref else None
    video = sample(model, ten["render"], ten["mask"], ref,
                   steps=args.steps, seed=args.seed)
    out = Path(args.out)
    (out / "pred").mkdir(parents=True, exist_ok=True)
    (out / "gt").mkdir(parents=True, exist_ok=True)
    arr = np.moveaxis(video.numpy(), 1, -1)
    for i in range(arr.shape[0]):
        clipio.save_png(out / "pred" / f"frame_{i:05d}.png", arr[i])
        clipio.save_png(out / "gt" / f"frame_{i:05d}.png", item.target_color[i])
    print(f"sampled item {args.item} ({args.steps} steps) -> {args.out}")
    return 0


def _read_frames(dir_path) -> np.ndarray:
    d = Path(dir_path)
    files = sorted(d.glob("frame_*.png"))
    if not files:
        raise FormatError(f"{d}: no frame_*.png files")
    return np.asarray([clipio.load_png(f) for f in files])


def _cmd_eval(args) -> int:
    pred = _read_frames(args.pred)
    gt = _read_frames(args.gt)
    mask = None
    if args.mask:
        files = sorted(Path(args.mask).glob("*.png"))
        if not files:
            raise FormatError(f"{args.mask}: no mask PNGs")
        mask = np.asarray([clipio.load_mask_png(f) for f in files])
    rep = metrics.video_report(pred, gt, mask)
    report.write_report(rep, args.out, figures=not args.no_figures)
    print(f"PSNR {rep['psnr']:.2f} dB  SSIM {rep['ssim_mean']:.4f}  "
          f"coverage {rep['coverage']:.3f} -> {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import make_app

    app = make_app(args.clip, resolution_factor=args.resolution)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="retraj", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="write a synthetic RGB-D clip")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--frames", type=int, default=8)
    sp.add_argument("--width", type=int, default=64)
    sp.add_argument("--height", type=int, default=64)
    sp.add_argument("--layers", type=int, default=3)
    sp.add_argument("--static", action="store_true")
    sp.add_argument("--motion-scale", type=float, default=1.0)
    sp.set_defaults(func=_cmd_synth)

    sp = sub.add_parser("lift", help="lift a clip to a point cloud archive")
    sp.add_argument("--clip", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_lift)

    sp = sub.add_parser("render", help="render a clip along a trajectory")
    sp.add_argument("--clip", required=True)
    sp.add_argument("--traj", required=True, help="Trajectory or TrajectorySpec JSON")
    sp.add_argument("--out", required=True)
    sp.add_argument("--splat-radius", type=int, default=0)
    sp.set_defaults(func=_cmd_render)

    sp = sub.add_parser("curate-mono", help="double-reprojection pairs from clips")
    sp.add_argument("--clips", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=int, default=512)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-rot", type=float, default=15.0)
    sp.add_argument("--max-trans", type=float, default=None,
                    help="default: 0.15 x median scene depth")
    sp.add_argument("--splat-radius", type=int, default=0)
    sp.set_defaults(func=_cmd_curate_mono)

    sp = sub.add_parser("curate-mv", help="multi-view triplets from synthetic clips")
    sp.add_argument("--clips", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=int, default=512)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--min-yaw", type=float, default=10.0)
    sp.add_argument("--max-yaw", type=float, default=30.0)
    sp.add_argument("--splat-radius", type=int, default=0)
    sp.set_defaults(func=_cmd_curate_mv)

    sp = sub.add_parser("train", help="train the diffusion model")
    sp.add_argument("--stage", type=int, choices=(1, 2), required=True)
    sp.add_argument("--config", default=None, help="model/optimizer config JSON")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--init", default=None, help="checkpoint to start from")
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_train)

    sp = sub.add_parser("sample", help="sample a video for a dataset item")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--item", type=int, default=0)
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--no-ref", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("eval", help="PSNR/SSIM report with CSV and figures")
    sp.add_argument("--pred", required=True)
    sp.add_argument("--gt", required=True)
    sp.add_argument("--mask", default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("serve", help="HTTP preview service over one clip")
    sp.add_argument("--clip", required=True)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8089)
    sp.add_argument("--resolution", type=int, default=2,
                    help="preview downscale factor")
    sp.set_defaults(func=_cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        return int(e.code or 0)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (FormatError, OSError) as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
