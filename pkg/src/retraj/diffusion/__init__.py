from .schedule import CosineSchedule, forward_noise
from .model import ModelConfig, VideoDiT, build_condition, patchify_raw, unpatchify_raw
from .training import TrainOptions, train_stage1, train_stage2, item_loss
from .sampling import sample
from .checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "CosineSchedule", "forward_noise",
    "ModelConfig", "VideoDiT", "build_condition", "patchify_raw", "unpatchify_raw",
    "TrainOptions", "train_stage1", "train_stage2", "item_loss",
    "sample", "save_checkpoint", "load_checkpoint",
]
