"""retraj: redirect camera trajectories in monocular RGB-D video.

Lifts RGB-D clips to dynamic point clouds, renders novel camera trajectories
with occlusion masks, curates training data by double-reprojection and
multi-view triplets, and trains/samples a toy dual-stream conditional
diffusion transformer with reference cross-attention blocks.
"""

__version__ = "0.1.0"
