import torch

# Small nets, deterministic by construction: one compute thread keeps every
# reduction order fixed across runs and machines with different core counts.
torch.set_num_threads(1)

from .schedule import NoiseSchedule, cosine_schedule, forward_noise, schedule_fingerprint
from .nets import ArchDescriptor, build_denoiser, descriptor_for, context_features
from .training import TrainConfig, TrainedDenoiser, train_denoiser
from .sampling import encode_shape_features, reverse_step, sample_chains, sample_single
from .archive import save_denoiser, load_denoiser, ModelBank

__all__ = [
    "NoiseSchedule",
    "cosine_schedule",
    "forward_noise",
    "schedule_fingerprint",
    "ArchDescriptor",
    "build_denoiser",
    "descriptor_for",
    "context_features",
    "TrainConfig",
    "TrainedDenoiser",
    "train_denoiser",
    "reverse_step",
    "sample_chains",
    "sample_single",
    "encode_shape_features",
    "save_denoiser",
    "load_denoiser",
    "ModelBank",
]
