"""Denoiser networks: shape/pose/time encoders and the two backbones.

Fixed-arity relations use an MLP over the concatenated per-object embeddings;
variable-arity relations use a small transformer encoder over per-object
tokens with padding masks (sequence capacity 16).  Relations conditioned on a
container feature (reachable, under-window) receive those features appended
to every object's shape vector.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from ..geometry import Container, Feature, ValidationError
from ..relations.classifiers import ReachContext
from ..relations.registry import VARIADIC_MAX, RelationKind


@dataclass(frozen=True)
class ArchDescriptor:
    relation: str
    backbone: str  # "mlp" | "set"
    arity_min: int
    arity_max: int
    context_dim: int = 0
    hidden: int = 256
    time_expansion: int = 4
    layers: int = 2
    heads: int = 4
    positional: bool = False
    pose_dim: int = 4
    shape_dim: int = 2

    def to_json(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json(doc: dict) -> "ArchDescriptor":
        return ArchDescriptor(**doc)


CONTEXT_DIMS = {"reachable": 3, "under-window": 4}


def descriptor_for(kind: RelationKind, hidden: int = 256, time_expansion: int = 4) -> ArchDescriptor:
    # rank embeddings for every variadic relation: training data is in
    # canonical spatial order, and tying argument slots to pattern positions
    # is what makes equal spacing and grid cells learnable
    a = kind.object_arity
    return ArchDescriptor(
        relation=kind.name,
        backbone="mlp" if a.is_fixed else "set",
        arity_min=a.min,
        arity_max=a.max,
        context_dim=CONTEXT_DIMS.get(kind.name, 0),
        hidden=hidden,
        time_expansion=time_expansion,
        positional=not a.is_fixed,
    )


def context_features(name: str, context, container: Container) -> np.ndarray:
    """Normalized conditioning vector for feature relations; empty otherwise."""
    dim = CONTEXT_DIMS.get(name, 0)
    if dim == 0:
        return np.zeros(0, dtype=np.float64)
    if context is None:
        raise ValidationError(f"{name} requires a conditioning context")
    if name == "reachable":
        assert isinstance(context, ReachContext)
        return np.array(
            [
                (context.base[0] - container.x_min) / container.x_extent,
                (context.base[1] - container.y_min) / container.y_extent,
                context.radius_units / container.width,
            ],
            dtype=np.float64,
        )
    assert isinstance(context, Feature)
    return np.array(
        [
            (context.start[0] - container.x_min) / container.x_extent,
            (context.start[1] - container.y_min) / container.y_extent,
            (context.end[0] - container.x_min) / container.x_extent,
            (context.end[1] - container.y_min) / container.y_extent,
        ],
        dtype=np.float64,
    )


class SinusoidalEmbedding(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.dim = dim

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        half = self.dim // 2
        freqs = torch.exp(
            -math.log(10000.0) * torch.arange(half, dtype=t.dtype, device=t.device) / max(half - 1, 1)
        )
        angles = t[:, None].to(freqs.dtype) * freqs[None, :]
        return torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)


class TimeEncoder(nn.Module):
    """Sinusoidal embedding, expanded with a Mish nonlinearity, back to hidden width."""

    def __init__(self, hidden: int, expansion: int):
        super().__init__()
        self.embed = SinusoidalEmbedding(hidden)
        self.up = nn.Linear(hidden, hidden * expansion)
        self.act = nn.Mish()
        self.down = nn.Linear(hidden * expansion, hidden)

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        return self.down(self.act(self.up(self.embed(t))))


class FeatureEncoder(nn.Module):
    """Two-layer SiLU encoder: input -> hidden/2 -> hidden."""

    def __init__(self, in_dim: int, hidden: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(in_dim, hidden // 2),
            nn.SiLU(),
            nn.Linear(hidden // 2, hidden),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class PoseDecoder(nn.Module):
    """Mirror of the encoders: hidden -> hidden/2 -> pose dims."""

    def __init__(self, hidden: int, out_dim: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(hidden, hidden // 2),
            nn.SiLU(),
            nn.Linear(hidden // 2, out_dim),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class MlpDenoiser(nn.Module):
    """Fixed-arity backbone: concatenated object embeddings -> one hidden layer."""

    def __init__(self, desc: ArchDescriptor):
        super().__init__()
        if desc.arity_min != desc.arity_max:
            raise ValidationError("MlpDenoiser needs a fixed arity")
        self.desc = desc
        k, h = desc.arity_min, desc.hidden
        self.shape_encoder = FeatureEncoder(desc.shape_dim + desc.context_dim, h)
        self.pose_encoder = FeatureEncoder(desc.pose_dim, h)
        self.time_encoder = TimeEncoder(h, desc.time_expansion)
        self.backbone = nn.Sequential(nn.Linear(k * 2 * h + h, h), nn.SiLU())
        self.pose_decoder = PoseDecoder(h, k * desc.pose_dim)

    def forward(self, poses: torch.Tensor, shapes: torch.Tensor, t: torch.Tensor, mask=None) -> torch.Tensor:
        b, k, _ = poses.shape
        if k != self.desc.arity_min:
            raise ValidationError(f"{self.desc.relation}: expected arity {self.desc.arity_min}, got {k}")
        se = self.shape_encoder(shapes)
        pe = self.pose_encoder(poses)
        te = self.time_encoder(t)
        flat = torch.cat([torch.cat([se, pe], dim=-1).reshape(b, -1), te], dim=-1)
        hidden = self.backbone(flat)
        return self.pose_decoder(hidden).reshape(b, k, self.desc.pose_dim)


class SetDenoiser(nn.Module):
    """Variable-arity backbone: transformer encoder over per-object tokens.

    Tokens are the sum of shape, pose, time and set-size embeddings, plus a
    rank embedding when `positional` is set.  The rank embedding ties each
    argument slot to one spot in the learned pattern (line position, grid
    cell); with it disabled the network is permutation-equivariant.  The
    set-size embedding is shared by all tokens, so it never breaks
    equivariance.
    """

    def __init__(self, desc: ArchDescriptor):
        super().__init__()
        self.desc = desc
        h = desc.hidden
        self.shape_encoder = FeatureEncoder(desc.shape_dim + desc.context_dim, h)
        self.pose_encoder = FeatureEncoder(desc.pose_dim, h)
        self.time_encoder = TimeEncoder(h, desc.time_expansion)
        self.positional = nn.Embedding(VARIADIC_MAX, h) if desc.positional else None
        self.count_embed = nn.Embedding(VARIADIC_MAX + 1, h)
        layer = nn.TransformerEncoderLayer(
            d_model=h,
            nhead=desc.heads,
            dim_feedforward=h,
            dropout=0.0,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=desc.layers, enable_nested_tensor=False)
        self.pose_decoder = PoseDecoder(h, desc.pose_dim)

    def forward(self, poses: torch.Tensor, shapes: torch.Tensor, t: torch.Tensor, mask=None) -> torch.Tensor:
        b, n, _ = poses.shape
        if n > VARIADIC_MAX:
            raise ValidationError(f"{self.desc.relation}: {n} objects exceeds capacity {VARIADIC_MAX}")
        tokens = self.shape_encoder(shapes) + self.pose_encoder(poses) + self.time_encoder(t)[:, None, :]
        if mask is None:
            counts = torch.full((b,), n, dtype=torch.long, device=poses.device)
        else:
            counts = mask.sum(dim=1).long()
        tokens = tokens + self.count_embed(counts)[:, None, :]
        if self.positional is not None:
            idx = torch.arange(n, device=poses.device)
            tokens = tokens + self.positional(idx)[None, :, :]
        key_padding = None
        if mask is not None:
            key_padding = ~mask  # True marks padded slots to ignore
        hidden = self.encoder(tokens, src_key_padding_mask=key_padding)
        out = self.pose_decoder(hidden)
        if mask is not None:
            out = out * mask[:, :, None].to(out.dtype)
        return out


def build_denoiser(desc: ArchDescriptor) -> nn.Module:
    if desc.backbone == "mlp":
        return MlpDenoiser(desc)
    if desc.backbone == "set":
        return SetDenoiser(desc)
    raise ValidationError(f"unknown backbone {desc.backbone!r}")


def init_parameters(module: nn.Module, generator: torch.Generator) -> None:
    """Deterministic re-initialization from an explicit torch generator.

    Linear layers get the usual fan-in uniform bounds; embeddings standard
    normal; LayerNorm stays at ones/zeros.  Iteration follows the module
    tree, so identical architectures initialize identically.
    """
    for sub in module.modules():
        if isinstance(sub, nn.Linear):
            bound = 1.0 / math.sqrt(sub.in_features)
            with torch.no_grad():
                sub.weight.uniform_(-bound, bound, generator=generator)
                if sub.bias is not None:
                    sub.bias.uniform_(-bound, bound, generator=generator)
        elif isinstance(sub, nn.Embedding):
            with torch.no_grad():
                sub.weight.normal_(0.0, 1.0, generator=generator)
        elif isinstance(sub, nn.LayerNorm):
            with torch.no_grad():
                sub.weight.fill_(1.0)
                sub.bias.fill_(0.0)
