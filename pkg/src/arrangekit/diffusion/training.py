"""Training of per-relation denoisers on synthetic positive examples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import NumericError, ValidationError
from ..geometry import Container, normalize_poses, normalize_shapes
from ..relations.generators import SynthExample
from ..relations.registry import RelationKind, lookup
from .nets import ArchDescriptor, build_denoiser, context_features, descriptor_for, init_parameters
from .schedule import NoiseSchedule, schedule_fingerprint


@dataclass
class TrainConfig:
    epochs: int = 400
    batch_size: int = 128
    lr: float = 1e-3
    lr_decay: bool = True  # cosine decay to 10% of lr over the run
    seed: int = 0
    val_fraction: float = 0.1
    hidden: int = 256
    time_expansion: int = 4
    restore_best: bool = True

    def __post_init__(self):
        for name in ("epochs", "batch_size", "lr"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"TrainConfig.{name} must be positive")


@dataclass
class TrainedDenoiser:
    """Immutable trained model: descriptor + weights + the schedule it was trained for."""

    descriptor: ArchDescriptor
    module: torch.nn.Module
    schedule: NoiseSchedule
    history: dict = field(default_factory=dict)

    def __post_init__(self):
        self.module.eval()
        for p in self.module.parameters():
            p.requires_grad_(False)

    @property
    def relation(self) -> str:
        return self.descriptor.relation

    def fingerprint(self) -> str:
        return schedule_fingerprint(self.schedule)

    def predict_eps(self, poses: np.ndarray, shapes: np.ndarray, t, mask: np.ndarray | None = None) -> np.ndarray:
        """Noise prediction for normalized pose vectors.

        poses: (B, k, 4), shapes: (B, k, shape_dim + context_dim), t: int or (B,).
        """
        poses = np.asarray(poses, dtype=np.float64)
        squeeze = poses.ndim == 2
        if squeeze:
            poses = poses[None]
            shapes = np.asarray(shapes)[None]
            mask = None if mask is None else np.asarray(mask)[None]
        b, k, _ = poses.shape
        t_arr = np.full(b, t, dtype=np.float64) if np.isscalar(t) else np.asarray(t, dtype=np.float64)
        with torch.no_grad():
            out = self.module(
                torch.as_tensor(np.ascontiguousarray(poses), dtype=torch.float32),
                torch.as_tensor(np.ascontiguousarray(shapes), dtype=torch.float32),
                torch.as_tensor(t_arr, dtype=torch.float32),
                None if mask is None else torch.as_tensor(np.ascontiguousarray(mask), dtype=torch.bool),
            )
        eps = out.numpy().astype(np.float64)
        if not np.isfinite(eps).all():
            raise NumericError(f"{self.relation}: non-finite noise prediction at t={t}")
        return eps[0] if squeeze else eps


def encode_examples(kind: RelationKind, examples: list[SynthExample], container: Container, desc: ArchDescriptor):
    """Dataset tensors: padded poses (n, N, 4), shapes+context (n, N, s), mask (n, N)."""
    if not examples:
        raise ValidationError("empty dataset")
    arities = [len(ex.poses) for ex in examples]
    for ex, a in zip(examples, arities):
        if not kind.object_arity.accepts(a):
            raise ValidationError(f"{kind.name}: example arity {a} outside {kind.object_arity.min}..{kind.object_arity.max}")
        if ex.relation != kind.name:
            raise ValidationError(f"dataset mixes relations: {ex.relation} in a {kind.name} dataset")
    n_max = max(arities)
    n = len(examples)
    s_dim = desc.shape_dim + desc.context_dim
    poses = np.zeros((n, n_max, desc.pose_dim), dtype=np.float64)
    shapes = np.zeros((n, n_max, s_dim), dtype=np.float64)
    mask = np.zeros((n, n_max), dtype=bool)
    for i, ex in enumerate(examples):
        k = len(ex.poses)
        poses[i, :k] = normalize_poses(container, ex.poses)
        shapes[i, :k, : desc.shape_dim] = normalize_shapes(container, ex.shapes)
        if desc.context_dim:
            shapes[i, :k, desc.shape_dim :] = context_features(kind.name, ex.context, container)
        mask[i, :k] = True
    return poses, shapes, mask


def masked_mse(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor | None) -> torch.Tensor:
    if mask is None:
        return torch.mean((pred - target) ** 2)
    m = mask[:, :, None].to(pred.dtype)
    return torch.sum(((pred - target) ** 2) * m) / (torch.sum(m) * pred.shape[-1])


def train_denoiser(
    relation,
    examples: list[SynthExample],
    container: Container,
    schedule: NoiseSchedule,
    config: TrainConfig | None = None,
) -> TrainedDenoiser:
    """Fit the relation's denoiser to the dataset; fully seeded and CPU-deterministic."""
    config = config or TrainConfig()
    kind = relation if isinstance(relation, RelationKind) else lookup(relation)
    desc = descriptor_for(kind, hidden=config.hidden, time_expansion=config.time_expansion)

    rng = np.random.default_rng(config.seed)
    poses, shapes, mask = encode_examples(kind, examples, container, desc)
    n = len(examples)
    fixed_arity = desc.backbone == "mlp"

    order = rng.permutation(n)
    n_val = max(1, int(n * config.val_fraction)) if n >= 10 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx, val_idx = order, order[:0]

    model = build_denoiser(desc)
    torch_gen = torch.Generator().manual_seed(int(rng.integers(2**63)))
    init_parameters(model, torch_gen)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)

    t_poses = torch.as_tensor(poses, dtype=torch.float32)
    t_shapes = torch.as_tensor(shapes, dtype=torch.float32)
    t_mask = None if fixed_arity else torch.as_tensor(mask, dtype=torch.bool)

    # fixed validation corruption so the epoch curve is comparable
    if n_val:
        val_t = rng.integers(1, schedule.T + 1, size=n_val)
        val_eps = rng.standard_normal((n_val, poses.shape[1], desc.pose_dim))

    def corrupted(idx: np.ndarray, t_draw: np.ndarray, eps_draw: np.ndarray):
        ab = schedule.alpha_bar[t_draw - 1][:, None, None]
        noisy = np.sqrt(ab) * poses[idx] + np.sqrt(1.0 - ab) * eps_draw
        return (
            torch.as_tensor(noisy, dtype=torch.float32),
            torch.as_tensor(eps_draw, dtype=torch.float32),
            torch.as_tensor(t_draw, dtype=torch.float32),
        )

    def eval_val() -> float:
        if not n_val:
            return math.nan
        model.eval()
        with torch.no_grad():
            noisy, eps, tt = corrupted(val_idx, val_t, val_eps)
            pred = model(noisy, t_shapes[val_idx], tt, None if t_mask is None else t_mask[val_idx])
            loss = masked_mse(pred, eps, None if t_mask is None else t_mask[val_idx])
        model.train()
        return float(loss)

    history = {"train_loss": [], "val_loss": [], "best_epoch": 0}
    best_val = math.inf
    best_state = None
    model.train()
    for epoch in range(config.epochs):
        if config.lr_decay:
            frac = epoch / max(config.epochs - 1, 1)
            lr_now = config.lr * (0.1 + 0.45 * (1.0 + math.cos(math.pi * frac)))
            for group in optimizer.param_groups:
                group["lr"] = lr_now
        perm = rng.permutation(train_idx)
        epoch_losses = []
        for start in range(0, len(perm), config.batch_size):
            idx = perm[start : start + config.batch_size]
            t_draw = rng.integers(1, schedule.T + 1, size=len(idx))
            eps_draw = rng.standard_normal((len(idx), poses.shape[1], desc.pose_dim))
            noisy, eps, tt = corrupted(idx, t_draw, eps_draw)
            pred = model(noisy, t_shapes[idx], tt, None if t_mask is None else t_mask[idx])
            loss = masked_mse(pred, eps, None if t_mask is None else t_mask[idx])
            if not torch.isfinite(loss):
                raise NumericError(f"{kind.name}: non-finite loss at epoch {epoch}, step {start // config.batch_size}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_losses.append(loss.item())
        val_loss = eval_val()
        history["train_loss"].append(float(np.mean(epoch_losses)))
        history["val_loss"].append(val_loss)
        if n_val and val_loss < best_val:
            best_val = val_loss
            history["best_epoch"] = epoch
            if config.restore_best:
                best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    if best_state is not None:
        model.load_state_dict(best_state)
    return TrainedDenoiser(descriptor=desc, module=model, schedule=schedule, history=history)
