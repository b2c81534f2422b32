"""Reverse sampling from a single trained denoiser."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericError, ValidationError
from ..geometry import Container, Pose, denormalize_poses, normalize_shapes
from .nets import ArchDescriptor, context_features
from .training import TrainedDenoiser


def reverse_step(
    model: TrainedDenoiser,
    p_t: np.ndarray,
    shapes: np.ndarray,
    t: int,
    rng: np.random.Generator,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """One ancestral step p_t -> p_{t-1}.

    mean = (p_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t),
    noise std sqrt(beta_t); the final step (t = 1) is deterministic.
    """
    sched = model.schedule
    beta = sched.beta_at(t)
    alpha = sched.alpha_at(t)
    ab = sched.alpha_bar_at(t)
    eps_hat = model.predict_eps(p_t, shapes, t, mask)
    mean = (p_t - beta / math.sqrt(1.0 - ab) * eps_hat) / math.sqrt(alpha)
    if t == 1:
        return mean
    xi = rng.standard_normal(p_t.shape)
    if mask is not None:
        xi = xi * mask[..., None]
    return mean + math.sqrt(beta) * xi


def project_angles(vec: np.ndarray) -> np.ndarray:
    """Project the (sin, cos) block of each pose row onto the unit circle."""
    out = np.array(vec, dtype=np.float64, copy=True)
    sc = out[..., 2:4]
    norm = np.sqrt(np.sum(sc**2, axis=-1, keepdims=True))
    out[..., 2:4] = np.where(norm < 1e-12, np.array([0.0, 1.0]), sc / np.maximum(norm, 1e-12))
    return out


def encode_shape_features(desc: ArchDescriptor, container: Container, shapes, context=None) -> np.ndarray:
    """(k, shape_dim + context_dim) conditioning rows for one object set."""
    k = len(shapes)
    if not (desc.arity_min <= k <= desc.arity_max):
        raise ValidationError(f"{desc.relation}: arity {k} outside {desc.arity_min}..{desc.arity_max}")
    feat = np.zeros((k, desc.shape_dim + desc.context_dim), dtype=np.float64)
    feat[:, : desc.shape_dim] = normalize_shapes(container, shapes)
    if desc.context_dim:
        feat[:, desc.shape_dim :] = context_features(desc.relation, context, container)
    return feat


def sample_chains(model: TrainedDenoiser, shape_features: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Batched full reverse chains; returns normalized pose vectors (B, k, 4)."""
    b, k, _ = shape_features.shape
    p = rng.standard_normal((b, k, model.descriptor.pose_dim))
    for t in range(model.schedule.T, 0, -1):
        p = reverse_step(model, p, shape_features, t, rng)
        if not np.isfinite(p).all():
            raise NumericError(f"{model.relation}: non-finite sample at t={t}")
    return project_angles(p)


def sample_single(
    model: TrainedDenoiser,
    shapes,
    container: Container,
    rng: np.random.Generator,
    n_samples: int = 1,
    context=None,
) -> list[list[Pose]]:
    """Reverse chains for one object set; returns denormalized poses per sample."""
    feat = encode_shape_features(model.descriptor, container, shapes, context)
    batch = np.broadcast_to(feat, (n_samples, *feat.shape)).copy()
    chains = sample_chains(model, batch, rng)
    return [denormalize_poses(container, row) for row in chains]
