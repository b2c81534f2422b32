"""Grounding a relation graph into poses with annealed ULA over composed scores.

Each literal contributes its model's noise prediction on its argument slots;
the per-literal scores are normalized to a common RMS, scatter-added into the
full pose vector, and the whole vector is driven through the noise levels
t = T..1 with M Langevin updates per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diffusion.archive import ModelBank
from .diffusion.sampling import encode_shape_features, project_angles
from .errors import NumericError, ValidationError
from .evaluation import feasibility_score
from .geometry import Container, Pose, Scene, denormalize_poses, normalize_poses
from .relations.classifiers import check_graph, literal_context
from .relations.graphs import GroundingGraph, validate_graph_against_scene


@dataclass(frozen=True)
class SamplerConfig:
    T: int = 1500
    mcmc_steps: int = 20  # M inner updates per noise level
    noise_mode: str = "standard"  # "standard" (sqrt(beta)) | "ula_sqrt2" (sqrt(2 beta))
    normalization: bool = True
    transition: str = "rescore"  # "rescore" | "hybrid" (reverse-kernel first step per level)
    step_beta_cap: float = 0.2  # Langevin stability guard at the clipped top levels
    seed: int = 0
    reach_radius_m: float | None = None
    literal_weights: dict = field(default_factory=dict)  # literal key string -> weight

    def __post_init__(self):
        if self.T < 2:
            raise ValidationError("SamplerConfig.T must be >= 2")
        if self.mcmc_steps < 1:
            raise ValidationError("SamplerConfig.mcmc_steps must be >= 1")
        if self.noise_mode not in ("standard", "ula_sqrt2"):
            raise ValidationError(f"unknown noise mode {self.noise_mode!r}")
        if self.transition not in ("rescore", "hybrid"):
            raise ValidationError(f"unknown transition {self.transition!r}")
        if not 0.0 < self.step_beta_cap <= 1.0:
            raise ValidationError("step_beta_cap must be in (0, 1]")

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "mcmc_steps": self.mcmc_steps,
            "noise_mode": self.noise_mode,
            "normalization": self.normalization,
            "transition": self.transition,
            "step_beta_cap": self.step_beta_cap,
            "seed": self.seed,
            "reach_radius_m": self.reach_radius_m,
            "literal_weights": dict(self.literal_weights),
        }


@dataclass(frozen=True)
class ArrangementResult:
    poses: tuple[Pose, ...]
    per_literal: tuple[bool, ...]
    feasibility: float
    energy_trace: tuple[float, ...] = ()


def validate_graph(graph: GroundingGraph, scene: Scene, bank: ModelBank | None = None) -> list[str]:
    """All problems with the graph; empty when ready to sample.

    Objects without any literal are a warning, not an error, and are not
    reported here (they simply keep their prior / frozen poses).
    """
    errors = validate_graph_against_scene(graph, scene)
    if bank is not None:
        for name in sorted(graph.relations()):
            if name not in bank:
                errors.append(f"no trained model for relation {name!r} in the bank")
    return errors


class _CompiledLiteral:
    """Pre-resolved literal: model, slot indices, conditioning features."""

    def __init__(self, lit, scene: Scene, bank: ModelBank, config: SamplerConfig):
        self.literal = lit
        self.key = "(" + ",".join(lit.key()) + ")"
        self.model = bank[lit.relation]
        self.slots = np.array([scene.index_of(a) for a in lit.object_args()], dtype=int)
        ctx = literal_context(lit, scene, config.reach_radius_m)
        shapes = [scene.objects[i].bbox for i in self.slots]
        self.features = encode_shape_features(self.model.descriptor, scene.container, shapes, ctx)
        self.weight = float(config.literal_weights.get(self.key, 1.0))


def _compile(graph: GroundingGraph, scene: Scene, bank: ModelBank, config: SamplerConfig) -> list[_CompiledLiteral]:
    errors = validate_graph(graph, scene, bank)
    if errors:
        raise ValidationError("invalid graph: " + "; ".join(errors))
    compiled = [_CompiledLiteral(lit, scene, bank, config) for lit in graph]
    # deterministic summation order regardless of the literal order in the graph
    compiled.sort(key=lambda c: c.key)
    return compiled


def _frozen_mask(scene: Scene) -> np.ndarray:
    mask = np.zeros(len(scene.objects), dtype=bool)
    for i, obj in enumerate(scene.objects):
        if obj.id in scene.frozen:
            mask[i] = True
    return mask


def composite_score(
    compiled: list[_CompiledLiteral],
    pose_vec: np.ndarray,
    t: int,
    frozen: np.ndarray,
    normalization: bool = True,
) -> np.ndarray:
    """Summed (optionally RMS-normalized) per-literal scores, frozen slots zeroed.

    pose_vec: (B, N, 4).  Each literal's score is rescaled to unit RMS and then
    multiplied by the mean pre-normalization RMS across literals, so relative
    magnitudes stay calibrated to the schedule while no literal dominates.
    """
    b, n, d = pose_vec.shape
    total = np.zeros_like(pose_vec)
    if not compiled:
        return total
    raw_scores = []
    rms_values = []
    for lit in compiled:
        sub = pose_vec[:, lit.slots, :]
        feats = np.broadcast_to(lit.features, (b, *lit.features.shape)).copy()
        eps = lit.model.predict_eps(sub, feats, t)
        if not np.isfinite(eps).all():
            raise NumericError(f"literal {lit.key}: non-finite score at level {t}")
        raw_scores.append(eps)
        rms_values.append(np.sqrt(np.mean(eps**2, axis=(1, 2))))
    if normalization:
        mean_rms = np.mean(np.stack(rms_values), axis=0)  # (B,)
        for lit, eps, rms in zip(compiled, raw_scores, rms_values):
            scale = np.where(rms > 1e-12, mean_rms / np.maximum(rms, 1e-12), 1.0)
            total[:, lit.slots, :] += lit.weight * eps * scale[:, None, None]
    else:
        for lit, eps in zip(compiled, raw_scores):
            total[:, lit.slots, :] += lit.weight * eps
    total[:, frozen, :] = 0.0
    return total


def ula_step(
    compiled: list[_CompiledLiteral],
    pose_vec: np.ndarray,
    t: int,
    schedule,
    config: SamplerConfig,
    rng: np.random.Generator,
    frozen: np.ndarray,
    deterministic: bool = False,
    contract: bool = False,
) -> tuple[np.ndarray, float]:
    """One Langevin update at level t; returns (new vector, composite score RMS).

    p' = p - C_t * sum_R eps_R + D_t * xi with C_t = beta_t / sqrt(1 - alpha_bar_t)
    and D_t = sqrt(beta_t) (standard) or sqrt(2 beta_t) (ula_sqrt2).  With
    `contract` the reverse kernel's 1/sqrt(alpha_t) rescale is applied to the
    drifted mean (hybrid transition mode).

    The effective beta is capped by config.step_beta_cap: the schedule clips
    beta at 0.999 near t = T, and a Langevin step that large times several
    summed literal scores on one slot overshoots and diverges.  The cap only
    touches those top few levels.
    """
    beta = min(schedule.beta_at(t), config.step_beta_cap)
    ab = schedule.alpha_bar_at(t)
    c_t = beta / math.sqrt(1.0 - ab)
    d_t = math.sqrt(2.0 * beta) if config.noise_mode == "ula_sqrt2" else math.sqrt(beta)
    score = composite_score(compiled, pose_vec, t, frozen, config.normalization)
    rms = float(np.sqrt(np.mean(score**2)))
    mean = pose_vec - c_t * score
    if contract:
        alpha = schedule.alpha_at(t)
        contracted = mean / math.sqrt(alpha)
        contracted[:, frozen, :] = mean[:, frozen, :]
        mean = contracted
    if deterministic:
        return mean, rms
    xi = rng.standard_normal(pose_vec.shape)
    xi[:, frozen, :] = 0.0
    return mean + d_t * xi, rms


def sample_arrangements(
    bank: ModelBank,
    graph: GroundingGraph,
    scene: Scene,
    config: SamplerConfig,
    rng: np.random.Generator,
    n_samples: int = 1,
) -> list[ArrangementResult]:
    """n independent annealed-ULA chains over the composed score (batched)."""
    schedule = bank.schedule
    if config.T != schedule.T:
        raise ValidationError(f"config T={config.T} but bank schedule has T={schedule.T}")
    compiled = _compile(graph, scene, bank, config)
    frozen = _frozen_mask(scene)
    n_obj = len(scene.objects)

    if frozen.any() and scene.poses is None:
        raise ValidationError("scene freezes objects but carries no poses")
    base = (
        normalize_poses(scene.container, scene.poses)
        if scene.poses is not None
        else np.zeros((n_obj, 4))
    )
    p = rng.standard_normal((n_samples, n_obj, 4))
    p[:, frozen, :] = base[frozen]

    trace: list[float] = []
    for t in range(schedule.T, 0, -1):
        for m in range(config.mcmc_steps):
            last = t == 1 and m == config.mcmc_steps - 1
            contract = config.transition == "hybrid" and m == 0
            p, rms = ula_step(compiled, p, t, schedule, config, rng, frozen, deterministic=last, contract=contract)
            if m == 0:
                trace.append(rms)
        if not np.isfinite(p).all():
            raise NumericError(f"non-finite poses at level {t}")

    p = project_angles(p)
    p[:, frozen, :] = base[frozen]
    results = []
    for row in p:
        poses = denormalize_poses(scene.container, row)
        for i in range(n_obj):
            if frozen[i]:
                poses[i] = scene.poses[i]  # bit-exact frozen poses
        per_literal = check_graph(graph, scene, poses, config.reach_radius_m)
        feas, _ = feasibility_score(scene, poses, stacked=graph.stacked_pairs())
        results.append(
            ArrangementResult(
                poses=tuple(poses),
                per_literal=tuple(per_literal),
                feasibility=feas,
                energy_trace=tuple(trace),
            )
        )
    return results


def sample_arrangement(
    bank: ModelBank,
    graph: GroundingGraph,
    scene: Scene,
    config: SamplerConfig,
    rng: np.random.Generator | None = None,
) -> ArrangementResult:
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return sample_arrangements(bank, graph, scene, config, rng, n_samples=1)[0]
