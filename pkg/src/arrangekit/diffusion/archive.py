"""Persistence for trained denoisers and the model bank.

One file per relation: a JSON header (architecture descriptor, schedule
fingerprint + betas, tensor directory, training history) followed by raw
little-endian float32 tensor bytes.  The format is self-describing and
byte-deterministic, so identical training runs write identical banks.
Loading refuses weights whose schedule fingerprint does not match.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from ..errors import ValidationError
from .nets import ArchDescriptor, build_denoiser
from .schedule import NoiseSchedule, schedule_fingerprint
from .training import TrainedDenoiser

MAGIC = b"AKWEIGHTS1\n"


def save_denoiser(trained: TrainedDenoiser, path) -> None:
    state = trained.module.state_dict()
    tensors = []
    blobs = []
    offset = 0
    for name in sorted(state):
        arr = state[name].detach().numpy().astype("<f4")
        blob = np.ascontiguousarray(arr).tobytes()
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = {
        "descriptor": trained.descriptor.to_json(),
        "schedule": {
            "T": trained.schedule.T,
            "fingerprint": schedule_fingerprint(trained.schedule),
            "beta": [float(b) for b in trained.schedule.beta],
        },
        "history": trained.history,
        "tensors": tensors,
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(payload).to_bytes(8, "little"))
        fh.write(payload)
        for blob in blobs:
            fh.write(blob)


def load_denoiser(path, expect_fingerprint: str | None = None) -> TrainedDenoiser:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValidationError(f"{path}: not a weight archive")
        size = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(size).decode("utf-8"))
        body = fh.read()
    sched_doc = header["schedule"]
    beta = np.asarray(sched_doc["beta"], dtype=np.float64)
    alpha = 1.0 - beta
    schedule = NoiseSchedule(T=int(sched_doc["T"]), beta=beta, alpha=alpha, alpha_bar=np.cumprod(alpha))
    actual = schedule_fingerprint(schedule)
    if actual != sched_doc["fingerprint"]:
        raise ValidationError(f"{path}: schedule fingerprint mismatch (corrupt archive)")
    if expect_fingerprint is not None and actual != expect_fingerprint:
        raise ValidationError(
            f"{path}: trained for schedule {sched_doc['fingerprint']}, expected {expect_fingerprint}"
        )
    desc = ArchDescriptor.from_json(header["descriptor"])
    module = build_denoiser(desc)
    state = {}
    for spec in header["tensors"]:
        raw = body[spec["offset"] : spec["offset"] + spec["nbytes"]]
        arr = np.frombuffer(raw, dtype="<f4").reshape(spec["shape"]).copy()
        state[spec["name"]] = torch.as_tensor(arr)
    module.load_state_dict(state)
    return TrainedDenoiser(descriptor=desc, module=module, schedule=schedule, history=header.get("history", {}))


class ModelBank:
    """Immutable map relation name -> trained denoiser, all sharing one schedule."""

    def __init__(self, models: dict[str, TrainedDenoiser]):
        if not models:
            raise ValidationError("empty model bank")
        fingerprints = {m.fingerprint() for m in models.values()}
        if len(fingerprints) != 1:
            raise ValidationError(f"bank mixes noise schedules: {sorted(fingerprints)}")
        self._models = dict(models)
        self.schedule = next(iter(models.values())).schedule

    def __contains__(self, name: str) -> bool:
        return name in self._models

    def __getitem__(self, name: str) -> TrainedDenoiser:
        if name not in self._models:
            raise ValidationError(f"no trained model for relation {name!r}")
        return self._models[name]

    def relations(self) -> list[str]:
        return sorted(self._models)

    def fingerprint(self) -> str:
        return schedule_fingerprint(self.schedule)

    @staticmethod
    def filename(relation: str) -> str:
        return relation.replace("/", "_") + ".akw"

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {"schedule_fingerprint": self.fingerprint(), "relations": self.relations(), "T": self.schedule.T}
        for name, model in self._models.items():
            save_denoiser(model, directory / self.filename(name))
        with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(directory) -> "ModelBank":
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        if not manifest_path.exists():
            raise ValidationError(f"{directory}: no manifest.json (not a model bank)")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        expect = manifest["schedule_fingerprint"]
        models = {
            name: load_denoiser(directory / ModelBank.filename(name), expect_fingerprint=expect)
            for name in manifest["relations"]
        }
        return ModelBank(models)
