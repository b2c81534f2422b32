"""Named RNG sub-streams derived from one root seed.

Every command derives its randomness from the root seed through named
streams (synth/train/sample/...), so the same root seed reproduces every
artifact regardless of which subcommands ran before.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(root_seed: int, *names: str) -> np.random.Generator:
    """Independent generator for the given stream path, e.g. stream(s, "train", "left-of")."""
    keys = [zlib.crc32(n.encode("utf-8")) for n in names]
    return np.random.default_rng(np.random.SeedSequence([int(root_seed) & 0xFFFFFFFF, *keys]))


def spawn_seed(root_seed: int, *names: str) -> int:
    """Stable 32-bit seed for the given stream path (for torch generators)."""
    keys = [zlib.crc32(n.encode("utf-8")) for n in names]
    return int(np.random.SeedSequence([int(root_seed) & 0xFFFFFFFF, *keys]).generate_state(1)[0])
