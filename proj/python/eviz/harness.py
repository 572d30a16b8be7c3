"""Fine-tuning harness interface.

Consumes a manifest, adapts a small pre-trained vision-language model with the
vision encoder frozen, and writes generations and token logprobs that `eviz
eval` reads unchanged. Only the configuration and entry points live here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ._eviz import training_constants_json

_DEFAULTS = json.loads(training_constants_json())


class ManifestSchemaMismatch(ValueError):
    pass


class ModelLoadFailure(RuntimeError):
    pass


class MissingCheckpoint(FileNotFoundError):
    pass


@dataclass
class HarnessConfig:
    manifest: Path
    model: str
    out_dir: Path = Path("harness_out")
    steps: int = 50
    micro_batch: int = _DEFAULTS["micro_batch"]
    accumulation: int = _DEFAULTS["accumulation_steps"]
    schedule: dict = field(default_factory=lambda: dict(_DEFAULTS["schedule"]))
    weight_decay: float = _DEFAULTS["weight_decay"]
    beam_width: int = _DEFAULTS["beam_width"]
    max_new_tokens: int = _DEFAULTS["max_new_tokens"]
    seed: int = 0


def finetune(cfg: HarnessConfig) -> Path:
    """Train and return the checkpoint directory; writes loss_log.csv
    (step, train_loss, val_loss, lr) beside it."""
    raise NotImplementedError("model training is provided by a separate harness package")


def generate(cfg: HarnessConfig, checkpoint: Path) -> Path:
    """Write one generation per val record, with token logprobs, as JSONL."""
    if not Path(checkpoint).exists():
        raise MissingCheckpoint(str(checkpoint))
    raise NotImplementedError("model inference is provided by a separate harness package")
