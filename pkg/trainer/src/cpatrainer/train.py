"""Training loop and checkpoint export.

Adam, batch size 32, learning rate 1e-4, cross-entropy, Kaiming-uniform
Linear weights; one interchange file per checkpoint epoch plus a manifest
with seeds and dataset hashes.  Everything is seeded and CPU-only, so a
spec reproduces bit-identical checkpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .datasets import dataset_sha256, make_dataset
from .export import export_model
from .models import build_mlp, build_residual_mlp, init_kaiming_uniform

__all__ = ["TrainSpec", "TrainingDiverged", "train_and_export", "DEFAULT_CHECKPOINT_EPOCHS"]

DEFAULT_CHECKPOINT_EPOCHS = (1, 10, 50, 100, 200, 500, 1000, 2000, 5000)

BATCH_SIZE = 32
LEARNING_RATE = 1e-4


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainSpec:
    """What to train and when to snapshot it.

    `widths` describes a plain MLP; setting `residual_blocks` > 0 switches
    to the residual family (hidden width = widths[0]); `residual_skip`
    False keeps the same layers but removes the skip additions.
    """

    dataset: str = "two_moons"
    widths: tuple[int, ...] = (16,)
    residual_blocks: int = 0
    residual_skip: bool = True
    activation: tuple[float, float] = (1.0, 0.0)
    epochs: int = 5000
    checkpoint_epochs: tuple[int, ...] = DEFAULT_CHECKPOINT_EPOCHS
    seed: int = 0
    name: str = "run"


def _build(spec: TrainSpec) -> nn.Sequential:
    if spec.residual_blocks > 0:
        return build_residual_mlp(
            spec.widths[0], spec.residual_blocks, spec.activation, skip=spec.residual_skip
        )
    return build_mlp(list(spec.widths), spec.activation)


def train_and_export(spec: TrainSpec, out_dir) -> dict:
    """Train one configuration, exporting a checkpoint at each listed epoch.

    Returns the manifest (also written to `<name>_manifest.json`).
    Raises TrainingDiverged on a non-finite loss, reporting the seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.set_num_threads(1)  # tiny tensors; thread sync costs more than it buys
    torch.manual_seed(spec.seed)

    X, y = make_dataset(spec.dataset, spec.seed)
    data_hash = dataset_sha256(X, y)
    Xt = torch.tensor(X, dtype=torch.float32)
    yt = torch.tensor(y, dtype=torch.long)

    model = _build(spec)
    init_kaiming_uniform(model)
    opt = torch.optim.Adam(model.parameters(), lr=LEARNING_RATE)
    loss_fn = nn.CrossEntropyLoss()
    gen = torch.Generator().manual_seed(spec.seed)

    wanted = sorted(set(e for e in spec.checkpoint_epochs if e <= spec.epochs))
    checkpoints = []

    def snapshot(epoch: int) -> None:
        path = out / f"{spec.name}_epoch{epoch:05d}.json"
        export_model(model, path)
        model.train()
        checkpoints.append({"epoch": epoch, "path": path.name})

    n = Xt.shape[0]
    for epoch in range(1, spec.epochs + 1):
        model.train()
        perm = torch.randperm(n, generator=gen)
        for start in range(0, n, BATCH_SIZE):
            idx = perm[start : start + BATCH_SIZE]
            opt.zero_grad()
            loss = loss_fn(model(Xt[idx]), yt[idx])
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} (seed {spec.seed}, name {spec.name!r})"
                )
            loss.backward()
            opt.step()
        if epoch in wanted:
            snapshot(epoch)

    manifest = {
        "name": spec.name,
        "seed": spec.seed,
        "dataset": {"name": spec.dataset, "sha256": data_hash, "n_samples": int(X.shape[0])},
        "architecture": {
            "widths": list(spec.widths),
            "residual_blocks": spec.residual_blocks,
            "residual_skip": spec.residual_skip,
            "activation": list(spec.activation),
        },
        "optimizer": {"kind": "adam", "lr": LEARNING_RATE, "batch_size": BATCH_SIZE},
        "epochs": spec.epochs,
        "checkpoints": checkpoints,
        "notes": "synthetic_random labels and two-moons noise level are fixture choices",
    }
    (out / f"{spec.name}_manifest.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return manifest


def model_forward_numpy(model: nn.Sequential, X: np.ndarray) -> np.ndarray:
    """Eval-mode forward used by round-trip checks."""
    model.eval()
    with torch.no_grad():
        return model(torch.tensor(X, dtype=torch.float32)).double().numpy()
