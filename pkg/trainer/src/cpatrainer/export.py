"""Serialize torch models into the engine's network interchange format.

Batch norm is exported with frozen running statistics pre-combined into
(scale, shift); residual blocks become {"kind": "residual", "body": [...]}.
All parameters are written as 64-bit floats: the downstream sign decisions
are tolerance-sensitive.
"""

from __future__ import annotations

import json

import torch
from torch import nn

from .models import ResidualBlock, TwoSlope

__all__ = ["model_to_json", "export_model"]


def _linear_item(mod: nn.Linear) -> dict:
    return {
        "kind": "dense",
        "W": mod.weight.detach().double().numpy().tolist(),
        "b": mod.bias.detach().double().numpy().tolist(),
    }


def _batchnorm_item(mod: nn.BatchNorm1d) -> dict:
    var = mod.running_var.detach().double()
    mean = mod.running_mean.detach().double()
    gamma = mod.weight.detach().double()
    beta = mod.bias.detach().double()
    scale = gamma / torch.sqrt(var + mod.eps)
    shift = beta - mean * scale
    return {"kind": "batchnorm", "scale": scale.numpy().tolist(), "shift": shift.numpy().tolist()}


def _items(seq: nn.Sequential) -> list[dict]:
    out: list[dict] = []
    for mod in seq:
        if isinstance(mod, nn.Linear):
            out.append(_linear_item(mod))
        elif isinstance(mod, TwoSlope):
            out.append({"kind": "activation", "a": mod.slope_pos, "b": mod.slope_neg})
        elif isinstance(mod, nn.BatchNorm1d):
            out.append(_batchnorm_item(mod))
        elif isinstance(mod, ResidualBlock):
            out.append({"kind": "residual", "body": _items(mod.body)})
        else:
            raise TypeError(f"cannot export module {type(mod).__name__}")
    return out


def model_to_json(model: nn.Sequential, in_dim: int = 2) -> dict:
    return {"input_dim": in_dim, "layers": _items(model)}


def export_model(model: nn.Sequential, path, in_dim: int = 2) -> None:
    model.eval()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model, in_dim), fh)
