"""Torch models mirroring the interchange layer vocabulary.

Two families: plain MLPs (dense + two-slope activation stacks) and
residual MLPs where each block is Linear -> BatchNorm -> act -> Linear ->
BatchNorm with an identity skip, followed by a post-add activation.  The
non-residual baseline keeps the exact same layers with the skip addition
removed, so block comparisons isolate the skip itself.
"""

from __future__ import annotations

import math

import torch
from torch import nn

__all__ = ["TwoSlope", "ResidualBlock", "build_mlp", "build_residual_mlp", "init_kaiming_uniform"]


class TwoSlope(nn.Module):
    """sigma(x) = a*x for x > 0 and b*x otherwise."""

    def __init__(self, slope_pos: float = 1.0, slope_neg: float = 0.0):
        super().__init__()
        self.slope_pos = float(slope_pos)
        self.slope_neg = float(slope_neg)

    def forward(self, x):
        return torch.where(x > 0, self.slope_pos * x, self.slope_neg * x)

    def extra_repr(self) -> str:
        return f"a={self.slope_pos}, b={self.slope_neg}"


class ResidualBlock(nn.Module):
    """Identity skip around a small batch-normalized body."""

    def __init__(self, width: int, act: tuple[float, float]):
        super().__init__()
        self.body = nn.Sequential(
            nn.Linear(width, width),
            nn.BatchNorm1d(width),
            TwoSlope(*act),
            nn.Linear(width, width),
            nn.BatchNorm1d(width),
        )

    def forward(self, x):
        return x + self.body(x)


def build_mlp(widths: list[int], act: tuple[float, float] = (1.0, 0.0), in_dim: int = 2, out_dim: int = 2) -> nn.Sequential:
    layers: list[nn.Module] = []
    prev = in_dim
    for w in widths:
        layers.append(nn.Linear(prev, w))
        layers.append(TwoSlope(*act))
        prev = w
    layers.append(nn.Linear(prev, out_dim))
    return nn.Sequential(*layers)


def build_residual_mlp(
    width: int,
    n_blocks: int,
    act: tuple[float, float] = (1.0, 0.0),
    skip: bool = True,
    in_dim: int = 2,
    out_dim: int = 2,
) -> nn.Sequential:
    """Entry layer plus `n_blocks` residual units and a linear classifier.

    One activation inside each block body, none after the add, which keeps
    the activation-layer count (and thus the region budget) at desk scale.
    `skip=False` builds the non-residual baseline of the block-count
    experiments: the same depth and widths with the skip additions removed
    and, with them, the batch norms that belong to the residual design
    (a baseline that keeps batch norm stays saturated with crossings and
    does not reproduce the reference behavior; see the trend tests).
    """
    layers: list[nn.Module] = [nn.Linear(in_dim, width), TwoSlope(*act)]
    for _ in range(n_blocks):
        if skip:
            layers.append(ResidualBlock(width, act))
        else:
            layers += [nn.Linear(width, width), TwoSlope(*act), nn.Linear(width, width)]
    layers.append(nn.Linear(width, out_dim))
    return nn.Sequential(*layers)


def init_kaiming_uniform(model: nn.Module) -> None:
    # the PyTorch Linear default, restated explicitly: Kaiming-uniform
    # with a = sqrt(5); the relu-gain variant over-populates the domain
    # with hyperplanes on these tiny inputs
    for mod in model.modules():
        if isinstance(mod, nn.Linear):
            nn.init.kaiming_uniform_(mod.weight, a=math.sqrt(5))
