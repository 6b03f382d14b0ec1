import numpy as np

from affinecells.geometry import Hyperplane
from affinecells.network import Network, activation, dense, relu


def random_mlp(rng, d0, widths, d_out=2, slope_neg=0.0):
    layers = []
    prev = d0
    for w in widths:
        layers.append(dense(rng.normal(size=(w, prev)), rng.normal(size=w)))
        layers.append(activation(1.0, slope_neg))
        prev = w
    layers.append(dense(rng.normal(size=(d_out, prev)), rng.normal(size=d_out)))
    return Network(d0, layers)


def five_general_lines(seed=95):
    """Five lines in general position, all C(5,2) crossings strictly inside
    [-1,1]^2 and no three concurrent (verified for the frozen seed)."""
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(5):
        theta = rng.uniform(0, np.pi)
        n = np.array([np.cos(theta), np.sin(theta)])
        p = rng.uniform(-0.6, 0.6, size=2)
        lines.append(Hyperplane(n, -float(n @ p)))
    return lines


def lines_as_first_layer_net(lines):
    """A 1-activation-layer net whose neuron hyperplanes are the lines."""
    W = np.array([h.normal for h in lines])
    b = np.array([h.offset for h in lines])
    return Network(2, [dense(W, b), relu(), dense(np.ones((1, len(lines))), [0.0])])
