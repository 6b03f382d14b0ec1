"""Decision labels, partition statistics, and 2D SVG rendering.

Each maximal region carries one affine output map, so class labels and
within-region decision boundaries are exact objects: the label is the
argmax of the output at the representative (ties to the lowest index),
and the boundary against class j is the hyperplane where the two output
rows tie, clipped to the region.  The renderer draws one closed polygon
per region and is byte-deterministic given the color seed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .enumeration import EnumerationResult, Region, sign_key_to_string
from .geometry import enumerate_vertices_2d, polygon_area
from .network import EffectiveAffine, Network, effective_output

__all__ = [
    "LabeledRegion",
    "RenderSpec",
    "label_regions",
    "render_svg_2d",
    "region_statistics",
    "per_layer_counts_csv",
]

# Fill palette for class_label / boundary_band modes (label modulo size).
_CLASS_PALETTE = (
    "#4878cf",
    "#d65f5f",
    "#6acc65",
    "#b47cc7",
    "#c4ad66",
    "#77bedb",
    "#ee854a",
    "#82c6e2",
    "#956cb4",
    "#8c613c",
)


@dataclass(frozen=True)
class LabeledRegion:
    region: Region
    label: int
    output_affine: EffectiveAffine


@dataclass(frozen=True)
class RenderSpec:
    """mode: region_id | class_label | boundary_band; canvas in pixels;
    band epsilon in output units (boundary_band mode only)."""

    mode: str = "region_id"
    canvas: int = 640
    color_seed: int = 0
    band: float = 0.05

    def __post_init__(self):
        if self.mode not in ("region_id", "class_label", "boundary_band"):
            raise ValueError(f"unknown render mode {self.mode!r}")
        if self.canvas <= 0:
            raise ValueError("canvas must be positive")
        if self.band < 0:
            raise ValueError("band epsilon must be nonnegative")


def label_regions(net: Network, result: EnumerationResult) -> list[LabeledRegion]:
    """Attach argmax class labels and output affine maps to every region."""
    out = []
    for region in result.regions:
        aff = effective_output(net, region.representative)
        label = int(np.argmax(aff(region.representative)))
        out.append(LabeledRegion(region, label, aff))
    return out


def decision_boundary_rows(lr: LabeledRegion) -> list[tuple[int, np.ndarray, float]]:
    """Per rival class j, the row (W_i - W_j, b_i - b_j) whose zero set is
    the i-vs-j decision boundary inside the region (i = region label)."""
    W, b = lr.output_affine.W, lr.output_affine.b
    i = lr.label
    rows = []
    for j in range(W.shape[0]):
        if j != i:
            rows.append((j, W[i] - W[j], float(b[i] - b[j])))
    return rows


# -- SVG rendering -------------------------------------------------------------


def _region_color(sign_key: tuple[int, ...], seed: int) -> str:
    digest = hashlib.sha256(f"{seed}:{sign_key_to_string(sign_key)}".encode()).digest()
    hue = digest[0] / 255.0
    sat = 0.35 + 0.40 * digest[1] / 255.0
    val = 0.75 + 0.20 * digest[2] / 255.0
    i = int(hue * 6.0) % 6
    f = hue * 6.0 - int(hue * 6.0)
    p, q, t = val * (1 - sat), val * (1 - f * sat), val * (1 - (1 - f) * sat)
    r, g, b = [
        (val, t, p),
        (q, val, p),
        (p, val, t),
        (p, q, val),
        (t, p, val),
        (val, p, q),
    ][i]
    return "#{:02x}{:02x}{:02x}".format(int(r * 255), int(g * 255), int(b * 255))


def _clip_halfplane(pts: list[np.ndarray], a: np.ndarray, b: float) -> list[np.ndarray]:
    """Sutherland-Hodgman: keep the part of the polygon with a.x + b >= 0."""
    if not pts:
        return []
    out: list[np.ndarray] = []
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        fp, fq = float(a @ p + b), float(a @ q + b)
        if fp >= 0.0:
            out.append(p)
            if fq < 0.0:
                out.append(p + (q - p) * (fp / (fp - fq)))
        elif fq >= 0.0:
            out.append(p + (q - p) * (fp / (fp - fq)))
    return out


def _path(pts: np.ndarray, to_px) -> str:
    coords = " L ".join("{:.3f} {:.3f}".format(*to_px(p)) for p in pts)
    return f"M {coords} Z"


def render_svg_2d(labeled: list[LabeledRegion], spec: RenderSpec) -> str:
    """SVG document with one closed polygon per region.

    Fill depends on the mode: a deterministic hash of the sign key
    (region_id), a per-class palette (class_label), or class colors with
    white sub-polygons where the top-two output rows are within the band
    epsilon (boundary_band).  Raises for non-2D regions; slice the
    network first.
    """
    if not labeled:
        raise ValueError("nothing to render")
    if any(lr.region.polytope.dim != 2 for lr in labeled):
        raise ValueError("rendering needs 2D regions; slice the network first")

    polys = [enumerate_vertices_2d(lr.region.polytope) for lr in labeled]
    allpts = np.vstack(polys)
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.02 * span
    scale = spec.canvas / (span + 2 * pad)

    def to_px(p):
        return (
            (p[0] - lo[0] + pad) * scale,
            spec.canvas - (p[1] - lo[1] + pad) * scale,  # y up
        )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{spec.canvas}" height="{spec.canvas}" '
        f'viewBox="0 0 {spec.canvas} {spec.canvas}">'
    ]
    for lr, pts in zip(labeled, polys):
        if spec.mode == "region_id":
            fill = _region_color(lr.region.sign_key, spec.color_seed)
        else:
            fill = _CLASS_PALETTE[lr.label % len(_CLASS_PALETTE)]
        parts.append(
            f'<path d="{_path(pts, to_px)}" fill="{fill}" stroke="#333333" stroke-width="0.6"/>'
        )
        if spec.mode == "boundary_band":
            poly_list = [p for p in pts]
            for _, a, b in decision_boundary_rows(lr):
                band = _clip_halfplane(poly_list, -a, spec.band - b)
                band = _clip_halfplane(band, a, spec.band + b)
                if len(band) >= 3:
                    parts.append(
                        f'<path d="{_path(np.array(band), to_px)}" fill="#ffffff" stroke="none"/>'
                    )
    parts.append("</svg>")
    return "\n".join(parts)


# -- statistics -----------------------------------------------------------------


def region_statistics(result: EnumerationResult) -> dict:
    """The tabulated quantities: per-layer counts, totals, radius spread,
    and solver diagnostics."""
    radii = np.array([r.radius for r in result.regions]) if result.regions else np.zeros(0)
    return {
        "per_layer_counts": list(result.per_layer_counts),
        "total_regions": len(result.regions),
        "radius_min": float(radii.min()) if radii.size else None,
        "radius_median": float(np.median(radii)) if radii.size else None,
        "radius_max": float(radii.max()) if radii.size else None,
        "lp_calls": result.stats.lp_calls,
        "skipped_candidates": result.stats.skipped_candidates,
        "wall_ms": result.stats.wall_ms,
    }


def per_layer_counts_csv(result: EnumerationResult) -> str:
    lines = ["layer,count"]
    for i, c in enumerate(result.per_layer_counts, start=1):
        lines.append(f"{i},{c}")
    return "\n".join(lines) + "\n"


def total_polygon_area(labeled: list[LabeledRegion]) -> float:
    return float(
        sum(polygon_area(enumerate_vertices_2d(lr.region.polytope)) for lr in labeled)
    )
