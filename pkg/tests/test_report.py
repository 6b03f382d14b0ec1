import numpy as np
import pytest
from conftest import five_general_lines, lines_as_first_layer_net, random_mlp

from affinecells.enumeration import find_cpas
from affinecells.geometry import HPolytope
from affinecells.network import Network, dense, forward, relu
from affinecells.report import (
    LabeledRegion,
    RenderSpec,
    label_regions,
    per_layer_counts_csv,
    region_statistics,
    render_svg_2d,
    total_polygon_area,
)

BOX2 = HPolytope.box(2)


def quadrant_run():
    W = np.array([[1.0, 0.0], [0.0, 1.0]])
    net = Network(2, [dense(W, np.zeros(2)), relu(), dense(np.eye(2), np.zeros(2))])
    return net, find_cpas(net, BOX2)


# -- labeling ------------------------------------------------------------------


def test_constant_bias_label():
    net = Network(
        2, [dense(np.zeros((2, 2)), np.zeros(2)), relu(), dense(np.zeros((2, 2)), [3.0, 1.0])]
    )
    result = find_cpas(net, BOX2)
    labeled = label_regions(net, result)
    assert len(labeled) == 1
    assert labeled[0].label == 0


def test_label_flips_across_hyperplane():
    # one neuron, two outputs: class 1 wins where the neuron is on
    net = Network(
        2,
        [dense([[1.0, 0.0]], [0.0]), relu(), dense([[0.0], [2.0]], [0.5, 0.0])],
    )
    result = find_cpas(net, BOX2)
    labeled = label_regions(net, result)
    by_key = {lr.region.sign_key: lr for lr in labeled}
    assert by_key[(-1,)].label == 0  # outputs (0.5, 0)
    assert by_key[(1,)].label == 1  # outputs (0.5, 2 x1) with x1 up to 1
    for lr in labeled:
        assert lr.label == int(np.argmax(forward(net, lr.region.representative)))


def test_tie_breaks_to_lowest_index():
    net = Network(
        2, [dense(np.zeros((2, 2)), np.zeros(2)), relu(), dense(np.zeros((3, 2)), [1.0, 1.0, 1.0])]
    )
    labeled = label_regions(net, find_cpas(net, BOX2))
    assert labeled[0].label == 0


def test_output_affine_agrees_with_forward():
    rng = np.random.default_rng(3)
    net = random_mlp(rng, 2, [3, 3])
    labeled = label_regions(net, find_cpas(net, BOX2))
    for lr in labeled:
        rep = lr.region.representative
        assert np.allclose(lr.output_affine(rep), forward(net, rep), atol=1e-9)


# -- rendering -----------------------------------------------------------------


def test_quadrants_render_four_polygons():
    net, result = quadrant_run()
    svg = render_svg_2d(label_regions(net, result), RenderSpec())
    assert svg.count("<path") == 4
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")


def test_single_region_renders_one_rectangle():
    net = Network(2, [dense(np.zeros((1, 2)), [0.0]), relu(), dense([[1.0]], [0.0])])
    result = find_cpas(net, BOX2)
    svg = render_svg_2d(label_regions(net, result), RenderSpec())
    assert svg.count("<path") == 1


def test_sixteen_cell_area_conservation():
    lines = five_general_lines()
    net = lines_as_first_layer_net(lines)
    result = find_cpas(net, BOX2)
    labeled = label_regions(net, result)
    assert len(labeled) == 16
    area = total_polygon_area(labeled)
    assert area == pytest.approx(4.0, rel=1e-6)
    svg = render_svg_2d(labeled, RenderSpec(mode="region_id"))
    assert svg.count("<path") == 16


def test_render_deterministic_bytes():
    net, result = quadrant_run()
    labeled = label_regions(net, result)
    a = render_svg_2d(labeled, RenderSpec(color_seed=7))
    b = render_svg_2d(labeled, RenderSpec(color_seed=7))
    c = render_svg_2d(labeled, RenderSpec(color_seed=8))
    assert a == b
    assert a != c


def test_boundary_band_mode_adds_white_polygons():
    # one neuron, two outputs; classes tie at x1 = 0.25 inside the (+) region
    net = Network(
        2, [dense([[1.0, 0.0]], [0.0]), relu(), dense([[0.0], [2.0]], [0.5, 0.0])]
    )
    result = find_cpas(net, BOX2)
    labeled = label_regions(net, result)
    plain = render_svg_2d(labeled, RenderSpec(mode="class_label"))
    banded = render_svg_2d(labeled, RenderSpec(mode="boundary_band", band=0.2))
    assert banded.count("<path") > plain.count("<path")
    # classes tie only inside the (+) region: exactly one white band slab
    assert banded.count("#ffffff") == 1


def test_render_rejects_non_2d():
    rng = np.random.default_rng(6)
    net = random_mlp(rng, 3, [2])
    result = find_cpas(net, HPolytope.box(3))
    with pytest.raises(ValueError):
        render_svg_2d(label_regions(net, result), RenderSpec())


def test_render_spec_validation():
    with pytest.raises(ValueError):
        RenderSpec(mode="heatmap")
    with pytest.raises(ValueError):
        RenderSpec(canvas=0)
    with pytest.raises(ValueError):
        RenderSpec(band=-0.1)


# -- statistics -----------------------------------------------------------------


def test_stats_single_region_net():
    net = Network(2, [dense(np.zeros((2, 2)), np.zeros(2)), relu(), dense(np.eye(2), np.zeros(2))])
    stats = region_statistics(find_cpas(net, BOX2))
    assert stats["total_regions"] == 1
    assert stats["per_layer_counts"] == [1]


def test_stats_two_region_net():
    net = Network(2, [dense([[1.0, 0.0]], [0.0]), relu(), dense([[1.0]], [0.0])])
    stats = region_statistics(find_cpas(net, BOX2))
    assert stats["total_regions"] == 2
    assert stats["radius_min"] == pytest.approx(0.5, abs=1e-8)


def test_stats_match_oracle_totals():
    from affinecells.oracle import enumerate_patterns_bruteforce

    rng = np.random.default_rng(8)
    net = random_mlp(rng, 2, [3, 3])
    result = find_cpas(net, BOX2)
    stats = region_statistics(result)
    assert stats["total_regions"] == len(enumerate_patterns_bruteforce(net, BOX2).patterns)
    assert stats["lp_calls"] > 0 and stats["wall_ms"] >= 0


def test_counts_csv_layout():
    net, result = quadrant_run()
    csv = per_layer_counts_csv(result)
    assert csv == "layer,count\n1,4\n"
