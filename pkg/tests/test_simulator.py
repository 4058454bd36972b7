import math

import numpy as np
import pytest

from lips import simulator
from lips.patterns import Pattern
from lips.simulator import (
    TilingConfig,
    draw_tiles,
    exact_prior,
    feature_table,
    generate,
    generate_with_prior,
    pattern_tiles,
    tile_centroid,
    tile_features,
    tile_index,
    tile_name,
)

DEFAULT_NOISY_PRIOR = 0.26164062499999996


def test_centroids_and_features():
    ur_n = tile_index("UR", "N")
    assert tile_centroid(ur_n) == pytest.approx((0.75, 11 / 12))
    assert tile_features(ur_n) == (1, 1, 0, 0, 1)
    ll_s = tile_index("LL", "S")
    assert tile_centroid(ll_s) == pytest.approx((0.25, 1 / 12))
    assert tile_features(ll_s) == (0, 0, 1, 1, 1)
    ll_n = tile_index("LL", "N")
    assert tile_centroid(ll_n) == pytest.approx((0.25, 5 / 12))
    assert tile_features(ll_n) == (0, 0, 0, 1, 0)


def test_tiles_partition_the_square():
    # 16 triangles of area 1/16 each
    areas = []
    for t in range(16):
        (x1, y1), (x2, y2), (x3, y3) = simulator.tile_vertices(t)
        areas.append(abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)) / 2)
    assert areas == pytest.approx([1 / 16] * 16)
    with pytest.raises(ValueError):
        simulator.tile_vertices(16)


def test_feature_table_properties():
    table = feature_table()
    assert len({tuple(r) for r in table}) == 16
    assert (table[:, 4] == 0).sum() == 8
    r, u, a = table[:, 0], table[:, 1], table[:, 3]
    assert not ((r == 1) & (u == 1) & (a == 1)).any()
    assert [tile_name(tile_index(q, o)) for q in ("LL", "UR") for o in "NS"] == ["LL-N", "LL-S", "UR-N", "UR-S"]


def test_default_red_tiles_have_no_main_effects():
    table = feature_table()
    for pair in (simulator.DEFAULT_RED_LEFT, simulator.DEFAULT_RED_RIGHT):
        assert (table[pair[0]] + table[pair[1]] == 1).all()


def test_generated_rows_obey_geometry():
    ds = generate(TilingConfig(n=5000, seed=1))
    rows = ds.rows
    for side in (0, 5):
        r, u, a = rows[:, side], rows[:, side + 1], rows[:, side + 3]
        assert not ((r == 1) & (u == 1) & (a == 1)).any()
    assert {tuple(r) for r in rows[:, :5]} <= {tuple(r) for r in feature_table()}


def test_prior_constants():
    assert exact_prior(TilingConfig()) == pytest.approx((0.234375, DEFAULT_NOISY_PRIOR), abs=1e-15)
    assert exact_prior(TilingConfig(red_left=(), red_right=(), p_tilde=0, q_tilde=0)) == (0.0, 0.0)
    assert 1 - (14 / 16) ** 2 == 0.234375


def test_empty_red_sets_give_pure_noise():
    ds = generate(TilingConfig(n=20_000, red_left=(), red_right=(), seed=2))
    rate = ds.outcome.mean()
    assert abs(rate - 0.05) < 3 * math.sqrt(0.05 * 0.95 / 20_000)


def test_monte_carlo_matches_closed_form():
    n = 1_000_000
    _, _, y = draw_tiles(TilingConfig(n=n, seed=7))
    p = exact_prior(TilingConfig())[1]
    assert abs(y.mean() - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_reproducible():
    a = generate(TilingConfig(n=1000, seed=4))
    b = generate(TilingConfig(n=1000, seed=4))
    c = generate(TilingConfig(n=1000, seed=5))
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.outcome, b.outcome)
    assert not np.array_equal(a.rows, c.rows)


def test_blocks_are_prefix_stable():
    # a longer run extends a shorter one with the same seed
    short = draw_tiles(TilingConfig(n=simulator.BLOCK_ROWS + 10, seed=3))
    long = draw_tiles(TilingConfig(n=2 * simulator.BLOCK_ROWS + 5, seed=3))
    assert np.array_equal(short[0][: simulator.BLOCK_ROWS], long[0][: simulator.BLOCK_ROWS])


def test_config_validation():
    for bad in (dict(n=-1), dict(red_left=(16,)), dict(p_tilde=1.0), dict(q_tilde=-0.1)):
        with pytest.raises(ValueError):
            TilingConfig(**bad)


@pytest.mark.parametrize("p1", [0.05, 0.4])
def test_generate_with_prior(p1):
    ds = generate_with_prior(TilingConfig(n=2000, seed=6), p1)
    assert ds.n == 2000
    assert ds.outcome.sum() == round(p1 * 2000)


def test_generate_with_prior_keeps_class_profiles():
    base = generate(TilingConfig(n=40_000, seed=8))
    mixed = generate_with_prior(TilingConfig(n=40_000, seed=8), 0.1)
    for cls in (0, 1):
        f_base = base.rows[base.outcome == cls].mean(axis=0)
        f_mix = mixed.rows[mixed.outcome == cls].mean(axis=0)
        assert np.abs(f_base - f_mix).max() < 0.04


def test_unattainable_prior():
    with pytest.raises(ValueError):
        generate_with_prior(TilingConfig(n=100), 0.001)
    with pytest.raises(ValueError):
        generate_with_prior(TilingConfig(n=100, red_left=(), red_right=(), q_tilde=0.0), 0.2)


def test_pattern_tiles():
    # R1=0 & U1=0: the lower-left quadrant on the left square, anything on the right
    tiles = pattern_tiles(Pattern.of((0, 0), (1, 0)))
    assert tiles["left"] == ["LL-N", "LL-S", "LL-E", "LL-W"]
    assert len(tiles["right"]) == 16
