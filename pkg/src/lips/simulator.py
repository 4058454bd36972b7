"""Synthetic two-tiling datasets.

Each of the two unit squares is cut into four quadrant sub-squares, and
each sub-square into four triangles by its diagonals, giving 16 tiles. A
row draws one tile from each square; its ten binary features describe the
two tile positions and its label says whether either tile is red, with
some label noise on top.

Tile index = 4 * quadrant + orientation, quadrants ordered LL, LR, UL, UR
and orientations N, S, E, W (the triangle leaning on the sub-square's top,
bottom, right and left edge respectively).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dataset import CategoricalDataset, Variable

QUADRANTS = ("LL", "LR", "UL", "UR")
ORIENTATIONS = ("N", "S", "E", "W")
FEATURES = ("R", "U", "D", "A", "O")
N_TILES = 16
BLOCK_ROWS = 1 << 16

# Point-reflected pairs: every one of the five features is 1 on exactly one
# tile of each pair, so no single feature carries any marginal signal.
DEFAULT_RED_LEFT = (4 * 0 + 1, 4 * 3 + 3)   # LL-S, UR-W
DEFAULT_RED_RIGHT = (4 * 1 + 1, 4 * 2 + 2)  # LR-S, UL-E


def tile_index(quadrant: str, orientation: str) -> int:
    return 4 * QUADRANTS.index(quadrant) + ORIENTATIONS.index(orientation)


def tile_name(index: int) -> str:
    return f"{QUADRANTS[index // 4]}-{ORIENTATIONS[index % 4]}"


def tile_vertices(index: int) -> np.ndarray:
    """Triangle vertices: the two corners of one sub-square edge plus its centre."""
    if not 0 <= index < N_TILES:
        raise ValueError(f"tile index {index} outside 0..15")
    q, o = divmod(index, 4)
    x0, y0 = 0.5 * (q % 2), 0.5 * (q // 2)
    x1, y1 = x0 + 0.5, y0 + 0.5
    centre = (x0 + 0.25, y0 + 0.25)
    edge = {
        0: ((x0, y1), (x1, y1)),  # N
        1: ((x0, y0), (x1, y0)),  # S
        2: ((x1, y0), (x1, y1)),  # E
        3: ((x0, y0), (x0, y1)),  # W
    }[o]
    return np.array([edge[0], edge[1], centre])


def tile_centroid(index: int) -> tuple[float, float]:
    x, y = tile_vertices(index).mean(axis=0)
    return float(x), float(y)


def tile_features(index: int) -> tuple[int, int, int, int, int]:
    """(R, U, D, A, O) of a tile, evaluated at its centroid.

    R: right half. U: upper half. D: below the diagonal (0,0)-(1,1).
    A: below the anti-diagonal (0,1)-(1,0). O: outside the inner rotated
    square whose vertices are the edge midpoints.
    """
    x, y = tile_centroid(index)
    return (
        int(x > 0.5),
        int(y > 0.5),
        int(y < x),
        int(y < 1.0 - x),
        int(abs(x - 0.5) + abs(y - 0.5) > 0.5),
    )


@lru_cache(maxsize=1)
def feature_table() -> np.ndarray:
    """16 x 5 table of tile features."""
    return np.array([tile_features(i) for i in range(N_TILES)], dtype=np.int8)


@dataclass(frozen=True)
class TilingConfig:
    n: int = 10_000
    red_left: tuple[int, ...] = DEFAULT_RED_LEFT
    red_right: tuple[int, ...] = DEFAULT_RED_RIGHT
    p_tilde: float = 0.005
    q_tilde: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "red_left", tuple(sorted(set(int(t) for t in self.red_left))))
        object.__setattr__(self, "red_right", tuple(sorted(set(int(t) for t in self.red_right))))
        if self.n < 0:
            raise ValueError("n must be non-negative")
        for t in self.red_left + self.red_right:
            if not 0 <= t < N_TILES:
                raise ValueError(f"red tile {t} outside 0..15")
        for name in ("p_tilde", "q_tilde"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")


VARIABLES = tuple(Variable(f"{f}{side}", ("0", "1")) for side in (1, 2) for f in FEATURES)


def _draw_block(cfg: TilingConfig, block: int, size: int):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(block,)))
    left = rng.integers(0, N_TILES, size)
    right = rng.integers(0, N_TILES, size)
    u = rng.random(size)
    return left, right, u


def draw_tiles(cfg: TilingConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Left tiles, right tiles and noisy labels for ``cfg.n`` rows.

    Rows are generated in fixed-size blocks, each from its own stream keyed
    by ``(seed, block)``, so the output does not depend on how blocks are
    scheduled.
    """
    lefts, rights, us = [], [], []
    for block, start in enumerate(range(0, cfg.n, BLOCK_ROWS)):
        l, r, u = _draw_block(cfg, block, min(BLOCK_ROWS, cfg.n - start))
        lefts.append(l)
        rights.append(r)
        us.append(u)
    if cfg.n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty.astype(np.int8)
    left, right, u = np.concatenate(lefts), np.concatenate(rights), np.concatenate(us)
    red_l = np.isin(left, cfg.red_left)
    red_r = np.isin(right, cfg.red_right)
    raw = red_l | red_r
    flip = np.where(red_l & red_r, u < cfg.p_tilde, u < cfg.q_tilde)
    y = (raw ^ flip).astype(np.int8)
    return left, right, y


def features_of(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    table = feature_table()
    return np.hstack([table[left], table[right]]).astype(np.int32)


def generate(cfg: TilingConfig) -> CategoricalDataset:
    left, right, y = draw_tiles(cfg)
    return CategoricalDataset(VARIABLES, features_of(left, right), y, ("0", "1"))


def generate_with_prior(cfg: TilingConfig, p1: float, *, max_rounds: int = 1000) -> CategoricalDataset:
    """``cfg.n`` rows with exactly ``round(p1 * n)`` positives.

    Rows are drawn from the usual generator and accepted per class until
    both class quotas are filled, which keeps each class's feature
    distribution intact; the result is shuffled.
    """
    n1 = int(np.floor(p1 * cfg.n + 0.5))
    n0 = cfg.n - n1
    if not 0.0 < p1 < 1.0 or n1 < 2 or n0 < 2:
        raise ValueError(f"class mix p1={p1} unattainable at n={cfg.n}")
    _, noisy = exact_prior(cfg)
    if noisy <= 0.0 or noisy >= 1.0:
        raise ValueError("generator never produces one of the classes")
    pos, neg = [], []
    have1 = have0 = 0
    for round_ in range(max_rounds):
        need = max(n1 - have1, 0) / noisy + max(n0 - have0, 0) / (1 - noisy)
        batch = TilingConfig(
            n=int(need * 1.2) + 64,
            red_left=cfg.red_left,
            red_right=cfg.red_right,
            p_tilde=cfg.p_tilde,
            q_tilde=cfg.q_tilde,
            seed=int(np.random.SeedSequence((cfg.seed, round_)).generate_state(1)[0]),
        )
        left, right, y = draw_tiles(batch)
        X = features_of(left, right)
        if have1 < n1:
            take = X[y == 1][: n1 - have1]
            pos.append(take)
            have1 += len(take)
        if have0 < n0:
            take = X[y == 0][: n0 - have0]
            neg.append(take)
            have0 += len(take)
        if have1 == n1 and have0 == n0:
            break
    else:
        raise ValueError("rejection sampling did not fill the class quotas")
    X = np.vstack(pos + neg)
    y = np.concatenate([np.ones(n1, np.int8), np.zeros(n0, np.int8)])
    order = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xB1A5))).permutation(cfg.n)
    return CategoricalDataset(VARIABLES, X[order], y[order], ("0", "1"))


def pattern_tiles(pattern) -> dict[str, list[str]]:
    """Names of the left and right tiles a pattern over ``VARIABLES`` covers."""
    table = feature_table()
    out = {}
    for side, offset in (("left", 0), ("right", len(FEATURES))):
        keep = np.ones(N_TILES, dtype=bool)
        for var, level in pattern.terms:
            if offset <= var < offset + len(FEATURES):
                keep &= table[:, var - offset] == int(VARIABLES[var].levels[level])
        out[side] = [tile_name(i) for i in np.flatnonzero(keep)]
    return out


def exact_prior(cfg: TilingConfig) -> tuple[float, float]:
    """Positive rate before and after label noise, in closed form."""
    a = len(cfg.red_left) / N_TILES
    b = len(cfg.red_right) / N_TILES
    raw = 1.0 - (1.0 - a) * (1.0 - b)
    both = a * b
    one = a * (1.0 - b) + (1.0 - a) * b
    neither = (1.0 - a) * (1.0 - b)
    noisy = both * (1.0 - cfg.p_tilde) + one * (1.0 - cfg.q_tilde) + neither * cfg.q_tilde
    return raw, noisy
