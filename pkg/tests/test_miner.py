import numpy as np
import pytest

from lips.dataset import CategoricalDataset, encode_dummies
from lips.miner import (
    MinedPattern,
    MinerConfig,
    MiningError,
    attach_majority_support,
    brute_force_frequent,
    is_frequent,
    mine,
    mine_candidates,
)
from lips.patterns import Pattern, evaluate, is_subinteraction

from conftest import binary_vars, make_dataset

a, b, c = range(3)


@pytest.fixture
def abc():
    # transactions {a,b}, {a,b,c}, {a,c}: item present = level 1
    ds = CategoricalDataset(binary_vars("abc"), [[1, 1, 0], [1, 1, 1], [1, 0, 1]], [1, 0, 0])
    return encode_dummies(ds)


def as_dict(mined):
    return {m.pattern: m.minority_support for m in mined}


def test_transaction_example(abc):
    got = as_dict(mine(abc, MinerConfig(0.6)))
    expect = {
        Pattern.of((a, 1)): 1.0,
        Pattern.of((b, 1)): 2 / 3,
        Pattern.of((c, 1)): 2 / 3,
        Pattern.of((a, 1), (b, 1)): 2 / 3,
        Pattern.of((a, 1), (c, 1)): 2 / 3,
    }
    assert got == pytest.approx(expect)


def test_full_support_means_every_row(abc):
    assert list(as_dict(mine(abc, MinerConfig(1.0)))) == [Pattern.of((a, 1))]


def test_length_cap(abc):
    got = as_dict(mine(abc, MinerConfig(0.6, max_len=1)))
    assert set(got) == {Pattern.of((a, 1)), Pattern.of((b, 1)), Pattern.of((c, 1))}


def test_threshold_is_strict():
    assert not is_frequent(3, 10, 0.3)
    assert is_frequent(4, 10, 0.3)
    assert is_frequent(10, 10, 1.0)
    assert not is_frequent(9, 10, 1.0)


def test_exact_threshold_not_emitted(abc):
    # b=1 and c=1 sit at exactly 2/3
    got = as_dict(mine(abc, MinerConfig(2 / 3)))
    assert Pattern.of((b, 1)) not in got
    assert Pattern.of((a, 1)) in got


@pytest.mark.parametrize("instance", range(20))
def test_matches_brute_force(instance):
    rng = np.random.default_rng(instance)
    p = int(rng.integers(1, 9))
    ds = make_dataset(rng, int(rng.integers(2, 50)), (2,) * p)
    dm = encode_dummies(ds)
    cfg = MinerConfig(round(float(rng.choice(np.arange(1, 10) / 10)), 1), max_len=[None, 2, 3][instance % 3])
    fast = {m.pattern: m.minority_count for m in mine(dm, cfg)}
    slow = {m.pattern: m.minority_count for m in brute_force_frequent(dm, cfg)}
    assert fast == slow


def test_below_one_over_n_gives_every_occurring_pattern(rng):
    ds = make_dataset(rng, 12, (2, 3, 2))
    dm = encode_dummies(ds)
    got = {m.pattern for m in mine(dm, MinerConfig(1 / 12 - 1e-9))}
    seen = set()
    for row in ds.rows:
        for mask in range(1, 8):
            seen.add(Pattern(tuple((j, int(row[j])) for j in range(3) if mask >> j & 1)))
    assert got == seen


def test_single_row_gives_its_subpatterns(rng):
    ds = make_dataset(rng, 6, (2, 2, 3))
    dm = encode_dummies(ds).subset([2])
    got = {m.pattern for m in mine(dm, MinerConfig(0.5, max_len=2))}
    row = ds.rows[2]
    assert all(is_subinteraction(t, Pattern(tuple(enumerate(row.tolist())))) for t in got)
    assert len(got) == 3 + 3


def test_structural_properties(rng):
    ds = make_dataset(rng, 60, (2, 3, 2, 2, 3))
    dm = encode_dummies(ds)
    cfg = MinerConfig(0.05)
    mined = mine(dm, cfg)
    found = {m.pattern for m in mined}
    for m in mined:
        assert len(set(m.pattern.variables)) == len(m.pattern)
        for drop in range(len(m.pattern)):
            sub = Pattern(m.pattern.terms[:drop] + m.pattern.terms[drop + 1:])
            if len(sub):
                assert sub in found
        assert m.minority_count == evaluate(m.pattern, dm).sum()


def test_empty_rows_rejected(rng):
    dm = encode_dummies(make_dataset(rng, 5, (2,))).subset([])
    with pytest.raises(MiningError):
        mine(dm, MinerConfig())


def test_config_validation():
    for bad in (dict(supp_min=0.0), dict(supp_min=1.5), dict(max_len=0), dict(search_classes="all")):
        with pytest.raises(MiningError):
            MinerConfig(**bad)


def test_majority_support(rng):
    ds = make_dataset(rng, 40, (2, 3, 2))
    dm = encode_dummies(ds)
    maj = dm.subset(np.arange(20, 40))
    pats = [Pattern.of((0, 0)), Pattern.of((0, 1), (1, 2)), Pattern.of((1, 0), (2, 1))]
    out = attach_majority_support([MinedPattern(t, 0.5) for t in pats], maj)
    for m in out:
        col = evaluate(m.pattern, maj)
        assert m.majority_count == col.sum()
        assert m.majority_support == pytest.approx(col.mean())


def test_majority_support_extremes():
    ds = CategoricalDataset(binary_vars("ab"), [[0, 0], [0, 1], [0, 1]], [1, 0, 0])
    dm = encode_dummies(ds)
    out = attach_majority_support([MinedPattern(Pattern.of((0, 1)), 0.1), MinedPattern(Pattern.of((0, 0)), 0.1)], dm)
    assert [m.majority_support for m in out] == [0.0, 1.0]


def test_candidates_both_classes(rng):
    ds = make_dataset(rng, 80, (2, 2, 3, 2))
    dm = encode_dummies(ds)
    one = mine_candidates(dm, ds.outcome, MinerConfig(0.2))
    both = mine_candidates(dm, ds.outcome, MinerConfig(0.2, search_classes="both_classes"))
    assert {m.pattern for m in one} <= {m.pattern for m in both}
    pos = dm.subset(np.flatnonzero(ds.outcome == 1))
    neg = dm.subset(np.flatnonzero(ds.outcome == 0))
    for m in both:
        assert m.minority_count == evaluate(m.pattern, pos).sum()
        assert m.majority_count == evaluate(m.pattern, neg).sum()
