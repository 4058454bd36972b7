import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lips.dataset import CategoricalDataset, encode_dummies
from lips.patterns import (
    Pattern,
    all_patterns,
    dissimilarity,
    evaluate,
    format_pattern,
    incompatible,
    is_subinteraction,
    mcd,
    parse_pattern,
    support_counts,
    support_matrix,
)

from conftest import binary_vars, make_dataset

A, B, C, D = range(4)
VARS = binary_vars("ABCD")


def P(*terms):
    return Pattern.of(*terms)


@st.composite
def patterns(draw, p=8, m=4):
    vars_ = draw(st.lists(st.integers(0, p - 1), unique=True, max_size=p))
    return Pattern(tuple((v, draw(st.integers(0, m - 1))) for v in vars_))


def test_canonical_form():
    assert P((B, 0), (A, 1)) == P((A, 1), (B, 0))
    assert P((B, 0), (A, 1)).terms == ((A, 1), (B, 0))
    with pytest.raises(ValueError):
        P((A, 0), (A, 1))


def test_subinteraction_examples():
    assert is_subinteraction(P((A, 0)), P((A, 0), (B, 0)))
    assert is_subinteraction(Pattern(), P((C, 1)))
    assert not is_subinteraction(P((A, 0)), P((A, 1), (B, 0)))


def test_mcd_examples():
    t = P((A, 0), (B, 0), (C, 0))
    assert mcd(t, P((A, 0), (B, 0), (C, 1))) == P((A, 0), (B, 0))
    assert mcd(t, t) == t
    assert mcd(t, Pattern()) == Pattern()


def test_incompatible_examples():
    assert incompatible(P((A, 0)), P((A, 1)))
    assert not incompatible(P((A, 0)), P((B, 0)))
    assert not incompatible(P((A, 0), (B, 1)), P((A, 0), (C, 1)))


def test_compatible_pair_is_realisable():
    # a row carrying both patterns' levels makes their product non-zero
    ds = CategoricalDataset(VARS, [[0, 1, 1, 0], [1, 1, 1, 0]], [1, 0])
    dm = encode_dummies(ds)
    prod = evaluate(P((A, 0), (B, 1)), dm) & evaluate(P((A, 0), (C, 1)), dm)
    assert prod.any()


def test_triangle_inequality_fails_on_triple():
    T = P((A, 0), (B, 0), (C, 0))
    S = P((A, 0), (B, 0), (C, 1))
    Z = P((A, 0), (B, 0))
    assert dissimilarity(T, S) == 3
    assert dissimilarity(T, Z) == 1
    assert dissimilarity(Z, S) == 1
    assert dissimilarity(T, S) > dissimilarity(T, Z) + dissimilarity(Z, S)


@settings(max_examples=300, deadline=None)
@given(patterns(), patterns())
def test_semi_metric_laws(t, s):
    d = dissimilarity(t, s)
    assert d >= 0
    assert (d == 0) == (t == s)
    assert d == dissimilarity(s, t)
    assert dissimilarity(t, t) == 0


@settings(max_examples=200, deadline=None)
@given(patterns(), patterns())
def test_mcd_is_common_subinteraction(t, s):
    c = mcd(t, s)
    assert is_subinteraction(c, t) and is_subinteraction(c, s)
    assert len(c) <= min(len(t), len(s))


@settings(max_examples=100, deadline=None)
@given(patterns(p=5, m=3), patterns(p=5, m=3), st.integers(0, 2**32 - 1))
def test_incompatible_product_is_zero(t, s, seed):
    ds = make_dataset(np.random.default_rng(seed), 40, (3,) * 5)
    dm = encode_dummies(ds)
    if incompatible(t, s):
        assert not (evaluate(t, dm) & evaluate(s, dm)).any()


def test_evaluate_examples():
    vs = binary_vars("AB")
    ds = CategoricalDataset(vs, [[0, 0], [0, 1]], [1, 0])
    dm = encode_dummies(ds)
    assert evaluate(P((A, 0), (B, 0)), dm).tolist() == [True, False]
    assert evaluate(Pattern(), dm).all()


def test_evaluate_against_row_loop(rng):
    ds = make_dataset(rng, 20, (2, 3, 2, 4))
    dm = encode_dummies(ds)
    for t in list(all_patterns(ds.level_counts, 3))[::7]:
        expect = [all(ds.rows[i, v] == l for v, l in t.terms) for i in range(ds.n)]
        assert evaluate(t, dm).tolist() == expect


def test_support_matrix_small_cases(backend):
    ds = CategoricalDataset(binary_vars("A"), [[0], [1]], [1, 0])
    assert support_matrix([P((A, 0))], encode_dummies(ds), backend=backend)[:, 0].tolist() == [True, False]

    ds = CategoricalDataset(binary_vars("AB"), [[0, 0], [1, 0], [1, 1]], [1, 0, 0])
    dm = encode_dummies(ds)
    pats = [P((A, 0), (B, 0)), P((A, 1)), Pattern()]
    sm = support_matrix(pats, dm, backend=backend)
    for k, t in enumerate(pats):
        assert np.array_equal(sm[:, k], evaluate(t, dm))
    assert sm[:, 2].all()


def test_support_matrix_exhaustive_binary(backend):
    # every pattern over p=6 binary variables on every one of the 64 rows
    rows = np.array(list(itertools.product((0, 1), repeat=6)))
    y = np.zeros(64, dtype=int)
    y[0] = 1
    ds = CategoricalDataset(binary_vars("ABCDEF"), rows, y)
    dm = encode_dummies(ds)
    pats = [Pattern()] + list(all_patterns(ds.level_counts))
    sm = support_matrix(pats, dm, backend=backend)
    expect = np.column_stack([evaluate(t, dm) for t in pats])
    assert np.array_equal(sm, expect)
    assert np.array_equal(support_counts(pats, dm, backend=backend), expect.sum(axis=0))


def test_support_matrix_needs_patterns(rng):
    dm = encode_dummies(make_dataset(rng, 5, (2,)))
    with pytest.raises(ValueError):
        support_matrix([], dm)
    with pytest.raises(IndexError):
        support_matrix([P((0, 5))], dm)


def test_text_form_round_trip():
    t = P((B, 1), (A, 0))
    assert format_pattern(t, VARS) == "A=0&B=1"
    assert parse_pattern("A=0&B=1", VARS) == t
    assert format_pattern(Pattern(), VARS) == "⊤"
    assert parse_pattern("⊤", VARS) == Pattern()
    assert format_pattern(t) == "X0=0&X1=1"
    with pytest.raises(ValueError):
        parse_pattern("Q=0", VARS)
    with pytest.raises(ValueError):
        parse_pattern("A=7", VARS)


def test_all_patterns_count():
    # each of 3 binary variables is absent or takes one of 2 levels: 3^3 - 1
    assert len(list(all_patterns((2, 2, 2)))) == 26
    assert len(list(all_patterns((2, 2, 2), max_len=1))) == 6
    assert Pattern.of((0, 1), (2, 0)).order == 1
