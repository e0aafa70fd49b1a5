"""Core bridge representation, flips, and serialization."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wasep import model


def random_bridge(rng, N):
    inc = np.array([1] * N + [-1] * N)
    rng.shuffle(inc)
    S = np.concatenate([[0], np.cumsum(inc)])
    return S.astype(model.HEIGHT_DTYPE)


bridge_strategy = st.integers(min_value=1, max_value=12).flatmap(
    lambda n: st.permutations([1] * n + [-1] * n))


def test_make_params_example():
    p = model.make_params(8, 0.5)
    assert p.gamma == pytest.approx(0.5)
    assert p.p / (1 - p.p) == pytest.approx(np.exp(1.0))
    assert 0.5 < p.p < 1.0


def test_make_params_constants_consistency():
    for N, alpha in [(4, 0.3), (64, 0.5), (200, 0.9)]:
        p = model.make_params(N, alpha)
        n2 = 2 * N
        assert p.gamma == pytest.approx(2.0 * n2 ** (-alpha), rel=1e-14)
        assert p.gamma == pytest.approx(0.5 * np.log(p.p / (1 - p.p)), rel=1e-12)
        assert p.c == pytest.approx(n2 ** (4 * alpha) / (np.exp(p.gamma) + np.exp(-p.gamma)), rel=1e-13)
        assert p.lam == pytest.approx(p.c * (np.exp(p.gamma) - 2 + np.exp(-p.gamma)), rel=1e-10)


def test_make_params_validation():
    with pytest.raises(ValueError):
        model.make_params(0, 0.5)
    with pytest.raises(ValueError):
        model.make_params(4, 0.0)
    with pytest.raises(ValueError):
        model.make_params(4, 1.0)


def test_flat_and_maximal():
    S = model.flat_initial(2)
    assert list(S) == [0, 1, 0, 1, 0]
    assert model.is_valid_bridge(S)
    M = model.maximal_initial(3)
    assert list(M) == [0, 1, 2, 3, 2, 1, 0]
    assert model.area(M) == 9


def test_is_valid_bridge():
    assert model.is_valid_bridge(np.array([0, 1, 0]))
    assert not model.is_valid_bridge(np.array([0, 1, 1]))
    assert not model.is_valid_bridge(np.array([0, 1, 2]))
    assert not model.is_valid_bridge(np.array([1, 0, 1]))


def test_occupation_round_trip_example():
    S = np.array([0, 1, 0, 1, 0])
    eta = model.height_to_occupation(S)
    assert list(eta) == [1, 0, 1, 0]
    back = model.occupation_to_height(eta)
    assert np.array_equal(back, S)


def test_occupation_requires_balance():
    with pytest.raises(ValueError):
        model.occupation_to_height(np.array([1, 1, 1, 0]))
    with pytest.raises(ValueError):
        model.occupation_to_height(np.array([1, 0, 1]))


@given(bridge_strategy)
def test_occupation_round_trip_property(incs):
    S = np.concatenate([[0], np.cumsum(incs)]).astype(model.HEIGHT_DTYPE)
    eta = model.height_to_occupation(S)
    assert int(eta.sum()) == len(incs) // 2
    assert np.array_equal(model.occupation_to_height(eta), S)


def test_flip_involution_and_area():
    rng = np.random.default_rng(0)
    for _ in range(50):
        S = random_bridge(rng, 6)
        down, up = model.corner_sets(S)
        for k in np.concatenate([down, up]):
            S2 = model.flip(S, int(k))
            assert model.is_valid_bridge(S2)
            assert abs(model.area(S2) - model.area(S)) == 2
            assert np.array_equal(model.flip(S2, int(k)), S)


def test_flip_rejects_straight_site():
    S = model.maximal_initial(3)
    with pytest.raises(model.NoCornerError):
        model.flip(S, 1)


def test_corner_sets_flat():
    S = model.flat_initial(2)
    down, up = model.corner_sets(S)
    assert list(down) == [2]
    assert list(up) == [1, 3]


def test_discrete_laplacian():
    S = model.flat_initial(2)
    assert model.discrete_laplacian(S, 1) == -2
    assert model.discrete_laplacian(S, 2) == 2
    assert model.discrete_laplacian(model.maximal_initial(2), 1) == 0


def test_bridge_csv_round_trip():
    rng = np.random.default_rng(1)
    S = random_bridge(rng, 5)
    row = model.bridge_to_csv_row(S)
    assert np.array_equal(model.bridge_from_csv_row(row), S)


@settings(deadline=None)
@given(bridge_strategy)
def test_hex_round_trip_property(incs):
    S = np.concatenate([[0], np.cumsum(incs)]).astype(model.HEIGHT_DTYPE)
    eta = model.height_to_occupation(S)
    text = model.occupation_to_hex(eta)
    assert np.array_equal(model.occupation_from_hex(text, len(eta)), eta)


def test_detailed_balance_identity():
    """log of the stationary weight ratio equals log of the rate ratio."""
    p = model.make_params(16, 0.5)
    rng = np.random.default_rng(2)
    for _ in range(200):
        S = random_bridge(rng, p.N)
        down, up = model.corner_sets(S)
        for k in down[:2]:
            S2 = model.flip(S, int(k))
            lhs = p.gamma * (model.area(S2) - model.area(S))
            rhs = np.log(p.p / (1 - p.p))
            assert abs(lhs - rhs) < 1e-12
