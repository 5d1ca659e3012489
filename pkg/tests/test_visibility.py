import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkvis.numtheory import build_tables, sieve_primes
from walkvis.visibility import (
    WatchpointValidationError,
    curve_oracle_visible,
    is_b_visible,
    validate_watchpoint_set,
    visible_mask,
)

BS = [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2)]


def test_examples():
    assert is_b_visible((1, 2), (1, 1), (0, 0))
    assert not is_b_visible((2, 3), (0, 2), (0, 0))  # shared x, gap 2
    assert not is_b_visible((1, 2), (4, 8), (0, 0))  # gcd_b = 2


def test_degenerate_rule():
    for b in BS:
        assert is_b_visible(b, (0, 1), (0, 0))
        assert is_b_visible(b, (5, 3), (5, 2))
        assert not is_b_visible(b, (5, 4), (5, 2))
        assert is_b_visible(b, (7, 2), (6, 2))
        assert not is_b_visible(b, (8, 2), (6, 2))
    with pytest.raises(ValueError):
        is_b_visible((1, 2), (3, 3), (3, 3))


@settings(max_examples=300, deadline=None)
@given(
    st.sampled_from(BS),
    st.integers(-200, 200),
    st.integers(-200, 200),
    st.integers(-200, 200),
    st.integers(-200, 200),
)
def test_visibility_is_mutual(b, px, py, qx, qy):
    if (px, py) == (qx, qy):
        return
    assert is_b_visible(b, (px, py), (qx, qy)) == is_b_visible(b, (qx, qy), (px, py))


def test_oracle_examples():
    assert not curve_oracle_visible((1, 1), (2, 2), (0, 0))  # (1,1) sits on y=x
    assert not curve_oracle_visible((1, 2), (4, 8), (0, 0))
    assert curve_oracle_visible((2, 3), (7, 5), (0, 0))
    assert is_b_visible((2, 3), (7, 5), (0, 0))


def test_oracle_rejects_unsupported_displacements():
    with pytest.raises(ValueError):
        curve_oracle_visible((1, 2), (0, 5), (0, 0))  # degenerate vertical
    with pytest.raises(ValueError):
        curve_oracle_visible((1, 2), (-3, 5), (0, 0))
    with pytest.raises(ValueError):
        curve_oracle_visible((1, 2), (2, 2), (2, 2))


def test_oracle_agrees_on_small_box():
    # fast spot version of the acceptance box-40 sweep
    for b in BS:
        for dx in range(1, 16):
            for dy in range(1, 16):
                assert curve_oracle_visible(b, (dx, dy), (0, 0)) == is_b_visible(
                    b, (dx, dy), (0, 0)
                ), (b, dx, dy)


def test_predicates_depend_only_on_displacement():
    for b in BS:
        for (dx, dy) in [(1, 1), (2, 4), (3, 7), (8, 4), (5, 5)]:
            base = is_b_visible(b, (dx, dy), (0, 0))
            for (tx, ty) in [(3, 9), (-4, 11), (100, -57)]:
                assert is_b_visible(b, (dx + tx, dy + ty), (tx, ty)) == base


def test_origin_density_matches_inv_zeta2():
    n = 500
    xs, ys = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    primes = sieve_primes(2 * math.isqrt(n) + 16)
    vis = visible_mask((1, 1), xs.ravel(), ys.ravel(), primes)
    frac = vis.mean()
    assert abs(frac - 0.607927) < 0.02


def test_visible_mask_matches_scalar():
    primes = sieve_primes(1000)
    state = np.random.default_rng(7)
    for b in BS + [(2, 5), (3, 4)]:
        dx = state.integers(-400, 400, size=300)
        dy = state.integers(-400, 400, size=300)
        keep = ~((dx == 0) & (dy == 0))
        dx, dy = dx[keep], dy[keep]
        mask = visible_mask(b, dx, dy, primes)
        for i in range(len(dx)):
            assert mask[i] == is_b_visible(b, (int(dx[i]), int(dy[i])), (0, 0))


def test_visible_mask_zero_displacement_is_invisible():
    primes = sieve_primes(100)
    mask = visible_mask((1, 2), np.array([0, 0, 1]), np.array([0, 1, 0]), primes)
    assert mask.tolist() == [False, True, True]


def test_validate_watchpoint_set():
    ws = validate_watchpoint_set((1, 2), [(0, 0), (1, 2), (2, 1)])
    assert ws.size == 3

    with pytest.raises(WatchpointValidationError) as exc:
        validate_watchpoint_set((1, 2), [(0, 0), (4, 8)])
    assert exc.value.pair == ((0, 0), (4, 8))

    # 5 points can never satisfy the bound 2**(1+1) = 4
    with pytest.raises(WatchpointValidationError) as exc:
        validate_watchpoint_set((1, 1), [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)])
    assert exc.value.cardinality == 5

    with pytest.raises(WatchpointValidationError):
        validate_watchpoint_set((1, 2), [(0, 0), (0, 0)])
    with pytest.raises(ValueError):
        validate_watchpoint_set((1, 2), [])


def test_validated_sets_respect_cardinality_bound():
    # greedy fill never exceeds 2**(b1+b2)
    for b in [(1, 1), (1, 2)]:
        cap = 2 ** (b[0] + b[1])
        chosen = []
        for x in range(8):
            for y in range(8):
                cand = chosen + [(x, y)]
                try:
                    validate_watchpoint_set(b, cand)
                except WatchpointValidationError:
                    continue
                chosen = cand
        assert len(chosen) <= cap
        assert validate_watchpoint_set(b, chosen).size == len(chosen)
