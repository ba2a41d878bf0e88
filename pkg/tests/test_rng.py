import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from girgfpp.rng import derive_seed, keyed_uniform, pair_uniform_nb, stream


def test_streams_reproducible_and_distinct():
    a = stream(1, "x", 3).random(5)
    np.testing.assert_array_equal(a, stream(1, "x", 3).random(5))
    assert not np.array_equal(a, stream(1, "x", 4).random(5))
    assert derive_seed(1, "a") == derive_seed(1, "a") != derive_seed(1, "b")
    assert 0 <= derive_seed(5, "z") < 2**63


@given(st.integers(0, 2**62), st.lists(st.integers(0, 2**40), min_size=2, max_size=30))
def test_pair_keys_symmetric_and_in_unit_interval(seed, ids):
    a = np.array(ids[: len(ids) // 2])
    b = np.array(ids[len(ids) // 2: 2 * (len(ids) // 2)])
    u = keyed_uniform(seed, a, b, salt=1)
    np.testing.assert_array_equal(u, keyed_uniform(seed, b, a, salt=1))
    assert np.all((u > 0) & (u < 1))
    for x, y, val in zip(a, b, u):
        assert pair_uniform_nb(seed, 1, int(x), int(y)) == val


def test_keyed_uniform_roughly_uniform():
    u = keyed_uniform(9, np.arange(200_000), salt=2)
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(np.mean(u < 0.1) - 0.1) < 0.005
