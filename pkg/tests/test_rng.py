import numpy as np
import pytest

from stochcorr.rng import RngStream, as_generator


def test_same_stream_reproduces():
    a = RngStream(42, 3).generator().standard_normal(5)
    b = RngStream(42, 3).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_streams_and_children_differ():
    base = RngStream(42)
    draws = [s.generator().random(4) for s in (base, RngStream(42, 1), base.child(0), base.child(1))]
    for i in range(len(draws)):
        for j in range(i):
            assert not np.array_equal(draws[i], draws[j])


def test_child_path_is_stable():
    assert RngStream(7).child(2).child(5) == RngStream(7, 0, (2, 5))


def test_as_generator_accepts_all_forms():
    gen = np.random.default_rng(1)
    assert as_generator(gen) is gen
    assert isinstance(as_generator(RngStream(1)), np.random.Generator)
    np.testing.assert_array_equal(as_generator(9).random(3), np.random.default_rng(9).random(3))


def test_rejects_bad_seed():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(1, -2)
