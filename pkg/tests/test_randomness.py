import numpy as np
import pytest

from oriented_walks.randomness import StreamKey, StreamRegistry, derive_stream, label, standard_normal


def test_same_key_same_draws():
    a = derive_stream(StreamKey(42, (1, 2, 3))).random(100)
    b = derive_stream(StreamKey(42, (1, 2, 3))).random(100)
    np.testing.assert_array_equal(a, b)


def test_last_label_changes_draws():
    a = derive_stream(42, 1, 2, 3).random(100)
    b = derive_stream(42, 1, 2, 4).random(100)
    assert not np.array_equal(a, b)


def test_seed_changes_draws():
    assert derive_stream(1, 0).random() != derive_stream(2, 0).random()


def test_child_matches_flat_path():
    key = StreamKey(7, ("exp",))
    np.testing.assert_array_equal(derive_stream(key.child(5, "walk")).integers(0, 1 << 60, 10),
                                  derive_stream(7, "exp", 5, "walk").integers(0, 1 << 60, 10))


def test_string_labels_are_stable():
    assert label("walk") == label("walk")
    assert label("walk") != label("env")
    assert label(-1) == (1 << 64) - 1


def test_sibling_streams_uncorrelated():
    a = derive_stream(9, "exp", 0).random(10 ** 6)
    b = derive_stream(9, "exp", 1).random(10 ** 6)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(10 ** 6)


def test_advancing_one_stream_leaves_other_alone():
    a, b = derive_stream(3, 0), derive_stream(3, 1)
    first = b.random(5)
    a.random(1000)
    np.testing.assert_array_equal(first, derive_stream(3, 1).random(5))
    assert a.random() != derive_stream(3, 0).random()


def test_standard_normal_moments():
    z = standard_normal(derive_stream(11, "normal"), 10 ** 6)
    assert abs(z.mean()) < 0.004
    assert abs(z.var() - 1) < 0.006


def test_standard_normal_is_function_of_state():
    assert standard_normal(derive_stream(5, 1)) == standard_normal(derive_stream(5, 1))
    assert standard_normal(derive_stream(5, 1)) != standard_normal(derive_stream(5, 2))


def test_registry_rejects_reuse():
    reg = StreamRegistry(1)
    reg.derive("env", 0)
    reg.derive("env", 1)
    with pytest.raises(ValueError):
        reg.derive("env", 0)
    assert len(reg) == 2


def test_registry_paths_unique_over_experiment():
    reg = StreamRegistry(1)
    reg.register_all(("replicate", r, role) for r in range(2000) for role in ("env", "walk"))
    assert len(reg) == 4000
