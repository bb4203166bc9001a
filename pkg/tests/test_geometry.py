import numpy as np
import pytest
from hypothesis import given, strategies as st

from framemaps.errors import MinDimension, NotOnFace, ZeroPoint
from framemaps.geometry import (
    ConeId, QuadrantId, cone_of, cone_of_batch, face_chart, face_unchart, inf_norm, quadrant_of,
)

coords = st.floats(-1, 1, allow_nan=False)


def points(n_min=1, n_max=6):
    return st.lists(coords, min_size=n_min, max_size=n_max)


def test_inf_norm_examples():
    assert inf_norm([0.5, -0.25]) == 0.5
    assert inf_norm([0, 0, 0]) == 0
    assert inf_norm([-1, 1, 0.3]) == 1


def test_cone_of_examples():
    assert cone_of([0.8, 0.4, 0.2]) == ConeId(1, 1)
    assert cone_of([-0.9, 0.1]) == ConeId(1, -1)
    assert cone_of([0.5, 0.5, 0.25, 0]) == ConeId(1, 1)
    assert cone_of([0.1, -0.5, 0.5]) == ConeId(2, -1)


def test_cone_of_zero():
    with pytest.raises(ZeroPoint):
        cone_of([0.0, 0.0])


@given(points())
def test_cone_axis_attains_norm(x):
    if not any(x):
        return
    c = cone_of(x)
    assert abs(x[c.axis - 1]) == inf_norm(x)
    assert np.sign(x[c.axis - 1]) == c.sign


def test_cone_index_roundtrip():
    for i in range(10):
        assert ConeId.from_index(i).index == i
    assert ConeId(1, 1).index == 0 and ConeId(1, -1).index == 1 and ConeId(3, -1).index == 5


def test_cone_id_validation():
    with pytest.raises(ValueError):
        ConeId(0, 1)
    with pytest.raises(ValueError):
        ConeId(1, 0)


def test_face_chart_examples():
    assert face_chart(ConeId(1, 1), [1, 0.5, 0.25]).tolist() == [0.5, 0.25]
    assert face_chart(ConeId(2, -1), [0.3, -1]).tolist() == [0.3]
    x = [1, 0.1, 0.2]
    assert face_unchart(ConeId(1, 1), face_chart(ConeId(1, 1), x)).tolist() == x


def test_face_chart_errors():
    with pytest.raises(NotOnFace):
        face_chart(ConeId(1, 1), [0.999, 0.5])
    with pytest.raises(MinDimension):
        face_chart(ConeId(1, 1), [1.0])
    with pytest.raises(MinDimension):
        face_unchart(ConeId(2, 1), [])


def test_face_unchart_examples():
    assert face_unchart(ConeId(1, 1), [0.5, 0.25]).tolist() == [1, 0.5, 0.25]
    assert face_unchart(ConeId(3, -1), [0.1, 0.2]).tolist() == [0.1, 0.2, -1]


@given(points(2, 6), st.data())
def test_chart_roundtrip(x, data):
    n = len(x)
    axis = data.draw(st.integers(1, n))
    sign = data.draw(st.sampled_from([-1, 1]))
    x = list(x)
    x[axis - 1] = float(sign)
    c = ConeId(axis, sign)
    assert face_unchart(c, face_chart(c, x)).tolist() == x


def test_quadrant_examples():
    q = quadrant_of([0.5, 0.25])
    assert q.signs == (1, 1) and q.center.tolist() == [0.5, 0.5]
    q = quadrant_of([-0.1, 0.9, -0.3])
    assert q.signs == (-1, 1, -1) and q.center.tolist() == [-0.5, 0.5, -0.5]
    assert quadrant_of([0, -0.4]).signs == (1, -1)


def test_quadrants_tile_the_face():
    rng = np.random.default_rng(0)
    Y = rng.uniform(-1, 1, (5000, 3))
    centers = [0.5 * np.array(s) for s in np.ndindex(2, 2, 2)]
    centers = [2 * c - 0.5 for c in centers]
    for y in Y:
        hits = sum(np.all(np.abs(y - c) < 0.5) for c in centers)
        assert hits == 1
        assert np.all(np.abs(y - quadrant_of(y).center) <= 0.5)
    for c in centers:
        assert np.max(np.abs(c)) == 0.5


def test_batch_matches_scalar():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, (200, 4))
    axis, sign, r, second = cone_of_batch(X)
    for i, x in enumerate(X):
        c = cone_of(x)
        assert (axis[i] + 1, sign[i]) == (c.axis, c.sign)
        assert r[i] == inf_norm(x)
        assert second[i] == sorted(np.abs(x))[-2]


def test_quadrant_id_center():
    assert QuadrantId((1, -1)).center.tolist() == [0.5, -0.5]
