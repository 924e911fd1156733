import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hazardscreen import (
    DEFAULT_LOGIT_SCALE,
    DimensionMismatch,
    MarginAggregation,
    MissingPromptEmbedding,
    PromptPair,
    ValidationError,
    ZeroVector,
    clip_score,
    l2_normalize,
    margin,
    margin_signal,
)

finite_vectors = hnp.arrays(
    np.float64,
    st.integers(2, 8),
    elements=st.floats(-10.0, 10.0, allow_nan=False),
).filter(lambda v: np.linalg.norm(v) > 1e-6)


def test_normalize_gives_unit_norm():
    v = l2_normalize(np.array([3.0, 4.0]))
    assert np.allclose(v, [0.6, 0.8])
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_normalize_rejects_zero_vector():
    with pytest.raises(ZeroVector):
        l2_normalize(np.zeros(4))
    with pytest.raises(ZeroVector):
        l2_normalize(np.array([1e-13, 0.0]))


def test_normalize_rejects_nonfinite():
    with pytest.raises(ValidationError):
        l2_normalize(np.array([1.0, np.nan]))


@given(finite_vectors)
def test_normalize_is_idempotent(v):
    once = l2_normalize(v)
    twice = l2_normalize(once)
    assert np.allclose(once, twice, atol=1e-12)


def test_clip_score_is_scaled_cosine():
    a = np.array([1.0, 0.0])
    b = np.array([1.0, 1.0])
    expected = 100.0 * np.cos(np.pi / 4)
    assert clip_score(a, b, 100.0) == pytest.approx(expected)


def test_clip_score_identical_direction_hits_scale():
    a = np.array([2.0, 0.0, 0.0])
    b = np.array([5.0, 0.0, 0.0])
    assert clip_score(a, b, DEFAULT_LOGIT_SCALE) == pytest.approx(100.0)


def test_clip_score_ignores_input_magnitude():
    a = np.array([0.3, -1.2, 0.4])
    b = np.array([1.1, 0.2, -0.7])
    assert clip_score(7.0 * a, b, 50.0) == pytest.approx(
        clip_score(a, 0.01 * b, 50.0)
    )


def test_clip_score_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        clip_score(np.ones(3), np.ones(4), 100.0)


@pytest.mark.parametrize("scale", [0.0, -1.0, np.inf, np.nan])
def test_bad_scale_rejected(scale):
    with pytest.raises(ValidationError):
        clip_score(np.ones(2), np.ones(2), scale)


def test_margin_is_plain_difference():
    assert margin(21.5, 20.0) == pytest.approx(1.5)
    assert margin(3.0, 7.0) == pytest.approx(-4.0)


def _toy_embeddings():
    return {
        "hazard one": np.array([1.0, 0.0, 0.0]),
        "hazard two": np.array([0.0, 1.0, 0.0]),
        "benign one": np.array([0.0, 0.0, 1.0]),
        "benign two": np.array([1.0, 1.0, 0.0]),
    }


def _cross_product_margins(frame, pair, embeddings, scale, agg):
    """Explicit double loop over phrasing combinations."""
    combos = []
    for p in pair.positive:
        for n in pair.negative:
            combos.append(
                clip_score(frame, embeddings[p], scale)
                - clip_score(frame, embeddings[n], scale)
            )
    return max(combos) if agg is MarginAggregation.MAX else float(np.mean(combos))


@pytest.mark.parametrize("agg", list(MarginAggregation))
def test_margin_signal_matches_cross_product_loop(agg):
    embeddings = _toy_embeddings()
    pair = PromptPair(
        category="c",
        positive=("hazard one", "hazard two"),
        negative=("benign one", "benign two"),
        aggregation=agg,
    )
    rng = np.random.default_rng(11)
    frames = rng.normal(size=(6, 3))
    out = margin_signal(frames, pair, embeddings, scale=100.0)
    assert out.shape == (6,)
    for i in range(6):
        expected = _cross_product_margins(frames[i], pair, embeddings, 100.0, agg)
        assert out[i] == pytest.approx(expected, abs=1e-9)


def test_margin_signal_single_frame_vector():
    embeddings = _toy_embeddings()
    pair = PromptPair(category="c", positive=("hazard one",), negative=("benign one",))
    out = margin_signal(np.array([1.0, 1.0, 0.0]), pair, embeddings)
    assert out.shape == (1,)
    expected = 100.0 * np.cos(np.pi / 4) - 0.0
    assert out[0] == pytest.approx(expected)


def test_margin_signal_missing_phrasing():
    pair = PromptPair(category="c", positive=("absent",), negative=("benign one",))
    with pytest.raises(MissingPromptEmbedding):
        margin_signal(np.ones((2, 3)), pair, _toy_embeddings())


def test_margin_signal_dim_mismatch():
    embeddings = {"p": np.ones(4), "n": np.ones(3)}
    pair = PromptPair(category="c", positive=("p",), negative=("n",))
    with pytest.raises(DimensionMismatch):
        margin_signal(np.ones((2, 4)), pair, embeddings)


def test_margin_signal_zero_frame_rejected():
    embeddings = _toy_embeddings()
    pair = PromptPair(category="c", positive=("hazard one",), negative=("benign one",))
    frames = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(ZeroVector):
        margin_signal(frames, pair, embeddings)


@given(
    hnp.arrays(
        np.float64,
        st.tuples(st.integers(1, 5), st.just(4)),
        elements=st.floats(-5.0, 5.0, allow_nan=False),
    ).filter(lambda m: np.all(np.linalg.norm(m, axis=1) > 1e-6)),
    st.floats(1.0, 200.0),
)
@settings(max_examples=50, deadline=None)
def test_margin_signal_is_linear_in_scale(frames, scale):
    embeddings = {"p": np.array([1.0, 0.0, 0.0, 0.0]), "n": np.array([0.0, 1.0, 0.0, 0.0])}
    pair = PromptPair(category="c", positive=("p",), negative=("n",))
    base = margin_signal(frames, pair, embeddings, scale=1.0)
    scaled = margin_signal(frames, pair, embeddings, scale=scale)
    assert np.allclose(scaled, scale * base, rtol=1e-9, atol=1e-9)


def test_prompt_pair_needs_both_sides():
    with pytest.raises(ValidationError):
        PromptPair(category="c", positive=(), negative=("n",))
    with pytest.raises(ValidationError):
        PromptPair(category="c", positive=("p",), negative=())
    with pytest.raises(ValidationError):
        PromptPair(category="", positive=("p",), negative=("n",))


def test_max_aggregation_dominates_mean():
    embeddings = _toy_embeddings()
    rng = np.random.default_rng(3)
    frames = rng.normal(size=(8, 3))
    kw = dict(
        category="c",
        positive=("hazard one", "hazard two"),
        negative=("benign one", "benign two"),
    )
    by_max = margin_signal(frames, PromptPair(aggregation=MarginAggregation.MAX, **kw), embeddings)
    by_mean = margin_signal(frames, PromptPair(aggregation=MarginAggregation.MEAN, **kw), embeddings)
    assert np.all(by_max >= by_mean - 1e-12)
