"""Token-matrix pooling: the four strategies and their invariants."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tadbench.pooling import POOLING_STRATEGIES, TokenMatrix, pool

TOKENS = np.array(
    [
        [1.0, 10.0],
        [2.0, 20.0],
        [3.0, 30.0],
        [4.0, 40.0],
    ]
)


def token_matrices(max_t=8, max_d=5):
    """Strategy for valid TokenMatrix instances with at least one real token."""

    @st.composite
    def build(draw):
        t = draw(st.integers(1, max_t))
        d = draw(st.integers(1, max_d))
        tokens = draw(
            hnp.arrays(
                np.float64,
                (t, d),
                elements=st.floats(-1e6, 1e6, allow_nan=False, width=32),
            )
        )
        mask = draw(hnp.arrays(np.bool_, (t,)))
        if not mask.any():
            mask[draw(st.integers(0, t - 1))] = True
        return TokenMatrix(tokens, mask)

    return build()


class TestStrategies:
    def test_mean(self):
        np.testing.assert_allclose(pool(TokenMatrix(TOKENS), "mean"), [2.5, 25.0])

    def test_mean_respects_mask(self):
        tm = TokenMatrix(TOKENS, mask=[True, True, False, False])
        np.testing.assert_allclose(pool(tm, "mean"), [1.5, 15.0])

    def test_eos_is_last_unmasked(self):
        tm = TokenMatrix(TOKENS, mask=[True, True, True, False])
        np.testing.assert_array_equal(pool(tm, "eos"), [3.0, 30.0])

    def test_cls_ignores_mask(self):
        tm = TokenMatrix(TOKENS, mask=[False, True, True, True])
        np.testing.assert_array_equal(pool(tm, "cls"), [1.0, 10.0])

    def test_weighted_mean_weights_later_tokens_more(self):
        tm = TokenMatrix(np.array([[0.0], [3.0]]))
        # weights 1/3 and 2/3
        np.testing.assert_allclose(pool(tm, "weighted_mean"), [2.0])

    def test_weighted_mean_masked(self):
        tm = TokenMatrix(TOKENS, mask=[False, True, False, True])
        # unmasked rows 2 and 4 get weights 1/3, 2/3
        np.testing.assert_allclose(pool(tm, "weighted_mean"), [10.0 / 3, 100.0 / 3])

    def test_unknown_strategy(self):
        with pytest.raises(ValueError, match="unknown pooling"):
            pool(TokenMatrix(TOKENS), "max")


class TestValidation:
    def test_all_masked_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            TokenMatrix(TOKENS, mask=[False] * 4)

    def test_wrong_mask_length(self):
        with pytest.raises(ValueError, match="mask shape"):
            TokenMatrix(TOKENS, mask=[True, False])

    def test_non_finite_tokens(self):
        with pytest.raises(ValueError, match="non-finite"):
            TokenMatrix(np.array([[np.nan]]))

    def test_one_dimensional_rejected(self):
        with pytest.raises(ValueError, match="2-D"):
            TokenMatrix(np.zeros(4))

    def test_zero_width_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            TokenMatrix(np.zeros((3, 0)))

    def test_tokens_frozen(self):
        tm = TokenMatrix(TOKENS)
        with pytest.raises(ValueError):
            tm.tokens[0, 0] = 9.0


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(tm=token_matrices())
    def test_output_shape_and_finiteness(self, tm):
        for strategy in POOLING_STRATEGIES:
            out = pool(tm, strategy)
            assert out.shape == (tm.tokens.shape[1],)
            assert np.all(np.isfinite(out))

    @settings(max_examples=60, deadline=None)
    @given(tm=token_matrices())
    def test_mean_and_weighted_stay_in_hull(self, tm):
        real = tm.tokens[tm.mask]
        lo, hi = real.min(axis=0), real.max(axis=0)
        for strategy in ("mean", "weighted_mean"):
            out = pool(tm, strategy)
            assert np.all(out >= lo - 1e-9) and np.all(out <= hi + 1e-9)

    @settings(max_examples=60, deadline=None)
    @given(tm=token_matrices(), seed=st.integers(0, 2**16))
    def test_mean_is_permutation_invariant(self, tm, seed):
        order = np.random.default_rng(seed).permutation(tm.tokens.shape[0])
        shuffled = TokenMatrix(tm.tokens[order], tm.mask[order])
        np.testing.assert_allclose(
            pool(tm, "mean"), pool(shuffled, "mean"), atol=1e-9
        )

    @settings(max_examples=60, deadline=None)
    @given(tm=token_matrices())
    def test_identical_rows_collapse(self, tm):
        row = tm.tokens[np.flatnonzero(tm.mask)[0]]
        uniform = TokenMatrix(np.tile(row, (tm.tokens.shape[0], 1)), tm.mask)
        for strategy in ("mean", "weighted_mean", "eos"):
            np.testing.assert_allclose(pool(uniform, strategy), row, atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(
        d=st.integers(1, 6),
        pad=st.integers(0, 5),
        seed=st.integers(0, 2**16),
    )
    def test_single_real_token_agrees_everywhere(self, d, pad, seed):
        rng = np.random.default_rng(seed)
        tokens = rng.normal(size=(1 + pad, d))
        mask = np.array([True] + [False] * pad)
        tm = TokenMatrix(tokens, mask)
        for strategy in POOLING_STRATEGIES:
            np.testing.assert_allclose(pool(tm, strategy), tokens[0], atol=1e-12)
