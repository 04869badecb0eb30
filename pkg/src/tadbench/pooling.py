"""Reduce a token-embedding matrix to a single sentence vector.

Four strategies:

- ``mean``: arithmetic mean of the unmasked rows.
- ``weighted_mean``: position-weighted mean of the unmasked rows; the j-th
  unmasked token (1-indexed) has weight j / (1 + 2 + ... + U). Later tokens
  weigh more.
- ``eos``: the last unmasked row.
- ``cls``: literally the first row of the matrix (mask is not consulted);
  meaningful for encoders that reserve position 0 for a summary token.

With the usual layout of real tokens followed by right padding, a
single-token sequence gives the same vector under all four strategies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POOLING_STRATEGIES: tuple[str, ...] = ("mean", "weighted_mean", "eos", "cls")


@dataclass(frozen=True)
class TokenMatrix:
    """A T×d matrix of token embeddings plus a validity mask.

    ``mask[t]`` is True for real tokens and False for padding. At least one
    token must be real; all values must be finite.
    """

    tokens: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        tokens = np.asarray(self.tokens, dtype=np.float64)
        if tokens.ndim != 2:
            raise ValueError(f"tokens must be 2-D, got shape {tokens.shape}")
        if tokens.shape[1] == 0:
            raise ValueError("token dimension must be positive")
        if not np.all(np.isfinite(tokens)):
            raise ValueError("tokens contain non-finite values")
        if self.mask is None:
            mask = np.ones(tokens.shape[0], dtype=bool)
        else:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != (tokens.shape[0],):
                raise ValueError(
                    f"mask shape {mask.shape} does not match T={tokens.shape[0]}"
                )
        if not mask.any():
            raise ValueError("all tokens are masked; need at least one real token")
        tokens.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "mask", mask)


def pool(tm: TokenMatrix, strategy: str) -> np.ndarray:
    """Aggregate ``tm`` into one d-vector using the given strategy.

    Raises:
        ValueError: for an unknown strategy name.
    """
    if strategy not in POOLING_STRATEGIES:
        raise ValueError(
            f"unknown pooling strategy {strategy!r}; expected one of {POOLING_STRATEGIES}"
        )
    if strategy == "cls":
        return tm.tokens[0].copy()

    real = tm.tokens[tm.mask]
    if strategy == "mean":
        return real.mean(axis=0)
    if strategy == "eos":
        return real[-1].copy()
    # weighted_mean: weights 1..U over the unmasked rows, normalized
    u = real.shape[0]
    weights = np.arange(1, u + 1, dtype=np.float64)
    weights /= weights.sum()
    return weights @ real
