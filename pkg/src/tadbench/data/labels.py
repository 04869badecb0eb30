"""Anomaly-label construction from source-dataset class ids."""

from __future__ import annotations

import numbers
from typing import Iterable, Sequence

from ..errors import ConfigError


def assign_anomaly_labels(
    class_ids: Sequence[int], normal_classes: Iterable[int]
) -> list[int]:
    """Map class ids to binary anomaly labels.

    A sample is normal (0) iff its class id belongs to ``normal_classes``,
    anomalous (1) otherwise. Membership is all that matters: the output is
    unchanged under re-labelling that preserves the normal set.

    Args:
        class_ids: source-dataset class id per sample.
        normal_classes: the ids regarded as normal.

    Returns:
        One 0/1 label per input id.

    Raises:
        ConfigError: if ``normal_classes`` is empty.
        TypeError: if any class id is not an integer.
    """
    normal = set(normal_classes)
    if not normal:
        raise ConfigError("normal_classes must be non-empty")
    labels = []
    for cid in class_ids:
        if isinstance(cid, bool) or not isinstance(cid, numbers.Integral):
            raise TypeError(f"class id {cid!r} is not an integer")
        labels.append(0 if int(cid) in normal else 1)
    return labels
