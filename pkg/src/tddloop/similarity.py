"""Token-sequence similarity for near-duplicate code detection.

Similarity is 2*LCS / (len(a) + len(b)) over normalized token sequences:
1.0 for identical sequences, ~0 for disjoint ones, and just under 1.0 for
the one-variable-removed edits that repetition detection must catch.
"""

from __future__ import annotations

from collections.abc import Sequence


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(len(a)*len(b)) time, O(min) space."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def similarity_ratio(a: Sequence[str], b: Sequence[str]) -> float:
    if not a and not b:
        return 1.0
    total = len(a) + len(b)
    return 2.0 * lcs_length(a, b) / total
