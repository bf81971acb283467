"""Brute-force n-gram distribution, independent of the incremental model.

Counts followers by rescanning the raw sequence per query instead of keeping
any count tables, so it shares no code path with PredictionModel.
"""

from __future__ import annotations

from collections import Counter


def brute_force_counts(sequence, k):
    """Every (suffix of length <= k, next) count, by direct enumeration."""
    counts: dict[tuple, Counter] = {}
    for i in range(len(sequence)):
        for j in range(0, min(k, i) + 1):
            suffix = tuple(sequence[i - j : i])
            counts.setdefault(suffix, Counter())[sequence[i]] += 1
    return counts


def brute_force_distribution(sequence, recent, k):
    """Longest-suffix back-off distribution, or None for an empty sequence."""
    if not sequence:
        return None
    recent = list(recent)
    for j in range(min(k, len(recent)), -1, -1):
        suffix = tuple(recent[len(recent) - j :])
        followers = [
            sequence[i]
            for i in range(len(sequence))
            if i >= j and tuple(sequence[i - j : i]) == suffix
        ]
        if followers:
            total = len(followers)
            tally = Counter(followers)
            return sorted(
                ((name, n / total) for name, n in tally.items()),
                key=lambda pair: (-pair[1], pair[0]),
            )
    return None
