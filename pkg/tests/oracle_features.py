"""Plain-math recomputation of window features and centroid distances.

No numpy: everything is written out with loops and math.sqrt so the feature
pipeline has a genuinely independent reference.
"""

from __future__ import annotations

import math


def features(window):
    """window: sequence of (ax, ay, az) triples. Returns the 10-vector as a list."""
    n = len(window)
    means = [sum(sample[axis] for sample in window) / n for axis in range(3)]
    stds = [
        math.sqrt(sum((sample[axis] - means[axis]) ** 2 for sample in window) / n)
        for axis in range(3)
    ]
    mads = [
        sum(abs(sample[axis] - means[axis]) for sample in window) / n
        for axis in range(3)
    ]
    magnitude = (
        sum(
            math.sqrt(sample[0] ** 2 + sample[1] ** 2 + sample[2] ** 2)
            for sample in window
        )
        / n
    )
    return means + stds + mads + [magnitude]


def scaled_distance(feature_vec, centroid, scales):
    return math.sqrt(
        sum(
            ((f - c) / s) ** 2
            for f, c, s in zip(feature_vec, centroid, scales)
        )
    )


def classify(model_doc, window):
    """model_doc: the JSON dict written by CentroidModel.save()."""
    fv = features(window)
    scored = sorted(
        (
            (scaled_distance(fv, centroid, model_doc["scales"]), label)
            for label, centroid in zip(model_doc["labels"], model_doc["centroids"])
        ),
        key=lambda pair: (pair[0], pair[1]),
    )
    d1, d2 = scored[0][0], scored[1][0]
    confidence = 0.5 if d1 + d2 == 0 else d2 / (d1 + d2)
    return scored[0][1], confidence
