"""Classification micro-service: windowed accelerometer frames to activities.

Windows are 128 samples of (ax, ay, az) at a nominal 20 Hz, advancing with
50% overlap. Ten features per window: per-axis mean, per-axis population
standard deviation, per-axis mean absolute deviation (around the mean), and
the mean resultant magnitude. A nearest-centroid model over scale-normalized
features assigns the label; confidence is d2 / (d1 + d2) for the two nearest
centroids, so 0.5 means a tie and 1.0 an exact centroid hit.

The same process can run a dense-sensing mapper instead: a config table turns
coded smart-home events (door contacts, appliance state) into context events.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .client import ConnectionLost, CoreClient

log = logging.getLogger(__name__)

WINDOW_SIZE = 128
WINDOW_STEP = 64  # 50% overlap
SAMPLE_RATE_HZ = 20.0
SCALE_FLOOR = 1e-6

FEATURE_NAMES = (
    "mean_ax", "mean_ay", "mean_az",
    "std_ax", "std_ay", "std_az",
    "mad_ax", "mad_ay", "mad_az",
    "mean_magnitude",
)

DEFAULT_LABELS = ("lying", "sitting", "standing", "walking")


class InsufficientData(Exception):
    pass


def extract_features(window: np.ndarray) -> np.ndarray:
    """10-component feature vector for one full (N, 3) window."""
    window = np.asarray(window, dtype=float)
    if window.shape != (WINDOW_SIZE, 3):
        raise ValueError(f"window must be ({WINDOW_SIZE}, 3), got {window.shape}")
    means = window.mean(axis=0)
    stds = window.std(axis=0)  # population formula
    mads = np.abs(window - means).mean(axis=0)
    magnitude = np.sqrt((window ** 2).sum(axis=1)).mean()
    return np.concatenate([means, stds, mads, [magnitude]])


def sliding_windows(samples: np.ndarray) -> list[np.ndarray]:
    samples = np.asarray(samples, dtype=float)
    out = []
    for start in range(0, len(samples) - WINDOW_SIZE + 1, WINDOW_STEP):
        out.append(samples[start : start + WINDOW_SIZE])
    return out


@dataclass
class CentroidModel:
    labels: tuple[str, ...]
    centroids: np.ndarray  # (n_labels, 10)
    scales: np.ndarray  # (10,)

    def save(self, path: str | Path) -> None:
        doc = {
            "feature_names": list(FEATURE_NAMES),
            "labels": list(self.labels),
            "centroids": self.centroids.tolist(),
            "scales": self.scales.tolist(),
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CentroidModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            labels=tuple(doc["labels"]),
            centroids=np.asarray(doc["centroids"], dtype=float),
            scales=np.asarray(doc["scales"], dtype=float),
        )


def train(labeled_windows: list[tuple[str, np.ndarray]]) -> CentroidModel:
    """Per-label feature means plus global per-component scales."""
    by_label: dict[str, list[np.ndarray]] = {}
    all_features: list[np.ndarray] = []
    for label, window in labeled_windows:
        fv = extract_features(window)
        by_label.setdefault(label, []).append(fv)
        all_features.append(fv)
    if len(by_label) < 2:
        raise InsufficientData(
            f"need windows for at least 2 labels, got {sorted(by_label)}"
        )
    labels = tuple(sorted(by_label))
    centroids = np.stack([np.mean(by_label[l], axis=0) for l in labels])
    scales = np.maximum(np.std(np.stack(all_features), axis=0), SCALE_FLOOR)
    return CentroidModel(labels, centroids, scales)


def classify(model: CentroidModel, window: np.ndarray) -> tuple[str, float]:
    """Nearest centroid under scale-normalized Euclidean distance.

    Ties break toward the lexicographically smaller label (labels are stored
    sorted, so index order is label order).
    """
    fv = extract_features(window)
    diffs = (model.centroids - fv) / model.scales
    distances = np.sqrt((diffs ** 2).sum(axis=1))
    order = np.argsort(distances, kind="stable")  # labels are sorted: stable = lex tie-break
    best, runner_up = order[0], order[1]
    d1, d2 = float(distances[best]), float(distances[runner_up])
    confidence = 0.5 if d1 + d2 == 0.0 else d2 / (d1 + d2)
    return model.labels[best], confidence


# --- training corpus -----------------------------------------------------------


def load_corpus(path: str | Path) -> list[tuple[str, np.ndarray]]:
    """`label,ax,ay,az` rows, grouped into consecutive full windows per label run."""
    windows: list[tuple[str, np.ndarray]] = []
    run_label: str | None = None
    run: list[list[float]] = []

    def flush() -> None:
        nonlocal run
        for start in range(0, len(run) - WINDOW_SIZE + 1, WINDOW_SIZE):
            windows.append(
                (run_label, np.asarray(run[start : start + WINDOW_SIZE], dtype=float))
            )
        run = []

    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 4:
                raise ValueError(f"line {line_no}: need label,ax,ay,az")
            label = row[0].strip()
            if label != run_label:
                if run_label is not None:
                    flush()
                run_label = label
            try:
                run.append([float(row[1]), float(row[2]), float(row[3])])
            except ValueError:
                raise ValueError(f"line {line_no}: non-numeric sample") from None
    if run_label is not None:
        flush()
    return windows


_ACTIVITY_PROFILES = {
    # (base acceleration per axis, noise sigma, sinusoid amplitude per axis, hz)
    "standing": ((0.2, 0.1, 9.78), 0.05, (0.0, 0.0, 0.0), 0.0),
    "sitting": ((1.2, 3.1, 9.15), 0.08, (0.0, 0.0, 0.0), 0.0),
    "lying": ((9.60, 0.6, 1.1), 0.06, (0.0, 0.0, 0.0), 0.0),
    "walking": ((0.4, 1.0, 9.40), 0.35, (1.4, 2.2, 3.1), 2.0),
}


def synth_samples(label: str, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Synthetic accelerometer stream with the statistical signature of `label`."""
    base, sigma, amp, hz = _ACTIVITY_PROFILES[label]
    t = np.arange(n_samples) / SAMPLE_RATE_HZ
    phase = rng.uniform(0, 2 * math.pi)
    out = np.empty((n_samples, 3))
    for axis in range(3):
        wave = amp[axis] * np.sin(2 * math.pi * hz * t + phase) if hz else 0.0
        out[:, axis] = base[axis] + wave + rng.normal(0, sigma, n_samples)
    return out


def generate_corpus(
    seed: int, windows_per_label: int, labels: tuple[str, ...] = DEFAULT_LABELS
) -> list[tuple[str, np.ndarray]]:
    rng = np.random.default_rng(seed)
    out = []
    for label in labels:
        stream = synth_samples(label, windows_per_label * WINDOW_SIZE, rng)
        for i in range(windows_per_label):
            out.append((label, stream[i * WINDOW_SIZE : (i + 1) * WINDOW_SIZE]))
    return out


def write_corpus_csv(path: str | Path, windows: list[tuple[str, np.ndarray]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for label, window in windows:
            for ax, ay, az in window:
                w.writerow([label, f"{ax:.6f}", f"{ay:.6f}", f"{az:.6f}"])


# --- live services --------------------------------------------------------------


def run_activity_service(
    core: tuple[str, int],
    model: CentroidModel,
    subject: str,
    topic: str = "sensor/accel",
    label_map: dict[str, str] | None = None,
    name: str = "activity-classifier",
    max_windows: int | None = None,
) -> int:
    """Consume sensor frames (one 3-axis sample each), classify full windows,
    and send context events. Returns the number of windows classified."""
    client = CoreClient(*core)
    classified = 0
    buffer: list[list[float]] = []
    try:
        client.hello("classification", name, [topic])
        while max_windows is None or classified < max_windows:
            env = client.pump(0.2)
            if env is None:
                continue
            if env["type"] != "sensor" or env["payload"]["topic"] != topic:
                continue
            values = env["payload"]["values"]
            if len(values) != 3:
                log.warning("ignoring sensor frame with %d values", len(values))
                continue
            buffer.append(values)
            if len(buffer) < WINDOW_SIZE:
                continue
            window = np.asarray(buffer[:WINDOW_SIZE])
            buffer = buffer[WINDOW_STEP:]
            label, confidence = classify(model, window)
            context = (label_map or {}).get(label, label)
            client.send(
                "context",
                {
                    "subject": subject,
                    "context": context,
                    "confidence": confidence,
                    "ts": env["payload"]["ts"],
                },
            )
            classified += 1
    except ConnectionLost:
        log.info("core connection closed; classified %d window(s)", classified)
    finally:
        client.close()
    return classified


def load_home_map(path: str | Path) -> dict[str, dict[str, dict]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for topic, codes in doc.items():
        for code, entry in codes.items():
            missing = {"subject", "context", "confidence"} - set(entry)
            if missing:
                raise ValueError(f"{topic}/{code}: missing {sorted(missing)}")
    return doc


def run_home_mapper(
    core: tuple[str, int],
    mapping: dict[str, dict[str, dict]],
    name: str = "home-events",
    max_events: int | None = None,
) -> int:
    """Map coded smart-home sensor frames straight to context events."""
    client = CoreClient(*core)
    mapped = 0
    try:
        client.hello("classification", name, sorted(mapping))
        while max_events is None or mapped < max_events:
            env = client.pump(0.2)
            if env is None:
                continue
            if env["type"] != "sensor":
                continue
            payload = env["payload"]
            codes = mapping.get(payload["topic"])
            if codes is None or not payload["values"]:
                continue
            entry = codes.get(str(int(payload["values"][0])))
            if entry is None:
                continue
            client.send(
                "context",
                {
                    "subject": entry["subject"],
                    "context": entry["context"],
                    "confidence": entry["confidence"],
                    "ts": payload["ts"],
                },
            )
            mapped += 1
    except ConnectionLost:
        log.info("core connection closed; mapped %d event(s)", mapped)
    finally:
        client.close()
    return mapped
