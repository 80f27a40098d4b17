"""Representative-day reduction via k-means on joint load/solar day vectors.

Each day becomes one vector of 24 values per source (load node or solar
unit).  Sources are min-max normalized over the whole year so kilowatt-scale
loads and unit-scale solar availability carry equal weight, then Lloyd's
algorithm with k-means++ seeding runs from several restarts and the lowest
sum of squared errors wins.  Centroids are denormalized back to physical
units before they reach the planner.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import HOURS, RepresentativeDay

RESTARTS = 20
MAX_ITERATIONS = 300


class EmptyInput(ValueError):
    """No days (or zero-width day vectors) to cluster."""


class KTooLarge(ValueError):
    """Requested more clusters than there are days."""


@dataclass
class ProfileSet:
    """A year (or any span) of daily series per source.

    loads maps node id to an (n_days, 24) kW array; solar maps generator id
    to an (n_days, 24) kW availability array.
    """
    loads: dict[int, np.ndarray] = field(default_factory=dict)
    solar: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_days(self) -> int:
        for series in list(self.loads.values()) + list(self.solar.values()):
            return int(series.shape[0])
        return 0

    def feature_keys(self) -> list[tuple[str, object]]:
        keys: list[tuple[str, object]] = []
        keys += [("load", n) for n in sorted(self.loads)]
        keys += [("solar", g) for g in sorted(self.solar)]
        return keys

    def _series(self, key: tuple[str, object]) -> np.ndarray:
        group, ident = key
        return self.loads[ident] if group == "load" else self.solar[ident]

    def to_matrix(self) -> tuple[np.ndarray, list[tuple[float, float]]]:
        """Stack all sources into (n_days, 24*F), min-max normalized per
        source; returns the matrix and the (min, span) pairs for undoing it."""
        keys = self.feature_keys()
        if not keys or self.n_days == 0:
            raise EmptyInput("no profile data")
        blocks, scales = [], []
        for key in keys:
            series = np.asarray(self._series(key), dtype=float)
            if series.shape != (self.n_days, HOURS):
                raise EmptyInput(f"series {key} has shape {series.shape}")
            lo = float(series.min())
            span = float(series.max()) - lo
            if span <= 0:
                span = 1.0  # constant source: normalized to all zeros
            blocks.append((series - lo) / span)
            scales.append((lo, span))
        return np.hstack(blocks), scales

    def day_from_vector(self, vector: np.ndarray,
                        scales: list[tuple[float, float]]) -> tuple[dict, dict]:
        """Denormalize one 24*F vector back into per-source kW series."""
        loads: dict[int, np.ndarray] = {}
        solar: dict[str, np.ndarray] = {}
        for i, key in enumerate(self.feature_keys()):
            lo, span = scales[i]
            series = vector[i * HOURS:(i + 1) * HOURS] * span + lo
            series = np.maximum(series, 0.0)
            group, ident = key
            if group == "load":
                loads[ident] = series
            else:
                solar[ident] = series
        return loads, solar


def sse(vectors: np.ndarray, centroids: np.ndarray) -> float:
    """Sum of squared distances of each vector to its nearest centroid."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
    d2 = ((vectors[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return float(d2.min(axis=1).sum())


def _assign(data: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((data[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _seed_plus_plus(data: np.ndarray, k: int, rng) -> np.ndarray:
    n = data.shape[0]
    centroids = np.empty((k, data.shape[1]))
    centroids[0] = data[rng.integers(n)]
    for j in range(1, k):
        d2 = ((data[:, None, :] - centroids[None, :j, :]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        if total <= 0:
            centroids[j] = data[rng.integers(n)]
        else:
            centroids[j] = data[rng.choice(n, p=d2 / total)]
    return centroids


def lloyd(data: np.ndarray, k: int, rng,
          max_iterations: int = MAX_ITERATIONS) -> tuple[np.ndarray, np.ndarray, float]:
    """One k-means run; returns (labels, centroids, sse)."""
    centroids = _seed_plus_plus(data, k, rng)
    labels = _assign(data, centroids)
    previous = np.inf
    for _ in range(max_iterations):
        for j in range(k):
            members = data[labels == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
            else:
                centroids[j] = data[rng.integers(data.shape[0])]
        new_labels = _assign(data, centroids)
        current = sse(data, centroids)
        # Lloyd steps can never make the fit worse
        assert current <= previous + 1e-9 * (1.0 + previous)
        previous = current
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centroids, float(previous if np.isfinite(previous)
                                    else sse(data, centroids))


def kmeans(data: np.ndarray, k: int, seed: int,
           restarts: int = RESTARTS) -> tuple[np.ndarray, np.ndarray, float]:
    """Best of `restarts` seeded Lloyd runs on raw vectors."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.size == 0:
        raise EmptyInput("no vectors to cluster")
    if not np.all(np.isfinite(data)):
        raise EmptyInput("non-finite values in day vectors")
    if k < 1:
        raise KTooLarge("k must be at least 1")
    if k > data.shape[0]:
        raise KTooLarge(f"k={k} exceeds {data.shape[0]} days")
    best: tuple[np.ndarray, np.ndarray, float] | None = None
    root = np.random.default_rng(seed)
    for child_seed in root.integers(0, 2 ** 31, size=restarts):
        rng = np.random.default_rng(int(child_seed))
        labels, centroids, err = lloyd(data, k, rng)
        if best is None or err < best[2]:
            best = (labels, centroids, err)
    return best


def cluster_days(profiles: ProfileSet, k: int, seed: int) -> list[RepresentativeDay]:
    """Reduce the year to k weighted representative days."""
    matrix, scales = profiles.to_matrix()
    labels, centroids, _ = kmeans(matrix, k, seed)
    days = []
    for j in range(k):
        count = int(np.sum(labels == j))
        if count == 0:
            continue
        loads, solar = profiles.day_from_vector(centroids[j], scales)
        days.append(RepresentativeDay(weight=float(count), load_kw=loads,
                                      solar_kw=solar, member_count=count))
    return days
