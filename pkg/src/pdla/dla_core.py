"""Deviant-learning sequence memory.

A :class:`MemoryStore` keeps the most recent ``store_threshold`` integer chunks.
Prediction is two-staged: :meth:`MemoryStore.pre_predict` gathers every stored
chunk with minimal mismatch against the incoming chunk (possibly several), and
:meth:`MemoryStore.post_predict` picks one of them by permanence and recency,
reinforcing it. Numeric extrapolation adds the mean absolute deviation of the
latest chunk from the stored history back onto the latest chunk.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .representation import IntegerChunk


class NoMemory(LookupError):
    pass


@dataclass(frozen=True)
class DlaConfig:
    learning_extent: int = 121
    time_limit: int = 10
    store_threshold: int = 120
    initial_permanence: float = 0.0
    tolerance: float = 0.05

    def __post_init__(self):
        for name in ("learning_extent", "time_limit", "store_threshold"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer, got {getattr(self, name)}")
        if self.initial_permanence < 0:
            raise ValueError("initial_permanence must be >= 0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


@dataclass
class MemorizedChunk:
    chunk: IntegerChunk
    permanence: float
    birth_step: int


@dataclass(frozen=True)
class Prediction:
    candidates: tuple[IntegerChunk, ...]
    selected: IntegerChunk
    extrapolated: IntegerChunk
    mismatch_score: int


def mismatch(a: IntegerChunk, b: IntegerChunk, l_ext: int) -> int:
    """Truncated L1 distance over the first ``l_ext`` units; absent units count as 0."""
    if l_ext < 1:
        raise ValueError(f"learning extent must be >= 1, got {l_ext}")
    ua, ub = a.units, b.units
    n = min(l_ext, max(len(ua), len(ub)))
    total = 0
    for i in range(n):
        x = ua[i] if i < len(ua) else 0
        y = ub[i] if i < len(ub) else 0
        total += abs(x - y)
    return total


class MemoryStore:
    """FIFO-capped chunk memory. Single writer; not thread-safe."""

    def __init__(self, config: DlaConfig = DlaConfig()):
        self.config = config
        self.chunks: deque[MemorizedChunk] = deque(maxlen=config.store_threshold)
        self.clock = 0

    def __len__(self):
        return len(self.chunks)

    def __iter__(self):
        return iter(self.chunks)

    @property
    def latest(self) -> IntegerChunk:
        if not self.chunks:
            raise NoMemory("memory store is empty")
        return self.chunks[-1].chunk

    def store(self, c: IntegerChunk) -> "MemoryStore":
        # deque(maxlen) drops the oldest entry when full
        self.chunks.append(MemorizedChunk(c, float(self.config.initial_permanence), self.clock))
        self.clock += 1
        return self

    def scores(self, query: IntegerChunk, l_ext: int | None = None) -> list[int]:
        l_ext = self.config.learning_extent if l_ext is None else l_ext
        return [mismatch(query, m.chunk, l_ext) for m in self.chunks]

    def pre_predict(self, query: IntegerChunk) -> list[MemorizedChunk]:
        """All stored entries sharing the minimal mismatch against ``query``, in store order."""
        if not self.chunks:
            raise NoMemory("cannot predict from an empty memory store")
        scores = self.scores(query)
        best = min(scores)
        return [m for m, s in zip(self.chunks, scores) if s == best]

    def post_predict(self, candidates: Sequence[MemorizedChunk], query: IntegerChunk | None = None,
                     extrapolated: IntegerChunk | None = None) -> Prediction:
        if not candidates:
            raise ValueError("post_predict needs at least one candidate")
        chosen = max(candidates, key=lambda m: (m.permanence, m.birth_step))
        chosen.permanence += 1
        if extrapolated is None:
            extrapolated = extrapolate(self)
        score = 0 if query is None else mismatch(query, chosen.chunk, self.config.learning_extent)
        return Prediction(
            candidates=tuple(m.chunk for m in candidates),
            selected=chosen.chunk,
            extrapolated=extrapolated,
            mismatch_score=score,
        )

    def predict(self, query: IntegerChunk, extrapolated: IntegerChunk | None = None) -> Prediction:
        return self.post_predict(self.pre_predict(query), query, extrapolated)


def _deviation_sums(store: MemoryStore) -> tuple[list[int], int]:
    if len(store) == 0:
        raise NoMemory("deviant average of an empty memory store")
    latest = store.latest.units
    sums = [0] * len(latest)
    for m in store:
        u = m.chunk.units
        for i, k in enumerate(latest):
            sums[i] += abs(k - (u[i] if i < len(u) else 0))
    return sums, len(store)


def deviant_average(store: MemoryStore) -> np.ndarray:
    """Mean absolute deviation of the latest chunk from every stored chunk.

    The latest chunk's own (zero) term is included and the sum is divided by
    the store size n. Output has the latest chunk's length.
    """
    sums, n = _deviation_sums(store)
    return np.array(sums, dtype=np.float64) / n


def extrapolate(store: MemoryStore) -> IntegerChunk:
    sums, n = _deviation_sums(store)
    # sums are non-negative, so floor((2s + n) / 2n) is round-half-away-from-zero of s/n
    avg = [(2 * s + n) // (2 * n) for s in sums]
    return IntegerChunk(tuple(a + k for a, k in zip(avg, store.latest.units)))


def run_episode(store: MemoryStore, stream: Iterable[IntegerChunk]) -> list[Prediction]:
    """Predict-then-store over ``stream``.

    Each incoming chunk is first matched against memory (when memory is
    nonempty), then memorized. The extrapolated chunk is recomputed once per
    ``time_limit`` steps and reused within that window.
    """
    stream = list(stream)
    if not stream:
        raise ValueError("run_episode needs a nonempty stream")
    predictions = []
    cached = None
    for step, c in enumerate(stream):
        if len(store):
            if cached is None or step % store.config.time_limit == 0:
                cached = extrapolate(store)
            predictions.append(store.predict(c, extrapolated=cached))
        store.store(c)
    return predictions


def replay(store: MemoryStore, stream: Iterable[IntegerChunk]) -> list[Prediction]:
    """Recall every chunk of ``stream`` from memory without memorizing it."""
    predictions = []
    cached = None
    for step, c in enumerate(stream):
        if cached is None or step % store.config.time_limit == 0:
            cached = extrapolate(store)
        predictions.append(store.predict(c, extrapolated=cached))
    return predictions
