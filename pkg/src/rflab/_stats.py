"""Deterministic streaming mean/variance over Monte-Carlo replicates.

Rows are buffered into fixed-size chunks; each full chunk becomes a leaf
``(count, mean, M2)`` and leaves are merged pairwise like a binary counter
(Chan et al. update). Memory is O(chunk + log M) and the merge tree depends
only on the number of rows pushed, so batch and streaming use of the same
rows in the same order give bit-identical statistics.
"""

import numpy as np

DEFAULT_CHUNK = 256


def _merge(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    m2 = m2a + m2b + delta * delta * (na * nb / n)
    return n, mean, m2


def _leaf(chunk):
    mean = chunk.sum(axis=0) / chunk.shape[0]
    # constant columns: keep the exact value so their variance is exactly 0
    mean = np.where((chunk == chunk[0]).all(axis=0), chunk[0], mean)
    m2 = ((chunk - mean) ** 2).sum(axis=0)
    return chunk.shape[0], mean, m2


class StreamingMoments:
    """Running per-coordinate mean and unbiased variance."""

    def __init__(self, chunk_size=DEFAULT_CHUNK):
        if chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        self.chunk_size = int(chunk_size)
        self._buffer = []
        self._stack = []  # list of (level, leaf); levels strictly decrease

    def push(self, row):
        self._buffer.append(np.asarray(row, dtype=np.float64))
        if len(self._buffer) == self.chunk_size:
            self._flush()

    def push_many(self, rows):
        for row in np.asarray(rows, dtype=np.float64):
            self.push(row)

    def _flush(self):
        if not self._buffer:
            return
        leaf = _leaf(np.stack(self._buffer))
        self._buffer = []
        level = 0
        while self._stack and self._stack[-1][0] == level:
            _, prev = self._stack.pop()
            leaf = _merge(prev, leaf)
            level += 1
        self._stack.append((level, leaf))

    @property
    def count(self):
        return sum(leaf[0] for _, leaf in self._stack) + len(self._buffer)

    def result(self):
        """Return ``(count, mean, unbiased variance)`` without consuming state."""
        stack = list(self._stack)
        if self._buffer:
            stack.append((-1, _leaf(np.stack(self._buffer))))
        if not stack:
            raise ValueError("no rows pushed")
        acc = stack[-1][1]
        for _, leaf in reversed(stack[:-1]):
            acc = _merge(leaf, acc)
        n, mean, m2 = acc
        var = m2 / (n - 1) if n > 1 else np.zeros_like(mean)
        return n, mean, np.maximum(var, 0.0)


def moments(rows, chunk_size=DEFAULT_CHUNK):
    acc = StreamingMoments(chunk_size)
    acc.push_many(rows)
    return acc.result()
