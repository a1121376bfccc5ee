"""Seeded random streams.

Every stochastic decision in the simulator consumes uniform doubles on
[0, 1) from a :class:`RandomStream`. The stream is backed by NumPy's PCG64
bit generator, seeded through ``numpy.random.SeedSequence`` so neighbouring
integer seeds give statistically independent streams. Doubles are drawn in
blocks; because PCG64 emits exactly one 64-bit word per double, the sequence
of values does not depend on the block size, and the compiled step kernel and
the pure-Python reference path read the very same sequence.
"""

from __future__ import annotations

import copy

import numpy as np

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def run_seed(base_seed: int, run_index: int) -> int:
    """Seed of the ``run_index``-th run derived from a base seed (wraps at 2**64)."""
    return (check_seed(base_seed) + int(run_index)) % (SEED_MAX + 1)


class RandomStream:
    """Buffered stream of uniform doubles from PCG64.

    Args:
        seed: 64-bit unsigned seed.
        block: number of doubles fetched from the generator per refill.
    """

    def __init__(self, seed: int, block: int = 1 << 16):
        self.seed = check_seed(seed)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))
        self._block = int(block)
        self._buf = np.empty(0, dtype=np.float64)
        self._pos = 0
        self.consumed = 0

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, consumed={self.consumed})"

    def copy(self) -> "RandomStream":
        return copy.deepcopy(self)

    def uniform(self) -> float:
        if self._pos >= self._buf.shape[0]:
            self.reserve(1)
        u = float(self._buf[self._pos])
        self._pos += 1
        self.consumed += 1
        return u

    def uniforms(self, count: int) -> np.ndarray:
        """Next ``count`` doubles as a fresh array."""
        count = int(count)
        available = self._buf.shape[0] - self._pos
        if count <= available:
            out = self._buf[self._pos:self._pos + count].copy()
            self._pos += count
        else:
            head = self._buf[self._pos:]
            out = np.concatenate([head, self._gen.random(count - available)])
            self._buf = np.empty(0, dtype=np.float64)
            self._pos = 0
        self.consumed += count
        return out

    def reserve(self, count: int) -> tuple[np.ndarray, int]:
        """Make at least ``count`` unread doubles available.

        Returns the buffer and the read cursor so a kernel can consume values
        in place; report the new cursor back with :meth:`commit`.
        """
        available = self._buf.shape[0] - self._pos
        if available < count:
            fresh = self._gen.random(max(self._block, count - available))
            self._buf = np.concatenate([self._buf[self._pos:], fresh])
            self._pos = 0
        return self._buf, self._pos

    def commit(self, cursor: int) -> None:
        if not self._pos <= cursor <= self._buf.shape[0]:
            raise ValueError("cursor outside the reserved buffer")
        self.consumed += cursor - self._pos
        self._pos = cursor
