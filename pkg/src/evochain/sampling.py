"""Counter-based uniform draws keyed by (seed, stream, sample index).

Sample ``i`` always reads Philox block ``i`` (four 64-bit words) of the
stream ``(seed, stream)``, so any partition of an index range into chunks
reproduces the same numbers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_TO_UNIT = 2.0**-53


def uniforms(seed: int, start: int, count: int, width: int = 4, stream: int = 0) -> np.ndarray:
    """Array of shape ``(count, width)`` with uniforms in ``[0, 1)`` for samples ``start .. start+count-1``."""
    if not 1 <= width <= 4:
        raise ValueError("width must be between 1 and 4")
    if start < 0 or count < 0:
        raise ValueError("start and count must be non-negative")
    key = np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)
    bits = np.random.Philox(key=key)
    if start:
        bits.advance(start)
    raw = bits.random_raw(4 * count).reshape(count, 4)[:, :width]
    return (raw >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def chunks(total: int, size: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into ``(start, count)`` pieces of at most ``size``."""
    return [(lo, min(size, total - lo)) for lo in range(0, total, size)]
