"""Counter-based random streams for reproducible parallel sampling.

Philox is a counter-based generator: the 128-bit key selects an
independent stream, and the position inside the stream is a pure
function of how many variates were drawn.  Every stochastic routine in
the library keys its stream by (seed, substream), where the substream
is the global sample index, so sample i is bit-identical no matter how
the samples are chunked over workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def stream(seed: int, substream: int = 0) -> np.random.Generator:
    """Independent Generator for the (seed, substream) pair."""
    key = np.array([np.uint64(int(seed) & int(_MASK64)),
                    np.uint64(int(substream) & int(_MASK64))], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def normals(seed: int, substream: int, n: int) -> np.ndarray:
    """n standard normals from the (seed, substream) stream."""
    return stream(seed, substream).standard_normal(n)


class BlockStreams:
    """Per-sample streams consumed block by block.

    Column j of next_block(n) holds the next n variates of stream
    (seed, substreams[j]).  Variate k of a given sample is independent
    of the block size and of every other sample, so chunked consumers
    stay bit-reproducible.
    """

    def __init__(self, seed: int, substreams):
        self._gens = [stream(seed, s) for s in substreams]

    def next_block(self, n: int) -> np.ndarray:
        out = np.empty((n, len(self._gens)))
        for j, gen in enumerate(self._gens):
            out[:, j] = gen.standard_normal(n)
        return out
