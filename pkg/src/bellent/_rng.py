"""Counter-based random streams for reproducible parallel sampling.

One master seed; every use site derives its own substream from a purpose tag,
and individual samples are addressed by index through the Philox counter.  A
worker that owns samples [lo, hi) draws exactly the same numbers for sample i
as any other partitioning would, so results are independent of scheduling.

Philox details that this module relies on (verified empirically): the
generator emits 64-bit words in blocks of 4 per counter tick, and
``Philox.advance(d)`` skips exactly d ticks, i.e. 4*d words.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

_WORDS_PER_BLOCK = 4
_INV_2_53 = 2.0 ** -53


def substream_key(seed: int, tag: str) -> int:
    """128-bit Philox key for (seed, tag), via blake2b."""
    h = hashlib.blake2b(digest_size=16)
    h.update(tag.encode("utf-8"))
    h.update(b"\x00")
    h.update(int(seed).to_bytes(16, "little", signed=False))
    return int.from_bytes(h.digest(), "little")


def blocks_per_sample(words: int) -> int:
    return -(-words // _WORDS_PER_BLOCK)


def raw_words(seed: int, tag: str, start: int, count: int, words: int) -> np.ndarray:
    """uint64 array (count, words): the words assigned to samples start..start+count.

    Each sample owns ceil(words/4) counter blocks; surplus words in the last
    block are discarded so consumption per sample is fixed.
    """
    bps = blocks_per_sample(words)
    ph = Philox(key=substream_key(seed, tag))
    if start:
        ph.advance(start * bps)
    raw = ph.random_raw(count * bps * _WORDS_PER_BLOCK)
    return raw.reshape(count, bps * _WORDS_PER_BLOCK)[:, :words]


def uniforms(seed: int, tag: str, start: int, count: int, words: int) -> np.ndarray:
    """Uniform doubles strictly inside (0, 1), one per word."""
    raw = raw_words(seed, tag, start, count, words)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def normals(seed: int, tag: str, start: int, count: int, words: int) -> np.ndarray:
    """Standard normals by inverse-CDF, exactly one word consumed per normal."""
    return ndtri(uniforms(seed, tag, start, count, words))


def bloch_directions(seed: int, tag: str, start: int, count: int,
                     n_parties: int) -> np.ndarray:
    """Uniform unit vectors on the sphere, shape (count, n_parties, 2, 3).

    Two measurement directions per party, 3 normals per direction, so each
    sample consumes 6*n_parties words (rounded up to whole counter blocks).
    """
    words = n_parties * 2 * 3
    z = normals(seed, tag, start, count, words).reshape(count, n_parties, 2, 3)
    # ndtri never returns exactly 0 on (0,1) grid points, so the norm is positive
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    return z


def generator(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """A numpy Generator on the (seed, tag, index) substream.

    For consumers whose draw count per use is variable (e.g. Poisson
    resampling); index picks a fresh stream per trial rather than a counter
    offset within one stream.
    """
    key = substream_key(seed, f"{tag}#{index}")
    return np.random.Generator(Philox(key=key))
