"""Counter-keyed xoshiro256** streams.

Every random draw in the package comes from a stream keyed by
``(run seed, tag, index)``.  A stream's state is four successive splitmix64
outputs of that key, so draw ``i`` of metric ``tag`` never depends on how many
other draws or metrics were evaluated first.  :class:`Streams` advances many
such streams in lockstep with numpy ``uint64`` arithmetic (wrapping mod 2**64).

Derived variates:
    uniform  -> (next >> 11) * 2**-53, in [0, 1)
    integers -> floor(uniform * n)
    normal   -> Box-Muller on two uniforms, both outputs used
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _u(k: int) -> np.uint64:
    return np.uint64(k)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def _mix(z: np.ndarray) -> np.ndarray:
    # uint64 products wrap by design; scalar inputs would otherwise warn
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _u(30))) * _M1
        z = (z ^ (z >> _u(27))) * _M2
    return z ^ (z >> _u(31))


def splitmix64(x: np.ndarray) -> np.ndarray:
    """One splitmix64 step: the output for state ``x`` (state advances by the golden gamma)."""
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    return _mix(z)


def derive_keys(seed: int, tag: str, indices) -> np.ndarray:
    """64-bit keys for streams ``(seed, tag, i)`` for every ``i`` in ``indices``."""
    idx = np.asarray(indices, dtype=np.uint64)
    h = splitmix64(np.full(idx.shape, seed & MASK64, dtype=np.uint64))
    h = splitmix64(h ^ _u(fnv1a64(tag)))
    return splitmix64(h ^ idx)


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << _u(k)) | (x >> _u(64 - k))


class Streams:
    """A batch of independent xoshiro256** generators advanced together."""

    def __init__(self, keys):
        keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
        s = np.empty((4,) + keys.shape, dtype=np.uint64)
        x = keys.copy()
        for i in range(4):
            x = x + _GOLDEN
            s[i] = _mix(x)
        self._s = s

    @classmethod
    def from_seed(cls, seed: int, tag: str, count: int) -> Streams:
        return cls(derive_keys(seed, tag, np.arange(count)))

    @classmethod
    def from_state(cls, state) -> Streams:
        obj = cls.__new__(cls)
        obj._s = np.asarray(state, dtype=np.uint64).reshape(4, -1).copy()
        return obj

    def __len__(self) -> int:
        return self._s.shape[1]

    def next_u64(self) -> np.ndarray:
        s0, s1, s2, s3 = self._s
        result = _rotl(s1 * _u(5), 7) * _u(9)
        t = s1 << _u(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s[3] = _rotl(s3, 45)
        return result

    def uniform(self) -> np.ndarray:
        return (self.next_u64() >> _u(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def integers(self, n) -> np.ndarray:
        """One integer per stream, uniform on ``[0, n)``; ``n`` may vary per stream."""
        n = np.asarray(n)
        out = np.floor(self.uniform() * n).astype(np.int64)
        return np.minimum(out, np.maximum(n - 1, 0))

    def normal_pair(self) -> tuple[np.ndarray, np.ndarray]:
        # u1 in (0, 1] keeps the log finite
        u1 = ((self.next_u64() >> _u(11)).astype(np.float64) + 1.0) * (1.0 / 9007199254740992.0)
        u2 = self.uniform()
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        return r * np.cos(theta), r * np.sin(theta)


def gaussian_matrix(seed: int, tag: str, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` standard normals; row ``r`` is drawn from stream ``(seed, tag, r)``."""
    st = Streams.from_seed(seed, tag, rows)
    out = np.empty((rows, cols))
    for c in range(0, cols, 2):
        a, b = st.normal_pair()
        out[:, c] = a
        if c + 1 < cols:
            out[:, c + 1] = b
    return out


def permutation(seed: int, tag: str, n: int) -> np.ndarray:
    """Seeded permutation of ``range(n)``: stable argsort of one u64 key per position."""
    keys = Streams.from_seed(seed, tag, n).next_u64()
    return np.argsort(keys, kind="stable")
