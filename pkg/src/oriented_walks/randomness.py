"""Reproducible, splittable random streams.

Every stream is addressed by a master seed and a path of 64-bit labels.
The path is hashed into a Philox key, so a stream is a keyed permutation of
a counter: deriving a child stream needs no shared state, and the draws of
replicate ``i`` do not depend on how many other replicates ran before it or
on which worker ran it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

__all__ = [
    "StreamKey",
    "StreamRegistry",
    "derive_stream",
    "label",
    "standard_normal",
]

_MASK64 = (1 << 64) - 1

Label = Union[int, str]


def label(name: Label) -> int:
    """Map a label to an unsigned 64-bit integer.

    Integers are taken modulo 2**64; strings are hashed with BLAKE2b so that
    human-readable roles ("env", "walk", ...) can sit in a stream path.
    """
    if isinstance(name, (int, np.integer)):
        return int(name) & _MASK64
    digest = hashlib.blake2b(str(name).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class StreamKey:
    """Address of one random stream."""

    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "path", tuple(label(p) for p in self.path))

    def child(self, *labels: Label) -> "StreamKey":
        return StreamKey(self.master_seed, self.path + tuple(label(p) for p in labels))


def _philox_key(key: StreamKey) -> np.ndarray:
    seq = np.random.SeedSequence(entropy=key.master_seed, spawn_key=key.path)
    return seq.generate_state(2, dtype=np.uint64)


def derive_stream(key: StreamKey | int, *path: Label) -> np.random.Generator:
    """Return the generator for ``key`` (or for ``StreamKey(key, path)``).

    The result is a fresh :class:`numpy.random.Generator` on a Philox
    bit generator whose counter starts at zero. Equal keys give identical
    draw sequences.
    """
    if not isinstance(key, StreamKey):
        key = StreamKey(key, path)
    elif path:
        key = key.child(*path)
    return np.random.Generator(np.random.Philox(key=_philox_key(key)))


def standard_normal(stream: np.random.Generator, size=None):
    """Standard normal draw(s) from ``stream``."""
    return stream.standard_normal(size)


class StreamRegistry:
    """Records every path used in one experiment and rejects duplicates."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & _MASK64
        self._seen: set[tuple[int, ...]] = set()

    def __len__(self):
        return len(self._seen)

    def derive(self, *path: Label) -> np.random.Generator:
        key = StreamKey(self.master_seed, path)
        if key.path in self._seen:
            raise ValueError(f"stream path {path!r} already used in this experiment")
        self._seen.add(key.path)
        return derive_stream(key)

    def register_all(self, paths: Iterable[tuple]) -> None:
        for p in paths:
            key = StreamKey(self.master_seed, p)
            if key.path in self._seen:
                raise ValueError(f"stream path {p!r} already used in this experiment")
            self._seen.add(key.path)
