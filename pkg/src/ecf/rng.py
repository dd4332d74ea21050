"""Randomness sources.

Everything that draws random bytes takes an optional ``rng`` argument so that
fixtures can be regenerated from a recorded seed. Production code should
always use the default :class:`SystemRandomness`.
"""

from __future__ import annotations

import os
import random
import secrets
from typing import MutableSequence, Protocol, TypeVar

from ecf.errors import RandomnessFailure

T = TypeVar("T")


class Randomness(Protocol):
    def bytes(self, n: int) -> bytes: ...

    def randbelow(self, n: int) -> int: ...


class SystemRandomness:
    """The operating system CSPRNG."""

    def bytes(self, n: int) -> bytes:
        try:
            out = os.urandom(n)
        except OSError as exc:  # pragma: no cover - platform failure
            raise RandomnessFailure(str(exc)) from exc
        if len(out) != n:  # pragma: no cover
            raise RandomnessFailure("short read from OS randomness source")
        return out

    def randbelow(self, n: int) -> int:
        return secrets.randbelow(n)


class SeededRandomness:
    """Deterministic, NOT cryptographically secure. For fixtures and tests."""

    def __init__(self, seed: int | str | bytes) -> None:
        self._r = random.Random(seed)

    def bytes(self, n: int) -> bytes:
        return self._r.randbytes(n)

    def randbelow(self, n: int) -> int:
        return self._r.randrange(n)


SYSTEM = SystemRandomness()


def default(rng: Randomness | None) -> Randomness:
    return SYSTEM if rng is None else rng


def uniform_int(rng: Randomness, low: int, high: int) -> int:
    """Uniform integer in the closed interval ``[low, high]``."""
    if high < low:
        raise ValueError(f"empty interval [{low}, {high}]")
    return low + rng.randbelow(high - low + 1)


def shuffle(items: MutableSequence[T], rng: Randomness) -> None:
    """In-place Fisher-Yates shuffle driven by ``rng``."""
    for i in range(len(items) - 1, 0, -1):
        j = rng.randbelow(i + 1)
        items[i], items[j] = items[j], items[i]
