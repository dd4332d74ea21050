"""Best-effort erasure of secret buffers.

CPython gives no hard guarantees here: ``bytes`` objects are immutable and
the primitives we call return fresh copies. What we can do is keep our own
secret material in ``bytearray`` buffers and overwrite them in place as soon
as they are released. :func:`track_wipes` lets tests count those erasures.
"""

from __future__ import annotations

import contextlib
import threading
from collections.abc import Iterator

_local = threading.local()


class WipeCounter:
    def __init__(self) -> None:
        self.count = 0
        self.bytes = 0


def wipe(*buffers: bytearray | memoryview | None) -> None:
    """Overwrite each buffer with zeros in place. ``None`` is ignored."""
    for buf in buffers:
        if buf is None:
            continue
        if not isinstance(buf, (bytearray, memoryview)):
            raise TypeError(f"cannot wipe immutable {type(buf).__name__}")
        n = len(buf)
        buf[:] = bytes(n)
        for counter in getattr(_local, "counters", ()):
            counter.count += 1
            counter.bytes += n


@contextlib.contextmanager
def track_wipes() -> Iterator[WipeCounter]:
    """Count :func:`wipe` calls made by the current thread inside the block."""
    counter = WipeCounter()
    stack = getattr(_local, "counters", None)
    if stack is None:
        stack = _local.counters = []
    stack.append(counter)
    try:
        yield counter
    finally:
        stack.remove(counter)
