import struct
from typing import Tuple

import numpy as np

from gaussian_crowd.constants import (
    ERROR_BAD_MAGIC,
    ERROR_TRAILING_DATA,
    ERROR_TRUNCATED,
    ERROR_VERSION_MISMATCH,
)
from gaussian_crowd.errors import (
    BadMagicError,
    TrailingDataError,
    TruncatedFileError,
    VersionMismatchError,
)


class BinaryReader:
    """Little-endian cursor over an in-memory file; every read names its section"""

    def __init__(self, data: bytes, source: str):
        self.data = data
        self.source = source
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset

    def _take(self, size: int, section: str) -> bytes:
        available = self.remaining
        if size > available:
            raise TruncatedFileError(
                ERROR_TRUNCATED.format(self.source, section, size, self.offset, available),
                section,
                self.offset,
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, section: str) -> Tuple:
        return struct.unpack(fmt, self._take(struct.calcsize(fmt), section))

    def array(self, dtype: str, shape: Tuple[int, ...], section: str) -> np.ndarray:
        dt = np.dtype(dtype)
        count = int(np.prod(shape, dtype=np.int64))
        raw = self._take(count * dt.itemsize, section)
        return np.frombuffer(raw, dtype=dt, count=count).reshape(shape).copy()

    def expect_magic(self, magic: bytes) -> None:
        found = self._take(len(magic), "magic")
        if found != magic:
            raise BadMagicError(ERROR_BAD_MAGIC.format(self.source, magic, found))

    def expect_version(self, kind: str, version: int, expected: int) -> None:
        if version != expected:
            raise VersionMismatchError(
                ERROR_VERSION_MISMATCH.format(kind, version, self.source, expected)
            )

    def finish(self) -> None:
        extra = len(self.data) - self.offset
        if extra:
            raise TrailingDataError(ERROR_TRAILING_DATA.format(self.source, extra, self.offset))


def le_bytes(array: np.ndarray, dtype: str) -> bytes:
    """C-order little-endian bytes of ``array`` converted to ``dtype``"""
    return np.ascontiguousarray(array, dtype=np.dtype(dtype)).tobytes()
