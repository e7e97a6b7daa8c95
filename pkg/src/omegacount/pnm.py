"""Binary PNM (P5 graymap / P6 pixmap) frames, maxval 255 only.

Frames are immutable byte buffers; the coordinate convention everywhere in
this package is origin top-left with y growing downward.
"""

from __future__ import annotations

import fnmatch
import os
from dataclasses import dataclass

import numpy as np

from .errors import DecodeError, DimensionMismatchError

# BT.601 luma weights in integer per-mille, rounded half-up via the +500 bias.
GRAY_WEIGHTS = (299, 587, 114)


@dataclass(frozen=True)
class Frame:
    """One 8-bit raster: row-major, channel-interleaved samples."""

    width: int
    height: int
    channels: int
    samples: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame dimensions must be at least 1x1")
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        expected = self.width * self.height * self.channels
        if len(self.samples) != expected:
            raise ValueError(
                f"sample buffer holds {len(self.samples)} bytes, expected {expected}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Frame":
        a = np.ascontiguousarray(arr, dtype=np.uint8)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3:
            raise ValueError("expected a (height, width[, channels]) array")
        h, w, c = a.shape
        return cls(width=w, height=h, channels=c, samples=a.tobytes())

    def to_array(self) -> np.ndarray:
        """Read-only (height, width, channels) uint8 view of the samples."""
        a = np.frombuffer(self.samples, dtype=np.uint8)
        return a.reshape(self.height, self.width, self.channels)


def decode_pnm(data: bytes) -> Frame:
    """Decode a binary PNM stream (magic P5 or P6, maxval 255)."""
    magic = bytes(data[:2])
    if magic not in (b"P5", b"P6"):
        raise DecodeError("not a binary PNM stream (expected magic P5 or P6)", 0)
    channels = 1 if magic == b"P5" else 3

    pos = 2
    values = []
    for name in ("width", "height", "maxval"):
        token, start, pos = _next_token(data, pos)
        try:
            value = int(token)
        except ValueError:
            raise DecodeError(f"invalid {name} field {token!r}", start) from None
        if name != "maxval" and value < 1:
            raise DecodeError(f"{name} must be positive, got {value}", start)
        if name == "maxval" and value != 255:
            raise DecodeError(f"unsupported maxval {value}, only 255", start)
        values.append(value)
    width, height, _ = values

    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise DecodeError("expected single whitespace before payload", pos)
    pos += 1

    need = width * height * channels
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise DecodeError(
            f"truncated payload: expected {need} bytes, found {len(payload)}",
            pos + len(payload),
        )
    return Frame(width=width, height=height, channels=channels, samples=bytes(payload))


def _next_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    """Skip whitespace and # comments; return (token, start, end)."""
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise DecodeError("unexpected end of header", pos)
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], start, pos


def encode_pnm(frame: Frame) -> bytes:
    """Encode with the canonical header; byte-deterministic."""
    magic = b"P5" if frame.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (frame.width, frame.height)
    return header + frame.samples


def to_grayscale(frame: Frame) -> Frame:
    """Integer BT.601 grayscale; single-channel frames pass through unchanged."""
    if frame.channels == 1:
        return frame
    rgb = frame.to_array().astype(np.uint32)
    wr, wg, wb = GRAY_WEIGHTS
    gray = (wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2] + 500) // 1000
    return Frame.from_array(gray.astype(np.uint8))


class FrameSequence:
    """Lazily decoded, lexicographically ordered list of frame files.

    All frames must share dimensions and channel count; the first decoded
    frame fixes the reference and later mismatches raise naming the file.
    """

    def __init__(self, paths: list[str]):
        self.paths = list(paths)
        self._shape: tuple[int, int, int] | None = None

    def __len__(self) -> int:
        return len(self.paths)

    def frame(self, index: int) -> Frame:
        path = self.paths[index]
        with open(path, "rb") as fh:
            f = decode_pnm(fh.read())
        shape = (f.width, f.height, f.channels)
        if self._shape is None:
            self._shape = shape
        elif shape != self._shape:
            raise DimensionMismatchError(
                f"frame {path} is {shape[0]}x{shape[1]}x{shape[2]}, "
                f"sequence is {self._shape[0]}x{self._shape[1]}x{self._shape[2]}"
            )
        return f

    def __iter__(self):
        for i in range(len(self.paths)):
            yield self.frame(i)


def load_sequence(directory: str, pattern: str = "*.pgm") -> FrameSequence:
    """Enumerate matching files sorted lexicographically by file name."""
    names = os.listdir(directory)  # raises OSError for unreadable directories
    matched = sorted(n for n in names if fnmatch.fnmatchcase(n, pattern))
    return FrameSequence([os.path.join(directory, n) for n in matched])
