"""Binary foreground masks and their PNM import/export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pnm import Frame


@dataclass(frozen=True)
class ForegroundMask:
    """One boolean per pixel, true = foreground."""

    width: int
    height: int
    bits: np.ndarray  # (height, width) bool

    def __post_init__(self):
        if self.bits.shape != (self.height, self.width):
            raise ValueError("mask bits shape does not match width/height")

    @classmethod
    def from_array(cls, bits: np.ndarray) -> "ForegroundMask":
        b = np.asarray(bits, dtype=bool)
        return cls(width=b.shape[1], height=b.shape[0], bits=b)


def mask_to_frame(mask: ForegroundMask) -> Frame:
    """Export as P5 raster: foreground 255, background 0."""
    return Frame.from_array(np.where(mask.bits, 255, 0).astype(np.uint8))


def frame_to_mask(frame: Frame, threshold: int = 128) -> ForegroundMask:
    """Read a P5 mask back: samples >= threshold count as foreground."""
    arr = frame.to_array()
    if frame.channels != 1:
        arr = arr.max(axis=2, keepdims=True)
    return ForegroundMask.from_array(arr[:, :, 0] >= threshold)
