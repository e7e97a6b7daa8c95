"""Per-frame orchestration: subtraction, contours, classification, counting.

Reports serialize as JSON Lines, one object per frame with keys
frame, count, contours[] and timings_ms; annotated frames render as P6.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .background import BackgroundModel, MogConfig, model_new, process_frame
from .contour import Component, ContourPath, label_components, trace_boundary
from .descriptors import DescriptorOutcome, OmegaConfig, classify
from .errors import TooSmallToTraceError
from .mask import ForegroundMask
from .pnm import Frame, FrameSequence

HUMAN_COLOR = (0, 255, 0)
OTHER_COLOR = (255, 0, 0)

# count strip geometry: one bar per counted human at the top-left corner
BAR_WIDTH = 2
BAR_HEIGHT = 8
BAR_STRIDE = 3  # bar plus 1 px gap
BAR_ORIGIN = (1, 1)  # (x, y)


@dataclass(frozen=True)
class ContourDecision:
    component: Component
    path: ContourPath
    outcome: DescriptorOutcome


@dataclass(frozen=True)
class DetectionReport:
    frame_index: int
    decisions: tuple[ContourDecision, ...]
    human_count: int
    timings_ms: dict[str, float]


def detect_in_mask(
    mask: ForegroundMask,
    cfg: OmegaConfig,
    min_area: int | None = None,
    frame_index: int = 0,
    opening: bool = False,
) -> DetectionReport:
    """Label, trace, and classify every component of a pre-segmented mask."""
    t0 = time.perf_counter()
    components = label_components(mask, min_area=min_area, opening=opening)
    t1 = time.perf_counter()
    decisions = []
    for comp in components:
        try:
            path = trace_boundary(mask, comp)
        except TooSmallToTraceError:
            continue
        decisions.append(ContourDecision(comp, path, classify(path, cfg)))
    t2 = time.perf_counter()
    return DetectionReport(
        frame_index=frame_index,
        decisions=tuple(decisions),
        human_count=sum(1 for d in decisions if d.outcome.is_human),
        timings_ms={
            "label": (t1 - t0) * 1000.0,
            "classify": (t2 - t1) * 1000.0,
            "total": (t2 - t0) * 1000.0,
        },
    )


def process_sequence(
    seq: FrameSequence,
    mog_cfg: MogConfig = MogConfig(),
    omega_cfg: OmegaConfig = OmegaConfig(),
    min_area: int | None = None,
    burn_in: int = 50,
    threads: int = 1,
    opening: bool = False,
) -> Iterator[DetectionReport]:
    """Run the full pipeline over a sequence, in frame order.

    The model initializes from frame 0; reports for the first ``burn_in``
    frames are suppressed while the background adapts.
    """
    if len(seq) == 0:
        return
    first = seq.frame(0)
    model = model_new(first.width, first.height, first.channels, first, mog_cfg)
    for index in range(len(seq)):
        frame = seq.frame(index) if index else first
        t0 = time.perf_counter()
        mask = process_frame(model, frame, threads=threads)
        t1 = time.perf_counter()
        if index < burn_in:
            continue
        report = detect_in_mask(
            mask, omega_cfg, min_area=min_area, frame_index=index, opening=opening
        )
        timings = {"bgsub": (t1 - t0) * 1000.0}
        timings.update(report.timings_ms)
        timings["total"] = timings["bgsub"] + report.timings_ms["total"]
        yield DetectionReport(
            frame_index=index,
            decisions=report.decisions,
            human_count=report.human_count,
            timings_ms=timings,
        )


def report_to_dict(report: DetectionReport, with_timing: bool = True) -> dict:
    contours = []
    for dec in report.decisions:
        out = dec.outcome
        contours.append(
            {
                "id": dec.component.label,
                "bbox": {
                    "xmin": dec.component.xmin,
                    "xmax": dec.component.xmax,
                    "ymin": dec.component.ymin,
                    "ymax": dec.component.ymax,
                },
                "votes": {"d": out.omega_d, "m": out.omega_m, "k": out.omega_k, "s": out.omega_s},
                "values": {
                    "m1": out.m1,
                    "m2": out.m2,
                    "ratio": out.ratio,
                    "s_prime": out.s_prime,
                    "max_other": out.max_other,
                    "minima_count": out.minima_count,
                    "r_s": out.r_s,
                },
                "h_score": out.h_score,
                "is_human": out.is_human,
                "degenerate": list(out.degenerate),
            }
        )
    data = {"frame": report.frame_index, "count": report.human_count, "contours": contours}
    if with_timing:
        data["timings_ms"] = report.timings_ms
    return data


def report_to_jsonl(report: DetectionReport, with_timing: bool = True) -> str:
    return json.dumps(report_to_dict(report, with_timing=with_timing), separators=(",", ":"))


def render_annotations(frame: Frame, report: DetectionReport) -> Frame:
    """RGB copy with 1 px bbox outlines and the count bar strip.

    Humans get green boxes, everything else red; the strip burns one filled
    2x8 green bar per counted human starting at (1, 1) with 1 px gaps.
    """
    arr = frame.to_array()
    if frame.channels == 1:
        arr = np.repeat(arr, 3, axis=2)
    img = np.array(arr)  # writable copy

    h, w = img.shape[:2]
    for dec in report.decisions:
        color = HUMAN_COLOR if dec.outcome.is_human else OTHER_COLOR
        x0, x1 = max(0, dec.component.xmin), min(w - 1, dec.component.xmax)
        y0, y1 = max(0, dec.component.ymin), min(h - 1, dec.component.ymax)
        img[y0, x0 : x1 + 1] = color
        img[y1, x0 : x1 + 1] = color
        img[y0 : y1 + 1, x0] = color
        img[y0 : y1 + 1, x1] = color

    bx, by = BAR_ORIGIN
    for i in range(report.human_count):
        x0 = bx + i * BAR_STRIDE
        if x0 + BAR_WIDTH > w:
            break
        img[by : min(h, by + BAR_HEIGHT), x0 : x0 + BAR_WIDTH] = HUMAN_COLOR
    return Frame.from_array(img)
