"""Throughput benchmarks: background subtraction per backend, and detection.

Used by the ``bench`` CLI subcommand and the acceptance suite. Frames are
pregenerated so only the measured stage is timed.
"""

from __future__ import annotations

import time

import numpy as np

from ._kernel import available_backends
from .background import MogConfig, model_new, process_frame
from .descriptors import OmegaConfig
from .mask import ForegroundMask
from .pipeline import detect_in_mask
from .synth import OmegaShapeParams, gen_distractor, gen_omega, gen_sequence


def _stats(samples_ms: list[float], total_s: float) -> dict:
    arr = np.asarray(samples_ms)
    return {
        "frames": len(samples_ms),
        "median_ms": float(np.median(arr)),
        "p95_ms": float(np.percentile(arr, 95)),
        "fps": len(samples_ms) / total_s if total_s > 0 else float("inf"),
    }


def bench_background(
    width: int = 160,
    height: int = 120,
    frames: int = 200,
    warmup: int = 50,
    threads: int = 1,
    backend: str | None = None,
    seed: int = 1234,
    config: MogConfig = MogConfig(),
) -> dict:
    """Time process_frame over a noisy scene with a moving square."""
    sequence = gen_sequence(
        frames + warmup, width, height, seed,
        noise_sigma=2.0, square_size=max(8, height // 6), entry_frame=warmup // 2,
    )
    model = model_new(width, height, 1, sequence[0], config, backend=backend)
    for frame in sequence[:warmup]:
        process_frame(model, frame, threads=threads)
    samples = []
    t_start = time.perf_counter()
    for frame in sequence[warmup:]:
        t0 = time.perf_counter()
        process_frame(model, frame, threads=threads)
        samples.append((time.perf_counter() - t0) * 1000.0)
    total = time.perf_counter() - t_start
    stats = _stats(samples, total)
    stats["threads"] = threads
    return stats


def _bench_masks(width: int, height: int, seed: int) -> list[ForegroundMask]:
    """A handful of masks, each with at most 5 contours."""
    from .errors import ShapeFitError

    masks = []
    for i in range(8):
        bits = np.zeros((height, width), dtype=bool)
        n_shapes = 3 + (i % 3)  # 3..5 contours
        for j in range(n_shapes):
            cx = int((j + 0.5) * width / n_shapes)
            shape = None
            if (i + j) % 2 == 0:
                params = OmegaShapeParams(
                    a_h=10, b_h=6, neck_width=14, shoulder_span=34, shoulder_drop=4,
                    jitter=1, seed=seed ^ (i * 8 + j),
                    fig_height=min(100, height - 6), center_x=cx, top=3,
                )
                try:
                    shape, _ = gen_omega(params, (width, height))
                except ShapeFitError:
                    shape = None  # canvas too small for a silhouette
            if shape is None:
                kind = ("circle", "rectangle", "vehicle")[j % 3]
                shape = gen_distractor(kind, min(34, max(12, height // 3)),
                                       seed ^ (i * 8 + j),
                                       (width, height), center=(cx, height // 2))
            bits |= shape.bits
        masks.append(ForegroundMask.from_array(bits))
    return masks


def bench_detection(
    width: int = 160,
    height: int = 120,
    frames: int = 200,
    warmup: int = 20,
    seed: int = 99,
    cfg: OmegaConfig = OmegaConfig(),
    min_area: int | None = None,
) -> dict:
    """Time detect_in_mask over masks holding <= 5 contours each."""
    masks = _bench_masks(width, height, seed)
    for i in range(warmup):
        detect_in_mask(masks[i % len(masks)], cfg, min_area=min_area)
    samples = []
    t_start = time.perf_counter()
    for i in range(frames):
        mask = masks[i % len(masks)]
        t0 = time.perf_counter()
        detect_in_mask(mask, cfg, min_area=min_area)
        samples.append((time.perf_counter() - t0) * 1000.0)
    total = time.perf_counter() - t_start
    return _stats(samples, total)


def run_full_bench(
    width: int = 160,
    height: int = 120,
    frames: int = 200,
    warmup: int = 50,
    threads: int = 1,
    seed: int = 1234,
) -> dict:
    """Compare every available backend, single- and multi-threaded."""
    report: dict = {
        "resolution": f"{width}x{height}",
        "frames": frames,
        "warmup": warmup,
        "backends": {},
    }
    thread_counts = [1] if threads <= 1 else [1, threads]
    for backend in available_backends():
        runs = {}
        for t in thread_counts:
            stats = bench_background(
                width, height, frames=frames, warmup=warmup,
                threads=t, backend=backend, seed=seed,
            )
            runs["single" if t == 1 else f"threads_{t}"] = stats
        report["backends"][backend] = runs
    report["detection"] = bench_detection(width, height, frames=frames, seed=seed)
    return report
