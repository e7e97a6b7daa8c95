"""Synthetic labeled masks: head-neck-shoulder silhouettes and distractors.

Everything here is deterministic given the seed (see ``rng`` for the
generator constants), so corpora rebuild bit-identically on any platform.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ShapeFitError
from .mask import ForegroundMask, frame_to_mask, mask_to_frame
from .pnm import Frame, decode_pnm, encode_pnm
from .rng import XorShift64Star, gaussian_field

DISTRACTOR_KINDS = ("circle", "rectangle", "triangle", "blob", "vehicle")

DEFAULT_CANVAS = (160, 120)


@dataclass(frozen=True)
class OmegaShapeParams:
    """Silhouette parameters: ellipse head, neck column, shoulder trapezoid, torso.

    Row layout is derived so the neck sits at depth h/6 and the torso reaches
    full shoulder span by depth h/3, matching where the width descriptors
    sample. ``fig_height`` of None fills the canvas minus margins; ``center_x``
    / ``top`` of None center the figure horizontally and rest it 2 px above
    the canvas bottom.
    """

    a_h: int  # head horizontal semi-axis
    b_h: int  # head vertical semi-axis
    neck_width: int
    shoulder_span: int
    shoulder_drop: int
    jitter: int = 0
    seed: int = 0
    fig_height: int | None = None
    center_x: int | None = None
    top: int | None = None

    def __post_init__(self):
        if min(self.a_h, self.b_h, self.neck_width, self.shoulder_span, self.shoulder_drop) <= 0:
            raise ValueError("all shape dimensions must be positive")
        if not self.neck_width < 2 * self.a_h < self.shoulder_span:
            raise ValueError("need neck_width < head width (2*a_h) < shoulder_span")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")


@dataclass(frozen=True)
class OmegaTruth:
    """Ground truth recorded alongside a generated silhouette."""

    neck_width: int
    shoulder_span: int
    fig_height: int
    center_x: int
    top: int


def _omega_layout(params: OmegaShapeParams, fig_height: int):
    h = fig_height - 1
    band = max(1, round(h / 40))
    neck_end = math.ceil(h / 6) + band + 2
    torso_start = neck_end + params.shoulder_drop + 1
    if h / 6 - band < params.b_h:
        raise ShapeFitError("figure too short: neck row would fall inside the head")
    chin = params.b_h * (1 + math.sqrt(1 - (params.neck_width / (2 * params.a_h)) ** 2))
    if h / 6 < chin:
        raise ShapeFitError("figure too short: neck row would fall above the chin")
    if torso_start > math.floor(h / 3) - band:
        raise ShapeFitError("shoulder drop too deep: full span not reached by h/3")
    return band, neck_end, torso_start


def gen_omega(
    params: OmegaShapeParams, canvas: tuple[int, int] = DEFAULT_CANVAS
) -> tuple[ForegroundMask, OmegaTruth]:
    """Render one filled silhouette; returns the mask and its ground truth."""
    cw, ch = canvas
    fig_height = params.fig_height if params.fig_height is not None else ch - 4
    top = params.top if params.top is not None else ch - 2 - fig_height
    cx = params.center_x if params.center_x is not None else cw // 2

    _, neck_end, torso_start = _omega_layout(params, fig_height)
    half_span = params.shoulder_span / 2.0
    margin = 2
    if top < margin or top + fig_height > ch - margin:
        raise ShapeFitError(f"figure of height {fig_height} does not fit canvas height {ch}")
    if cx - half_span - params.jitter < margin or cx + half_span + params.jitter > cw - margin:
        raise ShapeFitError(f"figure of span {params.shoulder_span} does not fit canvas width {cw}")

    rng = XorShift64Star(params.seed)
    bits = np.zeros((ch, cw), dtype=bool)
    prev: tuple[int, int] | None = None
    for r in range(fig_height):
        half = 0.0
        if r <= 2 * params.b_h:
            dy = (r - params.b_h) / params.b_h
            half = params.a_h * math.sqrt(max(0.0, 1.0 - dy * dy))
        if params.b_h <= r <= neck_end:
            half = max(half, params.neck_width / 2.0)
        elif neck_end < r < torso_start:
            ramp = (r - neck_end) / (torso_start - 1 - neck_end or 1)
            half = max(half, params.neck_width / 2.0 + (params.shoulder_span - params.neck_width) / 2.0 * ramp)
        elif r >= torso_start:
            half = half_span

        jl = rng.randint(-params.jitter, params.jitter) if params.jitter else 0
        jr = rng.randint(-params.jitter, params.jitter) if params.jitter else 0
        if half < params.jitter + 1:  # keep the pinched head top connected
            jl = jr = 0
        # symmetric rasterization: run spans cx +- floor(half) regardless of
        # cx parity, so nominal widths land within 1 px of the drawn ones
        x0 = cx - math.floor(half) + jl
        x1 = cx + math.floor(half) + jr
        if prev is not None:  # force 8-connectivity with the previous row
            x0 = min(x0, prev[1] + 1)
            x1 = max(x1, prev[0] - 1)
        if x1 < x0:
            x0 = x1 = round(cx)
        bits[top + r, max(0, x0) : min(cw, x1 + 1)] = True
        prev = (x0, x1)

    truth = OmegaTruth(
        neck_width=params.neck_width,
        shoulder_span=params.shoulder_span,
        fig_height=fig_height,
        center_x=cx,
        top=top,
    )
    return ForegroundMask.from_array(bits), truth


def _fill_disk(bits: np.ndarray, cx: float, cy: float, r: float) -> None:
    h, w = bits.shape
    ys, xs = np.mgrid[0:h, 0:w]
    bits |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def gen_distractor(
    kind: str,
    size: int,
    seed: int,
    canvas: tuple[int, int] = DEFAULT_CANVAS,
    center: tuple[int, int] | None = None,
) -> ForegroundMask:
    """Deterministic filled non-human shape of roughly the given diameter."""
    if kind not in DISTRACTOR_KINDS:
        raise ValueError(f"unknown distractor kind {kind!r}")
    cw, ch = canvas
    if size + 6 > min(cw, ch):
        raise ShapeFitError(f"distractor size {size} does not fit canvas {cw}x{ch}")
    rng = XorShift64Star(seed)
    if center is None:
        half = size // 2 + 3
        center = (rng.randint(half, cw - half - 1), rng.randint(half, ch - half - 1))
    cx, cy = center
    bits = np.zeros((ch, cw), dtype=bool)

    if kind == "circle":
        _fill_disk(bits, cx, cy, size / 2.0)
    elif kind == "rectangle":
        w = size
        h = max(8, round(size * rng.uniform(0.45, 0.95)))
        bits[cy - h // 2 : cy - h // 2 + h, cx - w // 2 : cx - w // 2 + w] = True
    elif kind == "triangle":
        for _ in range(32):
            verts = np.array(
                [
                    (cx + rng.randint(-size // 2, size // 2), cy + rng.randint(-size // 2, size // 2))
                    for _ in range(3)
                ],
                dtype=np.float64,
            )
            area2 = abs(
                (verts[1, 0] - verts[0, 0]) * (verts[2, 1] - verts[0, 1])
                - (verts[1, 1] - verts[0, 1]) * (verts[2, 0] - verts[0, 0])
            )
            if area2 >= size * size / 4:
                break
        ys, xs = np.mgrid[0:ch, 0:cw]
        inside = np.ones((ch, cw), dtype=bool)
        for i in range(3):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % 3]
            side = (bx - ax) * (ys - ay) - (by - ay) * (xs - ax)
            orient = (bx - ax) * (verts[(i + 2) % 3, 1] - ay) - (by - ay) * (
                verts[(i + 2) % 3, 0] - ax
            )
            inside &= side * orient >= 0
        bits |= inside
    elif kind == "blob":
        x, y = float(cx), float(cy)
        r = max(3.0, size / 6.0)
        for _ in range(40):
            _fill_disk(bits, x, y, r)
            x = min(max(x + rng.randint(-3, 3), r + 2), cw - r - 3)
            y = min(max(y + rng.randint(-3, 3), r + 2), ch - r - 3)
    elif kind == "vehicle":
        body_h = max(10, round(size * 0.4))
        y0 = cy - body_h // 2
        bits[y0 : y0 + body_h, cx - size // 2 : cx - size // 2 + size] = True
        wheel_r = max(3, round(size * 0.16))
        inset = round(size * 0.24)
        for wx in (cx - size // 2 + inset, cx + size // 2 - inset):
            _fill_disk(bits, wx, y0 + body_h - 1, wheel_r)
    return ForegroundMask.from_array(bits)


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    label: str  # "human" | "non-human"
    params: dict
    seed: int


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[CorpusEntry, ...]

    def to_json(self) -> str:
        data = [asdict(e) for e in self.entries]
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CorpusManifest":
        data = json.loads(text)
        return cls(tuple(CorpusEntry(**item) for item in data))


def sample_human_params(rng: XorShift64Star, canvas: tuple[int, int], seed: int) -> OmegaShapeParams:
    """Draw silhouette parameters from the documented corpus ranges.

    Head a_h in [8, 16] capped so the apex stays the farthest point of the
    head arc, b_h in [5, 7], neck/shoulder ratio targeted in [0.30, 0.60],
    figure height in [88, canvas_h - 6], jitter in [0, 2].
    """
    cw, ch = canvas
    b_h = rng.randint(5, 7)
    fig_height = rng.randint(max(6 * (b_h + 3) + 8, 88), ch - 6)
    h = fig_height - 1
    # keep the apex the farthest point of the head arc seen from S at depth
    # h/4: requires a_h^2 < (h/4) * b_h, with ~15% headroom against jitter
    a_cap = math.floor(0.85 * math.sqrt(h * b_h / 4.0))
    a_h = rng.randint(8, max(8, min(16, a_cap)))
    span_hi = min(48, (2 * a_h - 2) * 10 // 3, cw - 12)
    span = rng.randint(2 * a_h + 8, span_hi)
    target = rng.uniform(0.30, 0.60)
    neck = min(max(round(target * span), math.ceil(0.3 * span)), 2 * a_h - 2, math.floor(0.6 * span))
    band = max(1, round(h / 40))
    neck_end = math.ceil(h / 6) + band + 2
    drop_hi = math.floor(h / 3) - band - neck_end - 1
    drop = rng.randint(3, min(9, drop_hi))
    jitter = rng.randint(0, 2)
    half = span // 2 + jitter + 3
    cx = rng.randint(half, cw - half - 1)
    top = rng.randint(2, ch - 2 - fig_height)
    return OmegaShapeParams(
        a_h=a_h, b_h=b_h, neck_width=neck, shoulder_span=span, shoulder_drop=drop,
        jitter=jitter, seed=seed, fig_height=fig_height, center_x=cx, top=top,
    )


def build_corpus(
    n_per_class: int,
    seed: int,
    out_dir: str,
    canvas: tuple[int, int] = DEFAULT_CANVAS,
) -> CorpusManifest:
    """Write n human + n distractor masks as P5 plus a JSON manifest.

    Entry i derives its generator seed as seed XOR i, so entries are
    independent of each other and rebuild identically.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    entries: list[CorpusEntry] = []
    for i in range(2 * n_per_class):
        entry_seed = seed ^ i
        rng = XorShift64Star(entry_seed)
        if i < n_per_class:
            params = sample_human_params(rng, canvas, entry_seed)
            mask, _ = gen_omega(params, canvas)
            name = f"human_{i:04d}.pgm"
            label = "human"
            params_dict = asdict(params)
        else:
            kind = rng.choice(DISTRACTOR_KINDS)
            size = rng.randint(30, 60)
            mask = gen_distractor(kind, size, entry_seed, canvas)
            name = f"other_{i - n_per_class:04d}.pgm"
            label = "non-human"
            params_dict = {"kind": kind, "size": size}
        with open(os.path.join(out_dir, name), "wb") as fh:
            fh.write(encode_pnm(mask_to_frame(mask)))
        entries.append(CorpusEntry(path=name, label=label, params=params_dict, seed=entry_seed))

    manifest = CorpusManifest(tuple(entries))
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(manifest.to_json())
    return manifest


def load_corpus_masks(manifest_path: str):
    """Yield (ForegroundMask, is_human) pairs for a manifest on disk."""
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path) as fh:
        manifest = CorpusManifest.from_json(fh.read())
    for entry in manifest.entries:
        with open(os.path.join(base, entry.path), "rb") as fh:
            frame = decode_pnm(fh.read())
        yield frame_to_mask(frame), entry.label == "human"


def gen_sequence(
    n_frames: int,
    width: int,
    height: int,
    seed: int,
    noise_sigma: float = 2.0,
    background: int = 60,
    square_size: int = 0,
    square_value: int = 220,
    entry_frame: int = 0,
    speed: int = 2,
) -> list[Frame]:
    """Grayscale test scene: flat background, Gaussian noise, optional moving square.

    The square enters from the left edge at ``entry_frame`` and advances
    ``speed`` px per frame at mid-height.
    """
    frames = []
    for i in range(n_frames):
        noise = gaussian_field(seed ^ (0x5EED << 8) ^ i, (height, width), noise_sigma)
        img = np.clip(background + noise, 0, 255)
        if square_size and i >= entry_frame:
            x0 = (i - entry_frame) * speed
            y0 = (height - square_size) // 2
            if x0 < width:
                img[y0 : y0 + square_size, x0 : min(width, x0 + square_size)] = square_value
        frames.append(Frame.from_array(img.astype(np.uint8)))
    return frames


def paste(frame: Frame, mask: ForegroundMask, value: int = 220) -> Frame:
    """Stamp a mask into a grayscale frame at the given intensity."""
    img = np.array(frame.to_array()[:, :, 0])
    img[mask.bits] = value
    return Frame.from_array(img)
