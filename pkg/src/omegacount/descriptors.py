"""Head-neck-shoulder shape descriptors and the weighted human/non-human vote.

Four descriptors each cast a binary vote on one contour: the neck/shoulder
width ratio, the radial profile of the head arc, the count of curvature
minima over the upper third, and the bounding-box/convex-hull area ratio.
The votes are fused as a weighted sum compared against a threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .contour import (
    ContourPath,
    convex_hull,
    count_local_minima,
    curvature_series,
    polygon_area,
    upper_segment,
)
from .errors import (
    CalibrationError,
    DegenerateContourError,
    DegenerateHullError,
    TooShortPathError,
)

OMEGA_CONFIG_KEYS = (
    "t_d", "eps_d", "kappa_s", "a1", "a2", "r1", "r2",
    "s_d", "s_m", "s_k", "s_s", "omega_th",
    "row_band", "smooth_window", "delta", "neighborhood",
)


@dataclass(frozen=True)
class OmegaConfig:
    """Descriptor thresholds, fusion weights, and sampling geometry.

    ``row_band`` of None selects the automatic per-contour half-height
    max(1, round(h / 40)). All other defaults are the shipped fallbacks;
    ``calibrate`` on a labeled corpus is the authoritative source.
    """

    t_d: float = 0.45
    eps_d: float = 0.15
    kappa_s: float = 0.25
    a1: int = 1
    a2: int = 18
    r1: float = 1.05
    r2: float = 1.60
    s_d: float = 0.25
    s_m: float = 0.25
    s_k: float = 0.25
    s_s: float = 0.25
    omega_th: float = 0.75
    row_band: int | None = None
    smooth_window: int = 7
    delta: int = 5
    neighborhood: int = 5

    def __post_init__(self):
        if not 0 < self.t_d < 1:
            raise ValueError("t_d must be in (0, 1)")
        if self.a1 >= self.a2:
            raise ValueError("a1 must be < a2")
        if not 1 <= self.r1 < self.r2:
            raise ValueError("need 1 <= r1 < r2")
        for name in ("s_d", "s_m", "s_k", "s_s"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0 <= self.omega_th <= self.s_d + self.s_m + self.s_k + self.s_s + 1e-9:
            raise ValueError("omega_th must be in [0, sum of weights]")

    def to_json(self) -> str:
        data = {key: getattr(self, key) for key in OMEGA_CONFIG_KEYS}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OmegaConfig":
        data = json.loads(text)
        kwargs = {key: data[key] for key in OMEGA_CONFIG_KEYS if key in data}
        return cls(**kwargs)

    def row_band_for(self, h: int) -> int:
        # auto band stays narrow: min/max over a tall band biases widths on
        # sloped boundaries, and every row of a closed boundary is populated
        if self.row_band is not None:
            return self.row_band
        return max(1, round(h / 80))


@dataclass(frozen=True)
class DescriptorOutcome:
    """Raw measurements, the four binary votes, and the fused decision."""

    m1: float | None
    m2: float | None
    ratio: float | None
    omega_d: int
    s_prime: float | None
    max_other: float | None
    omega_m: int
    minima_count: int | None
    omega_k: int
    a_r: float | None
    a_c: float | None
    r_s: float | None
    omega_s: int
    h_score: float
    is_human: bool
    degenerate: tuple[str, ...] = ()


def descriptor_dimensions(path: ContourPath, cfg: OmegaConfig):
    """Neck width m1, shoulder width m2, their ratio, and the band vote.

    Widths are read off the boundary at depths h/6 (neck) and h/3 (shoulder):
    points within the row band are split by the centroid x into left and
    right sets; the neck is the inner gap, the shoulder the outer extent.
    """
    h = path.h
    if h < 12:
        return None, None, None, 0, "undersized"
    d = h / 3.0
    y_neck = d / 2.0
    y_shoulder = d
    band = cfg.row_band_for(h)
    # bbox-relative coordinates keep results bit-identical under translation
    cx = path.centroid_offset[0]
    xs = path.points[:, 0] - path.xmin
    ys = path.points[:, 1] - path.ymin

    def split(row):
        sel = np.abs(ys - row) <= band
        left = xs[sel & (xs < cx)]
        right = xs[sel & (xs > cx)]
        return left, right

    left_n, right_n = split(y_neck)
    left_s, right_s = split(y_shoulder)
    if min(left_n.size, right_n.size, left_s.size, right_s.size) == 0:
        return None, None, None, 0, "one-sided-band"
    m1 = abs(float(right_n.min() - left_n.max()))
    m2 = abs(float(right_s.max() - left_s.min()))
    if m2 == 0:
        return m1, m2, None, 0, "zero-shoulder-width"
    ratio = m1 / m2
    vote = 1 if abs(ratio - cfg.t_d) <= cfg.eps_d else 0
    return m1, m2, ratio, vote, None


def descriptor_radial(path: ContourPath, cfg: OmegaConfig):
    """Distance from the interior point S to the apex vs. the rest of the head arc.

    S sits kappa_s * h below the top on the centroid vertical. The vote passes
    only when the apex is strictly the farthest of all boundary points above S.
    """
    h = path.h
    # bbox-relative coordinates keep results bit-identical under translation
    xs = path.points[:, 0] - path.xmin
    ys = path.points[:, 1] - path.ymin
    sx = path.centroid_offset[0]
    sy = cfg.kappa_s * h

    cand = np.flatnonzero(ys == 0)
    order = np.lexsort((xs[cand], np.abs(xs[cand] - sx)))
    apex_idx = int(cand[order[0]])
    s_prime = math.hypot(xs[apex_idx] - sx, 0.0 - sy)

    above = np.flatnonzero(ys < sy)
    above = above[above != apex_idx]
    if above.size == 0:
        return s_prime, None, 0, "no-competing-points"
    dx = xs[above] - sx
    dy = ys[above] - sy
    max_other = float(np.sqrt(dx * dx + dy * dy).max())
    vote = 1 if s_prime > max_other else 0
    return s_prime, max_other, vote, None


def descriptor_curvature(path: ContourPath, cfg: OmegaConfig):
    """Count of strict curvature minima over the upper third of the boundary."""
    try:
        segment = upper_segment(path, 1.0 / 3.0)
        # bbox-relative coordinates keep smoothing translation-invariant
        segment = segment - np.array([path.xmin, path.ymin], dtype=segment.dtype)
        series = curvature_series(
            segment, smooth_window=cfg.smooth_window, delta=cfg.delta, closed=False
        )
    except (DegenerateContourError, TooShortPathError):
        return None, 0, "segment-too-short"
    count = count_local_minima(np.abs(series), cfg.neighborhood)
    vote = 1 if cfg.a1 < count < cfg.a2 else 0
    return count, vote, None


def descriptor_convexity(path: ContourPath, cfg: OmegaConfig):
    """Bounding-rectangle area over convex-hull area of the upper segment."""
    try:
        segment = upper_segment(path, 1.0 / 3.0)
    except DegenerateContourError:
        return None, None, None, 0, "segment-empty"
    xs, ys = segment[:, 0], segment[:, 1]
    a_r = float((xs.max() - xs.min()) * (ys.max() - ys.min()))
    try:
        hull = convex_hull(segment)
    except DegenerateHullError:
        return a_r, None, None, 0, "degenerate-hull"
    a_c = polygon_area(hull)
    if a_c == 0:
        return a_r, a_c, None, 0, "zero-hull-area"
    r_s = a_r / a_c
    vote = 1 if cfg.r1 < r_s < cfg.r2 else 0
    return a_r, a_c, r_s, vote, None


def classify(path: ContourPath, cfg: OmegaConfig) -> DescriptorOutcome:
    """Run all four descriptors and fuse their votes.

    Degenerate descriptors never raise; they vote 0 and are flagged.
    """
    flags: list[str] = []

    m1, m2, ratio, v_d, flag = descriptor_dimensions(path, cfg)
    if flag:
        flags.append(f"dimensions:{flag}")
    s_prime, max_other, v_m, flag = descriptor_radial(path, cfg)
    if flag:
        flags.append(f"radial:{flag}")
    minima, v_k, flag = descriptor_curvature(path, cfg)
    if flag:
        flags.append(f"curvature:{flag}")
    a_r, a_c, r_s, v_s, flag = descriptor_convexity(path, cfg)
    if flag:
        flags.append(f"convexity:{flag}")

    h_score = cfg.s_d * v_d + cfg.s_m * v_m + cfg.s_k * v_k + cfg.s_s * v_s
    return DescriptorOutcome(
        m1=m1, m2=m2, ratio=ratio, omega_d=v_d,
        s_prime=s_prime, max_other=max_other, omega_m=v_m,
        minima_count=minima, omega_k=v_k,
        a_r=a_r, a_c=a_c, r_s=r_s, omega_s=v_s,
        h_score=h_score,
        is_human=h_score >= cfg.omega_th,
        degenerate=tuple(flags),
    )


@dataclass(frozen=True)
class CalibrationGrid:
    """Search ranges for ``calibrate``; weights and omega_th move in 0.05 steps."""

    t_d: tuple = (0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60)
    eps_d: tuple = (0.05, 0.10, 0.15, 0.20, 0.25)
    a1: tuple = (0, 1, 2, 3, 4, 5, 6)
    a2: tuple = (6, 8, 10, 12, 14, 16, 18, 20)
    r1: tuple = (1.00, 1.05, 1.10, 1.20)
    r2: tuple = (1.40, 1.60, 1.80, 2.20)
    quantum: float = 0.05


@dataclass(frozen=True)
class Measurement:
    """Per-contour raw values; sufficient to re-vote under any thresholds."""

    ratio: float | None
    vote_m: int
    minima_count: int | None
    r_s: float | None


def measure(path: ContourPath, base: OmegaConfig) -> Measurement:
    """Raw descriptor values under the base geometry (band, S point, smoothing)."""
    _, _, ratio, _, _ = descriptor_dimensions(path, base)
    _, _, vote_m, _ = descriptor_radial(path, base)
    minima, _, _ = descriptor_curvature(path, base)
    _, _, r_s, _, _ = descriptor_convexity(path, base)
    return Measurement(ratio=ratio, vote_m=vote_m, minima_count=minima, r_s=r_s)


def _threshold_functions(quantum: float):
    """Distinct vote-pattern decision maps reachable by quantized weights.

    Weights are enumerated on the simplex (sum exactly 1; scaling weights and
    threshold together never changes the decision), thresholds on [0, 1].
    Returns (functions (16, U) uint8 ordered by first reachable combo, and the
    canonical (weights, omega_th) per function).
    """
    units = round(1.0 / quantum)
    combos = []
    for u_d in range(units + 1):
        for u_m in range(units + 1 - u_d):
            for u_k in range(units + 1 - u_d - u_m):
                u_s = units - u_d - u_m - u_k
                combos.append((u_d, u_m, u_k, u_s))
    weights = np.array(combos, dtype=np.float64) * quantum  # (W, 4)
    thresholds = np.arange(units + 1, dtype=np.float64) * quantum  # (T,)

    patterns = np.array(
        [[(p >> b) & 1 for b in range(4)] for p in range(16)], dtype=np.float64
    )  # (16, 4), bit order d, m, k, s
    scores = patterns @ weights.T  # (16, W)
    decisions = scores[:, :, None] >= thresholds[None, None, :]  # (16, W, T)
    flat = decisions.reshape(16, -1)

    keys = np.zeros(flat.shape[1], dtype=np.uint32)
    for bit in range(16):
        keys |= flat[bit].astype(np.uint32) << bit
    _, first = np.unique(keys, return_index=True)
    first = np.sort(first)

    funcs = flat[:, first].astype(np.uint8)
    canon = []
    n_t = len(thresholds)
    for j in first.tolist():
        w_idx, t_idx = divmod(j, n_t)
        canon.append((tuple(float(v) for v in weights[w_idx]), float(thresholds[t_idx])))
    return funcs, canon


def calibrate(
    samples: Sequence[tuple[ContourPath, bool]],
    grid: CalibrationGrid | None = None,
    base: OmegaConfig | None = None,
) -> OmegaConfig:
    """Exhaustive grid search maximizing balanced accuracy on a labeled corpus.

    Ties break toward smaller eps_d, then narrower (a1, a2), then narrower
    (r1, r2), then by enumeration order; the result is deterministic for a
    given corpus and grid.
    """
    cfg, _ = calibrate_detailed(samples, grid=grid, base=base)
    return cfg


def calibrate_detailed(
    samples: Sequence[tuple[ContourPath, bool]],
    grid: CalibrationGrid | None = None,
    base: OmegaConfig | None = None,
) -> tuple[OmegaConfig, float]:
    grid = grid or CalibrationGrid()
    base = base or OmegaConfig()

    labels = np.array([bool(lab) for _, lab in samples])
    if labels.all() or not labels.any():
        raise CalibrationError("corpus must contain both classes")
    measurements = [measure(path, base) for path, _ in samples]
    n = len(measurements)

    ratio = np.array([m.ratio if m.ratio is not None else np.nan for m in measurements])
    minima = np.array(
        [m.minima_count if m.minima_count is not None else -1 for m in measurements]
    )
    r_s = np.array([m.r_s if m.r_s is not None else np.nan for m in measurements])
    vote_m = np.array([m.vote_m for m in measurements], dtype=np.int64)

    d_combos = list(product(grid.t_d, grid.eps_d))
    a_combos = [(a1, a2) for a1, a2 in product(grid.a1, grid.a2) if a1 < a2]
    r_combos = [(r1, r2) for r1, r2 in product(grid.r1, grid.r2) if r1 < r2]

    with np.errstate(invalid="ignore"):
        votes_d = np.array(
            [np.abs(ratio - t) <= e for t, e in d_combos], dtype=np.int64
        )  # NaN compares false: degenerate contours always vote 0
        votes_k = np.array([(a1 < minima) & (minima < a2) for a1, a2 in a_combos], dtype=np.int64)
        votes_s = np.array([(r1 < r_s) & (r_s < r2) for r1, r2 in r_combos], dtype=np.int64)

    funcs, canon = _threshold_functions(grid.quantum)
    not_funcs = 1 - funcs
    pos, neg = labels, ~labels
    n_pos, n_neg = int(pos.sum()), int(neg.sum())

    best_key = None
    best = None
    for (di, (t_d, eps_d)), (ai, (a1, a2)), (ri, (r1, r2)) in product(
        enumerate(d_combos), enumerate(a_combos), enumerate(r_combos)
    ):
        pattern = votes_d[di] + 2 * vote_m + 4 * votes_k[ai] + 8 * votes_s[ri]
        hist_pos = np.bincount(pattern[pos], minlength=16).astype(np.float64)
        hist_neg = np.bincount(pattern[neg], minlength=16).astype(np.float64)
        tp = hist_pos @ funcs
        tn = hist_neg @ not_funcs
        acc = 0.5 * (tp / n_pos + tn / n_neg)
        u = int(np.argmax(acc))  # first maximum = smallest canonical index
        key = (-acc[u], eps_d, a2 - a1, r2 - r1, t_d, a1, r1, u)
        if best_key is None or key < best_key:
            best_key = key
            best = (t_d, eps_d, a1, a2, r1, r2, canon[u], float(acc[u]))

    t_d, eps_d, a1, a2, r1, r2, (w, th), acc = best
    cfg = replace(
        base,
        t_d=t_d, eps_d=eps_d, a1=a1, a2=a2, r1=r1, r2=r2,
        s_d=w[0], s_m=w[1], s_k=w[2], s_s=w[3], omega_th=th,
    )
    return cfg, acc


def evaluate(samples: Iterable[tuple[ContourPath, bool]], cfg: OmegaConfig) -> float:
    """Balanced accuracy of ``classify`` under ``cfg`` on a labeled corpus."""
    tp = fp = tn = fn = 0
    for path, label in samples:
        predicted = classify(path, cfg).is_human
        if label:
            tp += predicted
            fn += not predicted
        else:
            tn += not predicted
            fp += predicted
    if (tp + fn) == 0 or (tn + fp) == 0:
        raise CalibrationError("corpus must contain both classes")
    return 0.5 * (tp / (tp + fn) + tn / (tn + fp))
