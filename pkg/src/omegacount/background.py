"""Adaptive per-pixel Gaussian-mixture background model.

Each pixel carries K weighted Gaussians sorted by descending rank w/sigma.
An incoming value is matched against components in rank order; the first
component within match_d standard deviations absorbs it, everything else
decays. When nothing matches, the lowest-rank component is replaced by a
fresh wide Gaussian centered on the value. A pixel is foreground when its
value matched no component inside the background prefix: the shortest
top-ranked run whose weights sum past T.

The inner loop lives in a compiled kernel with a numpy fallback (see
``_kernel``); both produce interchangeable results. Row bands of one frame
may update concurrently; frames themselves must be processed in order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import DimensionMismatchError
from .mask import ForegroundMask, mask_to_frame  # re-exported: P5 mask export
from .pnm import Frame

__all__ = [
    "MogConfig", "GaussianComponent", "PixelMixture", "BackgroundModel",
    "ForegroundMask", "mask_to_frame", "model_new", "match_component",
    "update_pixel", "process_frame", "background_count",
]

MOG_CONFIG_KEYS = ("k", "alpha", "match_d", "t", "sigma_init", "sigma_floor", "w_new_floor")

_EXECUTORS: dict[int, ThreadPoolExecutor] = {}


@dataclass(frozen=True)
class MogConfig:
    """Mixture size, learning rate, match distance, and background threshold."""

    k: int = 3
    alpha: float = 0.01
    match_d: float = 2.5
    t: float = 0.7
    sigma_init: float = 30.0
    sigma_floor: float = 4.0
    w_new_floor: float = 0.05

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must be in [0, 1)")
        if not 0 < self.t < 1:
            raise ValueError("t must be in (0, 1)")
        if self.sigma_floor <= 0 or self.sigma_init <= 0:
            raise ValueError("sigma_init and sigma_floor must be positive")
        if self.match_d <= 0:
            raise ValueError("match_d must be positive")
        if not 0 < self.w_new_floor <= 1:
            raise ValueError("w_new_floor must be in (0, 1]")

    def to_json(self) -> str:
        return json.dumps({key: getattr(self, key) for key in MOG_CONFIG_KEYS},
                          indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MogConfig":
        data = json.loads(text)
        return cls(**{key: data[key] for key in MOG_CONFIG_KEYS if key in data})


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: tuple[float, ...]
    sigma: float

    @property
    def rank(self) -> float:
        return self.weight / self.sigma


@dataclass(frozen=True)
class PixelMixture:
    """K components sorted by descending rank; weights sum to 1."""

    components: tuple[GaussianComponent, ...]

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(c.weight for c in self.components)


def _norm_const(channels: int) -> float:
    return math.pow(2.0 * math.pi, channels / 2.0)


class BackgroundModel:
    """Stateful mixture grid for one frame geometry."""

    def __init__(self, width: int, height: int, channels: int, config: MogConfig,
                 backend: str | None = None):
        self.width = width
        self.height = height
        self.channels = channels
        self.config = config
        self.frames_seen = 0
        self._kernel = _kernel.get_kernel(backend)
        n, k, c = width * height, config.k, channels
        self._w = np.zeros((n, k), dtype=np.float64)
        self._mu = np.zeros((n, k, c), dtype=np.float64)
        self._sigma = np.full((n, k), config.sigma_init, dtype=np.float64)
        self._norm = _norm_const(c)

    def mixture_at(self, x: int, y: int) -> PixelMixture:
        p = y * self.width + x
        comps = tuple(
            GaussianComponent(
                weight=float(self._w[p, j]),
                mean=tuple(float(v) for v in self._mu[p, j]),
                sigma=float(self._sigma[p, j]),
            )
            for j in range(self.config.k)
        )
        return PixelMixture(comps)


def model_new(width: int, height: int, channels: int, first_frame: Frame,
              config: MogConfig = MogConfig(), backend: str | None = None) -> BackgroundModel:
    """Initialize from the first frame: component 0 owns each pixel with weight 1."""
    if (first_frame.width, first_frame.height, first_frame.channels) != (width, height, channels):
        raise DimensionMismatchError(
            f"first frame is {first_frame.width}x{first_frame.height}x{first_frame.channels}, "
            f"expected {width}x{height}x{channels}"
        )
    model = BackgroundModel(width, height, channels, config, backend=backend)
    z = first_frame.to_array().reshape(-1, channels).astype(np.float64)
    model._mu[:] = z[:, None, :]
    model._w[:, 0] = 1.0
    return model


def match_component(component: GaussianComponent, z, d: float) -> bool:
    """True when ||z - mean|| < d * sigma."""
    zv = np.atleast_1d(np.asarray(z, dtype=np.float64))
    mv = np.asarray(component.mean, dtype=np.float64)
    if zv.shape != mv.shape:
        raise ValueError(f"value has {zv.shape[0]} channels, mean has {mv.shape[0]}")
    return float(np.sqrt(((zv - mv) ** 2).sum())) < d * component.sigma


def update_pixel(mixture: PixelMixture, z, config: MogConfig) -> tuple[PixelMixture, bool]:
    """One mixture update; returns the new mixture and the foreground flag."""
    k = len(mixture.components)
    if k != config.k:
        raise ValueError(f"mixture has {k} components, config expects {config.k}")
    c = len(mixture.components[0].mean)
    w = np.array([[comp.weight for comp in mixture.components]], dtype=np.float64)
    mu = np.array([[comp.mean for comp in mixture.components]], dtype=np.float64)
    sigma = np.array([[comp.sigma for comp in mixture.components]], dtype=np.float64)
    zv = np.atleast_1d(np.asarray(z, dtype=np.float64)).reshape(1, c)
    fg = np.zeros(1, dtype=np.uint8)
    _kernel.update_grid(
        w, mu, sigma, zv, fg,
        config.alpha, config.match_d, config.t,
        config.sigma_init, config.sigma_floor, config.w_new_floor,
        _norm_const(c),
    )
    comps = tuple(
        GaussianComponent(weight=float(w[0, j]), mean=tuple(float(v) for v in mu[0, j]),
                          sigma=float(sigma[0, j]))
        for j in range(k)
    )
    return PixelMixture(comps), bool(fg[0])


def process_frame(model: BackgroundModel, frame: Frame, threads: int = 1) -> ForegroundMask:
    """Update every pixel with the frame and return its foreground mask.

    Mutates the model in place. Deterministic for a given (state, frame);
    thread count never changes the result because pixels are independent.
    """
    if (frame.width, frame.height, frame.channels) != (model.width, model.height, model.channels):
        raise DimensionMismatchError(
            f"frame is {frame.width}x{frame.height}x{frame.channels}, "
            f"model expects {model.width}x{model.height}x{model.channels}"
        )
    cfg = model.config
    n = model.width * model.height
    z = frame.to_array().reshape(n, model.channels).astype(np.float64)
    fg = np.zeros(n, dtype=np.uint8)

    args = (cfg.alpha, cfg.match_d, cfg.t, cfg.sigma_init, cfg.sigma_floor,
            cfg.w_new_floor, model._norm)
    if threads <= 1 or n < 4 * threads:
        model._kernel(model._w, model._mu, model._sigma, z, fg, *args)
    else:
        bounds = np.linspace(0, n, threads + 1, dtype=int)
        pool = _EXECUTORS.get(threads)
        if pool is None:
            pool = _EXECUTORS.setdefault(threads, ThreadPoolExecutor(max_workers=threads))
        futures = [
            pool.submit(model._kernel,
                        model._w[a:b], model._mu[a:b], model._sigma[a:b],
                        z[a:b], fg[a:b], *args)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for fut in futures:
            fut.result()

    model.frames_seen += 1
    bits = fg.reshape(model.height, model.width).astype(bool)
    return ForegroundMask(width=model.width, height=model.height, bits=bits)


def background_count(mixture: PixelMixture, t: float) -> int:
    """Length of the shortest rank prefix whose weights sum past t (K if none)."""
    cum = 0.0
    for i, comp in enumerate(mixture.components):
        cum += comp.weight
        if cum > t:
            return i + 1
    return len(mixture.components)
