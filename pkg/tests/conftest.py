"""Shared fixtures: canonical shapes and the session-calibrated config."""

import numpy as np
import pytest

from omegacount.contour import primary_contour
from omegacount.descriptors import calibrate_detailed
from omegacount.mask import ForegroundMask
from omegacount.synth import OmegaShapeParams, build_corpus, gen_omega, load_corpus_masks

TRAIN_SEED = 7
TEST_SEED = 8


def disk_mask(r: int, pad: int = 4) -> ForegroundMask:
    n = 2 * r + 2 * pad + 1
    ys, xs = np.mgrid[0:n, 0:n]
    return ForegroundMask.from_array((xs - n // 2) ** 2 + (ys - n // 2) ** 2 <= r * r)


def disk_path(r: int, pad: int = 4):
    return primary_contour(disk_mask(r, pad), min_area=10)


def rect_mask(w: int, h: int, pad: int = 10) -> ForegroundMask:
    bits = np.zeros((h + 2 * pad, w + 2 * pad), dtype=bool)
    bits[pad : pad + h, pad : pad + w] = True
    return ForegroundMask.from_array(bits)


def rect_path(w: int, h: int, pad: int = 10):
    return primary_contour(rect_mask(w, h, pad), min_area=10)


def clean_omega(seed: int = 3, jitter: int = 0, center_x: int | None = None,
                canvas: tuple[int, int] = (160, 120)):
    """A well-proportioned silhouette: neck 20, shoulders 50."""
    params = OmegaShapeParams(
        a_h=12, b_h=7, neck_width=20, shoulder_span=50, shoulder_drop=5,
        jitter=jitter, seed=seed, fig_height=104, center_x=center_x,
    )
    return gen_omega(params, canvas)


@pytest.fixture(scope="session")
def corpus_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    train = root / "train"
    test = root / "test"
    build_corpus(100, TRAIN_SEED, str(train))
    build_corpus(100, TEST_SEED, str(test))
    return str(train / "manifest.json"), str(test / "manifest.json")


def corpus_samples(manifest_path: str):
    return [(primary_contour(m), label) for m, label in load_corpus_masks(manifest_path)]


@pytest.fixture(scope="session")
def calibrated(corpus_dirs):
    """(config, train accuracy) from the seed-fixed training corpus."""
    train_manifest, _ = corpus_dirs
    return calibrate_detailed(corpus_samples(train_manifest))


@pytest.fixture(scope="session")
def calibrated_cfg(calibrated):
    return calibrated[0]
