"""Seeded toy datasets for semi-supervised classification.

Generators draw from ``numpy.random.Generator(PCG64(seed))`` so a seed
reproduces the same points on every platform numpy supports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from manireg.learn import SemiSupervisedDataset

KINDS = ("two_moons", "concentric_circles", "gaussian_blobs")


@dataclass(frozen=True)
class ToyDatasetSpec:
    kind: str = "two_moons"
    n_per_class: int = 100
    n_labeled_per_class: int = 1
    seed: int = 0
    noise: float = 0.05
    gap: float = 1.0
    count: int = 2
    spread: float = 0.5
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}; choose from {KINDS}")
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if not 0 <= self.n_labeled_per_class <= self.n_per_class:
            raise ValueError("need 0 <= n_labeled_per_class <= n_per_class")
        if self.n_labeled_per_class == 0:
            raise ValueError("at least one labeled point per class is required")
        if self.noise < 0 or self.spread < 0:
            raise ValueError("noise and spread must be nonnegative")
        if self.kind == "concentric_circles" and not self.gap > 0:
            raise ValueError("gap must be positive")
        if self.kind == "gaussian_blobs" and (self.count < 2 or self.count % 2):
            raise ValueError("gaussian_blobs needs an even count >= 2")

    def as_dict(self):
        return {
            "kind": self.kind, "n_per_class": self.n_per_class,
            "n_labeled_per_class": self.n_labeled_per_class, "seed": self.seed,
            "noise": self.noise, "gap": self.gap, "count": self.count, "spread": self.spread,
        }


def _two_moons(spec, rng):
    m = spec.n_per_class
    t1 = rng.uniform(0.0, math.pi, m)
    t2 = rng.uniform(0.0, math.pi, m)
    upper = np.column_stack([np.cos(t1), np.sin(t1)])
    lower = np.column_stack([1.0 - np.cos(t2), 0.5 - np.sin(t2)])
    return upper, lower


def _circles(spec, rng):
    m = spec.n_per_class
    t1 = rng.uniform(0.0, 2 * math.pi, m)
    t2 = rng.uniform(0.0, 2 * math.pi, m)
    r = 1.0 + spec.gap
    return (np.column_stack([np.cos(t1), np.sin(t1)]),
            r * np.column_stack([np.cos(t2), np.sin(t2)]))


def _blobs(spec, rng):
    # blobs alternate class around a circle of radius 3
    m = spec.n_per_class
    per = spec.count // 2
    angles = 2 * math.pi * np.arange(spec.count) / spec.count
    centers = 3.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    out = []
    for cls in (0, 1):
        idx = rng.integers(0, per, m) * 2 + cls
        out.append(centers[idx] + spec.spread * rng.standard_normal((m, 2)))
    return out[0], out[1]


_GENERATORS = {"two_moons": _two_moons, "concentric_circles": _circles, "gaussian_blobs": _blobs}


def generate_toy_dataset(spec: ToyDatasetSpec):
    """Return ``(dataset, truth)``.

    Rows are ordered: labeled class +1, labeled class -1, then the unlabeled
    points of class +1 and of class -1. ``truth`` holds every row's class.
    """
    rng = np.random.default_rng(spec.seed)
    pos, neg = _GENERATORS[spec.kind](spec, rng)
    if spec.noise > 0:
        pos = pos + spec.noise * rng.standard_normal(pos.shape)
        neg = neg + spec.noise * rng.standard_normal(neg.shape)
    m, k = spec.n_per_class, spec.n_labeled_per_class
    lp = np.sort(rng.choice(m, k, replace=False))
    ln = np.sort(rng.choice(m, k, replace=False))
    up = np.setdiff1d(np.arange(m), lp)
    un = np.setdiff1d(np.arange(m), ln)
    X = np.vstack([pos[lp], neg[ln], pos[up], neg[un]])
    truth = np.concatenate([np.ones(k), -np.ones(k), np.ones(m - k), -np.ones(m - k)])
    return SemiSupervisedDataset(X, truth[: 2 * k]), truth
