"""Named distributions and the standard verification suite."""

from __future__ import annotations

import json
import os
from typing import Iterator, List, Tuple

import numpy as np

from .density import (
    Density,
    ExponentialDensity,
    HistogramDensity,
    histogram_from_bins,
    histogram_from_dict,
    load_histogram,
    renormalize_bins,
)
from .errors import BadShapeError
from .sharpness import sharp_family

SUITE_SEED = 20240601
N_RANDOM = 200


def uniform() -> HistogramDensity:
    return histogram_from_bins([0.0, 1.0], [1.0])


def triangle(n_bins: int = 64) -> HistogramDensity:
    """Symmetric triangle on [0, 2] with peak 1 at x = 1, binned by exact bin averages."""
    if n_bins % 2:
        raise BadShapeError("triangle needs an even number of bins so the peak is an edge")
    edges = np.linspace(0.0, 2.0, n_bins + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return histogram_from_bins(edges, 1.0 - np.abs(mids - 1.0))


def random_histogram(rng: np.random.Generator, max_bins: int = 12, x_max: float = 4.0) -> HistogramDensity:
    m = int(rng.integers(1, max_bins + 1))
    edges = np.sort(rng.uniform(0.0, x_max, m + 1))
    return renormalize_bins(edges, rng.exponential(size=m))


def mixture(components: List[Tuple[float, HistogramDensity]]) -> HistogramDensity:
    """Mixture of histograms on the union of their edges; weights must sum to 1."""
    if not components:
        raise BadShapeError("mixture needs at least one component")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise BadShapeError("mixture weights must be nonnegative and sum to 1")
    edges = np.unique(np.concatenate([d.edges for _, d in components]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    heights = sum(w * d.pdf(mids) for w, d in components)
    return histogram_from_bins(edges, heights)


def _load_mixture(path: str) -> HistogramDensity:
    with open(path) as fh:
        doc = json.load(fh)
    parts = []
    for comp in doc.get("components", []):
        d = parse_dist(comp["dist"]) if "dist" in comp else histogram_from_dict(comp)
        if not isinstance(d, HistogramDensity):
            raise BadShapeError("mixture components must be histograms")
        parts.append((float(comp["weight"]), d))
    return mixture(parts)


def parse_dist(spec: str) -> Density:
    """Resolve a distribution name.

    Accepted forms: ``uniform``, ``triangle``, ``exp:<rate>``, ``sharp:<n>``,
    ``mix:<path>``, ``histogram:<path>``, or a bare path to histogram JSON.
    """
    if spec == "uniform":
        return uniform()
    if spec == "triangle":
        return triangle()
    kind, _, arg = spec.partition(":")
    if kind == "exp" and arg:
        return ExponentialDensity(float(arg))
    if kind == "sharp" and arg:
        return sharp_family(int(arg))
    if kind == "mix" and arg:
        return _load_mixture(arg)
    if kind == "histogram" and arg:
        return load_histogram(arg)
    if os.path.exists(spec):
        return load_histogram(spec)
    raise BadShapeError(f"unknown distribution {spec!r}")


def standard_suite(n_random: int = N_RANDOM, seed: int = SUITE_SEED) -> Iterator[Tuple[str, Density]]:
    yield "uniform", uniform()
    for rate in (0.5, 1.0, 2.0):
        yield f"exp:{rate:g}", ExponentialDensity(rate)
    yield "triangle", triangle()
    for n in range(2, 15):
        yield f"sharp:{n}", sharp_family(n)
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        yield f"random:{i}", random_histogram(rng)
