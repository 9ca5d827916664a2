"""Absolutely continuous densities on the half-line [0, inf).

Two concrete families are supported: piecewise-constant histograms, for which
every functional used elsewhere in the package has an exact closed form, and
exponentials. Both are immutable; "mutating" helpers such as :func:`dilate` and
:func:`renormalize` return new objects.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence, Union, runtime_checkable

import numpy as np

from .errors import (
    BadShapeError,
    NegativeArgumentError,
    NegativeHeightError,
    NonNormalizedError,
    NonPositiveScaleError,
    SamplerUnavailableError,
    ZeroMassError,
)

MASS_TOL = 1e-12

ArrayLike = Union[float, Sequence[float], np.ndarray]


@runtime_checkable
class Density(Protocol):
    def pdf(self, x: ArrayLike) -> np.ndarray: ...

    def cdf(self, x: ArrayLike) -> np.ndarray: ...

    def sf(self, x: ArrayLike) -> np.ndarray: ...

    def quantile(self, p: ArrayLike) -> np.ndarray: ...

    def median(self) -> float: ...

    def sup_norm(self) -> float: ...

    def mean(self) -> float: ...

    def upper_support_bound(self) -> float: ...


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class HistogramDensity:
    """Piecewise-constant density ``heights[i]`` on ``[edges[i], edges[i+1])``.

    Zero-height bins are allowed (they model gaps in the support). The
    constructor validates normalization to ``MASS_TOL`` and never rescales;
    use :func:`renormalize` for that.
    """

    edges: np.ndarray
    heights: np.ndarray
    # cached cumulative quantities, all exact up to rounding
    _masses: np.ndarray = field(init=False, repr=False)
    _cdf_at_edges: np.ndarray = field(init=False, repr=False)
    _sf_at_edges: np.ndarray = field(init=False, repr=False)
    _isf_at_edges: np.ndarray = field(init=False, repr=False)
    _tail_isf_at_edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        heights = np.asarray(self.heights, dtype=float)
        if edges.ndim != 1 or heights.ndim != 1:
            raise BadShapeError("edges and heights must be one-dimensional")
        if len(heights) < 1 or len(edges) != len(heights) + 1:
            raise BadShapeError(
                f"need len(edges) == len(heights) + 1 >= 2, got {len(edges)} and {len(heights)}"
            )
        if not np.all(np.isfinite(edges)) or not np.all(np.isfinite(heights)):
            raise BadShapeError("edges and heights must be finite")
        if edges[0] < 0:
            raise BadShapeError("edges must be nonnegative")
        if np.any(np.diff(edges) <= 0):
            raise BadShapeError("edges must be strictly increasing")
        if np.any(heights < 0):
            raise NegativeHeightError("heights must be nonnegative")
        if not np.any(heights > 0):
            raise ZeroMassError("at least one height must be positive")

        masses = heights * np.diff(edges)
        total = math.fsum(masses)
        if abs(total - 1.0) > MASS_TOL:
            raise NonNormalizedError(f"total mass {total!r} differs from 1 by more than {MASS_TOL}")

        cdf_e = np.concatenate([[0.0], np.cumsum(masses)])
        # tail sums accumulated from the right keep small survival values accurate
        sf_e = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
        widths = np.diff(edges)
        # integral of the survival function from edges[0] to each edge
        trap = 0.5 * (sf_e[:-1] + sf_e[1:]) * widths
        isf = np.concatenate([[0.0], np.cumsum(trap)])
        tail_isf = np.concatenate([np.cumsum(trap[::-1])[::-1], [0.0]])

        object.__setattr__(self, "edges", _frozen(edges))
        object.__setattr__(self, "heights", _frozen(heights))
        object.__setattr__(self, "_masses", _frozen(masses))
        object.__setattr__(self, "_cdf_at_edges", _frozen(cdf_e))
        object.__setattr__(self, "_sf_at_edges", _frozen(sf_e))
        object.__setattr__(self, "_isf_at_edges", _frozen(isf))
        object.__setattr__(self, "_tail_isf_at_edges", _frozen(tail_isf))

    @classmethod
    def from_masses(cls, edges, masses) -> "HistogramDensity":
        """Build from per-bin probabilities rather than heights."""
        edges = np.asarray(edges, dtype=float)
        masses = np.asarray(masses, dtype=float)
        if len(edges) != len(masses) + 1:
            raise BadShapeError("need len(edges) == len(masses) + 1")
        return cls(edges, masses / np.diff(edges))

    @property
    def n_bins(self) -> int:
        return len(self.heights)

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    def total_mass(self) -> float:
        return math.fsum(self._masses)

    def _bin_index(self, x: np.ndarray) -> np.ndarray:
        # index of the bin containing x, clipped to valid bins
        return np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.n_bins - 1)

    def pdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.edges[0]) & (x < self.edges[-1])
        return np.where(inside, self.heights[self._bin_index(x)], 0.0)

    def cdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        i = self._bin_index(x)
        val = self._cdf_at_edges[i] + self.heights[i] * (x - self.edges[i])
        val = np.where(x <= self.edges[0], 0.0, val)
        val = np.where(x >= self.edges[-1], 1.0, val)
        return np.clip(val, 0.0, 1.0)

    def sf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        i = self._bin_index(x)
        # sum of nonnegative terms: no cancellation when sf is small
        val = self._sf_at_edges[i + 1] + self.heights[i] * (self.edges[i + 1] - x)
        val = np.where(x <= self.edges[0], 1.0, val)
        val = np.where(x >= self.edges[-1], 0.0, val)
        return np.clip(val, 0.0, 1.0)

    def integrated_sf(self, t: ArrayLike) -> np.ndarray:
        """Exact value of the integral of ``sf`` over ``[0, t]`` (piecewise quadratic in t)."""
        t = np.asarray(t, dtype=float)
        e0 = self.edges[0]
        i = self._bin_index(t)
        d = t - self.edges[i]
        val = e0 + self._isf_at_edges[i] + self._sf_at_edges[i] * d - 0.5 * self.heights[i] * d * d
        val = np.where(t <= e0, np.maximum(t, 0.0), val)
        return np.where(t >= self.edges[-1], e0 + self._isf_at_edges[-1], val)

    def tail_integrated_sf(self, t: ArrayLike) -> np.ndarray:
        """Exact integral of ``sf`` over ``[t, inf)``; accurate where the tail is small."""
        t = np.asarray(t, dtype=float)
        i = self._bin_index(t)
        r = self.edges[i + 1] - np.maximum(t, self.edges[0])
        val = self._tail_isf_at_edges[i + 1] + self._sf_at_edges[i + 1] * r + 0.5 * self.heights[i] * r * r
        val = np.where(t < self.edges[0], self._tail_isf_at_edges[0] + (self.edges[0] - np.maximum(t, 0.0)), val)
        return np.where(t >= self.edges[-1], 0.0, val)

    def quantile(self, p: ArrayLike) -> np.ndarray:
        """Smallest x with ``cdf(x) >= p``; exact inversion inside the containing bin."""
        p = np.asarray(p, dtype=float)
        cum = self._cdf_at_edges
        k = np.clip(np.searchsorted(cum, p, side="left"), 1, self.n_bins)
        j = k - 1
        h = self.heights[j]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = self.edges[j] + np.where(h > 0, (p - cum[j]) / h, 0.0)
        x = np.clip(x, self.edges[j], self.edges[j + 1])
        return np.where(p <= 0.0, self.edges[0], x)

    def median(self) -> float:
        return float(self.quantile(0.5))

    def sup_norm(self) -> float:
        return float(np.max(self.heights))

    def mean(self) -> float:
        e = self.edges
        return math.fsum(self.heights * (e[1:] ** 2 - e[:-1] ** 2) / 2.0)

    def upper_support_bound(self) -> float:
        return float(self.edges[-1])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.quantile(rng.random(size))

    def to_dict(self) -> dict:
        return {"edges": [float(v) for v in self.edges], "heights": [float(v) for v in self.heights]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self) -> str:
        return f"HistogramDensity(n_bins={self.n_bins}, support=[{self.edges[0]:g}, {self.edges[-1]:g}])"


@dataclass(frozen=True)
class ExponentialDensity:
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise NonPositiveScaleError(f"rate must be positive and finite, got {self.rate!r}")

    def pdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def cdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -np.expm1(-self.rate * np.maximum(x, 0.0))

    def sf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-self.rate * np.maximum(x, 0.0))

    def quantile(self, p: ArrayLike) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return -np.log1p(-p) / self.rate

    def median(self) -> float:
        return math.log(2.0) / self.rate

    def sup_norm(self) -> float:
        return self.rate

    def mean(self) -> float:
        return 1.0 / self.rate

    def upper_support_bound(self) -> float:
        return math.inf

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.quantile(rng.random(size))


def histogram_from_bins(edges: Sequence[float], heights: Sequence[float]) -> HistogramDensity:
    return HistogramDensity(np.asarray(edges, dtype=float), np.asarray(heights, dtype=float))


def renormalize(d: HistogramDensity) -> HistogramDensity:
    """Scale heights so the total mass is one."""
    heights = np.asarray(d.heights, dtype=float)
    if np.any(heights < 0):
        raise NegativeHeightError("heights must be nonnegative")
    total = math.fsum(heights * np.diff(d.edges))
    if not total > 0:
        raise ZeroMassError("cannot renormalize a density with zero mass")
    return HistogramDensity(d.edges, heights / total)


def renormalize_bins(edges, heights) -> HistogramDensity:
    """Like :func:`renormalize` but accepts raw (possibly unnormalized) bins."""
    edges = np.asarray(edges, dtype=float)
    heights = np.asarray(heights, dtype=float)
    if len(edges) != len(heights) + 1:
        raise BadShapeError("need len(edges) == len(heights) + 1")
    if np.any(heights < 0):
        raise NegativeHeightError("heights must be nonnegative")
    total = math.fsum(heights * np.diff(edges))
    if not total > 0:
        raise ZeroMassError("cannot renormalize a density with zero mass")
    return HistogramDensity(edges, heights / total)


def cdf_eval(d: Density, x: float) -> float:
    if x < 0:
        raise NegativeArgumentError(f"x must be nonnegative, got {x!r}")
    return float(d.cdf(x))


def median_of(d: Density) -> float:
    return d.median()


def dilate(d: Density, lam: float) -> Density:
    """Return the distribution of ``X / lam``, i.e. ``f(x) dx -> lam f(lam x) dx``.

    For histograms the per-bin masses are carried over unchanged and heights
    are recomputed from the new widths, so normalization survives rounding of
    the rescaled edges.
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise NonPositiveScaleError(f"dilation factor must be positive, got {lam!r}")
    if isinstance(d, ExponentialDensity):
        return ExponentialDensity(d.rate * lam)
    if isinstance(d, HistogramDensity):
        return HistogramDensity.from_masses(d.edges / lam, d.masses)
    raise TypeError(f"cannot dilate {type(d).__name__}")


def normalize_median(d: Density) -> Density:
    """Dilate so that the median becomes exactly representable as 1 (up to rounding)."""
    return dilate(d, d.median())


def histogram_from_dict(doc: dict) -> HistogramDensity:
    try:
        edges, heights = doc["edges"], doc["heights"]
    except (KeyError, TypeError) as exc:
        raise BadShapeError('histogram JSON must have "edges" and "heights" arrays') from exc
    return histogram_from_bins(edges, heights)


def load_histogram(path: Union[str, Path]) -> HistogramDensity:
    with open(path) as fh:
        return histogram_from_dict(json.load(fh))


def save_histogram(d: HistogramDensity, path: Union[str, Path]) -> None:
    Path(path).write_text(d.to_json() + "\n")


def require_sampler(d) -> None:
    if not hasattr(d, "quantile"):
        raise SamplerUnavailableError(f"{type(d).__name__} has no inverse-cdf sampler")
