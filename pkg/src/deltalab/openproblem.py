"""Weighted mixed/both-large ratio and scans probing whether exponentials are extremal.

For i.i.d. X, Y the ratio

    P(X+Y >= 2z, min <= z) / P(X+Y >= 2z, min >= z) = 2 delta(z) / (1 - F(z))**2

equals 2 lambda z for Exp(lambda). Two normalizations turn it into a number
that is identically 1 for exponentials:

* median-normalized: ratio * med(X) / (2 ln2 z)
* mean-normalized:   ratio * E[X] / (2 z)

A density whose sup over z of either normalized value stays below 1 would be
a counterexample to the corresponding conjecture; scans only flag such cases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .density import Density, HistogramDensity
from .errors import NegativeArgumentError, ZeroDenominatorError
from .functionals import delta_at, delta_quadrature, delta_values

LN2 = math.log(2.0)
SMALL_Z = 1e-12


@dataclass(frozen=True)
class WeightedRatio:
    ratio: float
    med_normalized: float
    mean_normalized: float

    def __iter__(self):
        return iter((self.ratio, self.med_normalized, self.mean_normalized))


def _small_z_limit(d: Density) -> WeightedRatio:
    # delta(z) ~ f(0+) z, so ratio / z -> 2 f(0+)
    f0 = float(d.pdf(0.0))
    slope = 2.0 * f0
    return WeightedRatio(0.0, slope * d.median() / (2.0 * LN2), slope * d.mean() / 2.0)


def weighted_ratio(d: Density, z: float, method: str = "exact") -> WeightedRatio:
    """Mixed/both-large ratio at z and its two normalizations.

    ``method="quadrature"`` computes delta by adaptive quadrature instead of
    the closed form.
    """
    if z < 0:
        raise NegativeArgumentError(f"z must be nonnegative, got {z!r}")
    med = d.median()
    if z < SMALL_Z * med:
        return _small_z_limit(d)
    s = float(d.sf(z))
    if s <= 0:
        raise ZeroDenominatorError(f"P(min(X,Y) >= z) = 0 at z={z!r}")
    delta = delta_quadrature(d, z) if method == "quadrature" else delta_at(d, z)
    ratio = 2.0 * delta / (s * s)
    return WeightedRatio(ratio, ratio * med / (2.0 * LN2 * z), ratio * d.mean() / (2.0 * z))


@dataclass(frozen=True)
class RatioProfile:
    z_grid: np.ndarray
    ratio_values: np.ndarray
    weighted_med: np.ndarray
    weighted_mean: np.ndarray
    inf_weighted_med: float
    inf_weighted_mean: float
    sup_weighted_med: float
    sup_weighted_mean: float
    arg_sup_med: float
    arg_sup_mean: float
    # z values dropped because P(min >= z) = 0 (beyond the support)
    n_excluded: int = 0
    compact_support: bool = False

    @property
    def flags_med(self) -> bool:
        """True when the median-normalized sup falls below 1 (candidate for manual inspection)."""
        return self.sup_weighted_med < 1.0

    @property
    def flags_mean(self) -> bool:
        return self.sup_weighted_mean < 1.0

    def to_csv(self) -> str:
        lines = ["z,ratio,med_normalized,mean_normalized"]
        for row in zip(self.z_grid, self.ratio_values, self.weighted_med, self.weighted_mean):
            lines.append(",".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "z_grid": [float(v) for v in self.z_grid],
            "ratio_values": [float(v) for v in self.ratio_values],
            "weighted_med": [float(v) for v in self.weighted_med],
            "weighted_mean": [float(v) for v in self.weighted_mean],
            "inf_weighted_med": self.inf_weighted_med,
            "inf_weighted_mean": self.inf_weighted_mean,
            "sup_weighted_med": self.sup_weighted_med,
            "sup_weighted_mean": self.sup_weighted_mean,
            "arg_sup_med": self.arg_sup_med,
            "arg_sup_mean": self.arg_sup_mean,
            "n_excluded": self.n_excluded,
            "compact_support": self.compact_support,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ratio_values(d: Density, z: np.ndarray, method: str = "exact"):
    """Vectorized (ratio, med_normalized, mean_normalized) for z > 0 with sf(z) > 0."""
    z = np.asarray(z, dtype=float)
    s = np.asarray(d.sf(z), dtype=float)
    delta = delta_values(d, z, method=method)
    ratio = 2.0 * delta / (s * s)
    return ratio, ratio * d.median() / (2.0 * LN2 * z), ratio * d.mean() / (2.0 * z)


def conjecture_scan(
    d: Density, grid_points: int = 4096, z_max: Optional[float] = None, method: str = "exact"
) -> RatioProfile:
    """Scan the weighted ratio on a uniform grid over (0, q(0.999)]."""
    if z_max is None:
        z_max = float(d.quantile(0.999))
    z = np.linspace(0.0, z_max, grid_points + 1)[1:]
    keep = np.asarray(d.sf(z)) > 0
    z_used = z[keep]
    ratio, med_n, mean_n = ratio_values(d, z_used, method=method)
    i_med = int(np.argmax(med_n))
    i_mean = int(np.argmax(mean_n))
    return RatioProfile(
        z_grid=z_used,
        ratio_values=ratio,
        weighted_med=med_n,
        weighted_mean=mean_n,
        inf_weighted_med=float(np.min(med_n)),
        inf_weighted_mean=float(np.min(mean_n)),
        sup_weighted_med=float(med_n[i_med]),
        sup_weighted_mean=float(mean_n[i_mean]),
        arg_sup_med=float(z_used[i_med]),
        arg_sup_mean=float(z_used[i_mean]),
        n_excluded=int(np.count_nonzero(~keep)),
        compact_support=math.isfinite(d.upper_support_bound()),
    )


def default_identity_grid() -> np.ndarray:
    return 0.01 * np.arange(1, 1001)


def exponential_identity_check(rate: float, z_grid: Optional[Sequence[float]] = None) -> float:
    """Max over z of |ratio(z) * E[X] / z - 2| for Exp(rate), via quadrature for delta."""
    from .density import ExponentialDensity

    d = ExponentialDensity(rate)
    z = default_identity_grid() if z_grid is None else np.asarray(z_grid, dtype=float)
    if np.any(z <= 0):
        raise NegativeArgumentError("identity check needs positive z values")
    worst = 0.0
    for zz in z:
        r = weighted_ratio(d, float(zz), method="quadrature")
        worst = max(worst, abs(r.ratio * d.mean() / zz - 2.0))
    return worst
