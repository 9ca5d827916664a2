"""The dyadic-spike family showing that the logarithm in the lower bound is needed.

``sharp_family(n)`` places n spikes of mass 1/n on the intervals
``[1 - outer/2**k, 1 - inner/2**k]``, k = 1..n, with height amplitude*2**k/n.
As n grows, sup_z delta shrinks like 2/n while log2(median * sup_norm) grows
like n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .density import HistogramDensity
from .errors import BadShapeError, InsufficientDataError, NonNormalizedError
from .functionals import delta_profile
from .theorem import theorem_rhs

MAX_N = 30


@dataclass(frozen=True)
class SharpFamilyParams:
    n: int
    amplitude: float = 50.0
    inner: float = 0.99
    outer: float = 1.01

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise BadShapeError(f"n must be a positive integer, got {self.n!r}")
        if self.n > MAX_N:
            raise BadShapeError(f"n above {MAX_N} exceeds double-precision headroom")
        if not 0 < self.inner < self.outer < 2 * self.inner:
            raise BadShapeError("need 0 < inner < outer < 2*inner so spikes are disjoint")
        if abs(self.amplitude * (self.outer - self.inner) - 1.0) > 1e-12:
            raise NonNormalizedError(
                f"amplitude*(outer-inner) = {self.amplitude * (self.outer - self.inner)!r}, expected 1"
            )

    def nominal_height(self, k: int) -> float:
        return self.amplitude * 2.0**k / self.n

    def nominal_sup_norm(self) -> float:
        return self.nominal_height(self.n)


def sharp_family(p) -> HistogramDensity:
    """Build f_n from a :class:`SharpFamilyParams` or a bare ``n``.

    Spike edges are ``1 - c * 2**-k`` with the power of two applied first.
    Each spike is given mass exactly 1/n on its rounded edges; its height then
    matches ``amplitude * 2**k / n`` to within the rounding of the edges
    (relative error about 3e-15 * 2**k).
    """
    if not isinstance(p, SharpFamilyParams):
        p = SharpFamilyParams(int(p))
    n = p.n
    edges: List[float] = []
    masses: List[float] = []
    for k in range(1, n + 1):
        left = 1.0 - p.outer * 2.0**-k
        right = 1.0 - p.inner * 2.0**-k
        if edges:
            # zero-height gap bin between consecutive spikes
            masses.append(0.0)
        edges += [left, right]
        masses.append(1.0 / n)
    return HistogramDensity.from_masses(np.array(edges), np.array(masses))


def spike_interval(p: SharpFamilyParams, k: int):
    return 1.0 - p.outer * 2.0**-k, 1.0 - p.inner * 2.0**-k


def dyadic_window_bound(d: HistogramDensity, k: int) -> float:
    """P(1 - 2**(1-k) <= X <= 1 - 2**(-k-1)), which caps delta(z) for z in window k."""
    lo = 1.0 - 2.0 ** (1 - k)
    hi = 1.0 - 2.0 ** (-k - 1)
    return float(d.cdf(hi) - d.cdf(max(lo, 0.0)))


@dataclass(frozen=True)
class SharpnessRow:
    n: int
    sup_delta: float
    arg_sup: float
    median: float
    sup_norm: float
    log2_product: float
    rhs: float

    @property
    def n_times_sup_delta(self) -> float:
        return self.n * self.sup_delta

    @property
    def product_with_log(self) -> float:
        return self.sup_delta * self.log2_product

    @property
    def upper_limit(self) -> float:
        # band bound 2/n plus the head mass P(X <= 1/2) = 1/(2n)
        return 2.0 / self.n + 1.0 / (2.0 * self.n)

    def contract_ok(self, tol: float = 1e-9) -> bool:
        return self.rhs <= self.sup_delta <= self.upper_limit + tol

    def as_csv_fields(self) -> list:
        return [
            self.n,
            self.sup_delta,
            self.arg_sup,
            self.median,
            self.sup_norm,
            self.log2_product,
            self.n_times_sup_delta,
        ]


SHARPNESS_CSV_HEADER = "n,sup_delta,arg_sup,median,sup_norm,log2_product,n_times_sup_delta"


def sharpness_row(n: int, grid_points: int = 4096) -> SharpnessRow:
    d = sharp_family(n)
    prof = delta_profile(d, grid_points=grid_points)
    med = d.median()
    s = d.sup_norm()
    return SharpnessRow(
        n=n,
        sup_delta=prof.sup_value,
        arg_sup=prof.arg_sup,
        median=med,
        sup_norm=s,
        log2_product=math.log(med * s) / math.log(2.0),
        rhs=theorem_rhs(d),
    )


def sharpness_experiment(n_values: Iterable[int], grid_points: int = 4096) -> List[SharpnessRow]:
    rows = []
    for n in n_values:
        if n < 2:
            raise BadShapeError("sharpness experiment needs n >= 2")
        rows.append(sharpness_row(int(n), grid_points))
    return rows


def fit_inverse_delta(rows: Sequence[SharpnessRow]):
    """Least-squares line 1/sup_delta = A + B * log2(median * sup_norm); returns (B, A)."""
    if len({r.n for r in rows}) < 2:
        raise InsufficientDataError("need at least two distinct n values to fit a slope")
    x = np.array([r.log2_product for r in rows])
    y = np.array([1.0 / r.sup_delta for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def b_constant_obstruction(n_values: Iterable[int], grid_points: int = 4096) -> float:
    """Fitted growth rate B of 1/sup_delta against log2(median * sup_norm).

    Any lower bound 1/(A + B log2(med ||f||)) valid for the whole family
    needs B at least this large asymptotically.
    """
    n_values = list(n_values)
    if len(set(n_values)) < 2:
        raise InsufficientDataError("need at least two distinct n values to fit a slope")
    return fit_inverse_delta(sharpness_experiment(n_values, grid_points))[0]
