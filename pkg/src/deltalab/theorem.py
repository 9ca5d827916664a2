"""Checks of the lower bound sup_z delta(z) >= 1 / (24 + 8 log2(med(X) ||f||_inf)).

Besides the end-to-end comparison, each intermediate inequality of the
argument is exposed as its own function so a failure points at one step.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import List, Optional

from .density import Density, normalize_median
from .errors import NegativeArgumentError
from .functionals import delta_at, delta_profile, scan_range

LOG2 = math.log(2.0)
LEMMA_TOL = 1e-10


def log2(x: float) -> float:
    return math.log(x) / LOG2


def med_supnorm_product(d: Density) -> float:
    return d.median() * d.sup_norm()


def theorem_rhs(d: Density) -> float:
    return 1.0 / (24.0 + 8.0 * log2(med_supnorm_product(d)))


def ell_of(product: float) -> int:
    return int(math.floor(3.0 + log2(product)))


@dataclass(frozen=True)
class BandCheck:
    k: int
    band_mass: float
    two_delta: float

    @property
    def holds(self) -> bool:
        return self.band_mass <= self.two_delta + LEMMA_TOL


def dyadic_band_lemma(d: Density, k: int) -> BandCheck:
    """Compare the mass of [1 - 2**(1-k), 1 - 2**-k] with 2 delta(1 - 2**-k).

    ``d`` is dilated to median 1 first.
    """
    if k < 1:
        raise NegativeArgumentError(f"k must be >= 1, got {k!r}")
    g = normalize_median(d)
    z = 1.0 - 2.0**-k
    band = float(g.cdf(z) - g.cdf(1.0 - 2.0 ** (1 - k)))
    return BandCheck(k, band, 2.0 * delta_at(g, z))


@dataclass(frozen=True)
class EllCheck:
    ell: int
    tail_bound: float
    covered_mass: float
    tail_mass: float
    band_sum: float

    @property
    def holds(self) -> bool:
        return (
            self.covered_mass >= 0.5 - LEMMA_TOL
            and self.tail_mass <= self.tail_bound + LEMMA_TOL
            and self.tail_bound < 0.25
        )

    def __iter__(self):
        return iter((self.ell, self.tail_bound, self.covered_mass))


def ell_partition_check(d: Density) -> EllCheck:
    """Decompose [0, 1] (median-normalized) into ell dyadic bands plus a tail.

    ``covered_mass`` telescopes to F(1) = 1/2; the tail [1 - 2**-ell, 1] is
    bounded by 2**-ell * ||f||, which the choice of ell keeps below 1/4.
    """
    g = normalize_median(d)
    s = g.sup_norm()
    ell = ell_of(s)
    bands = [
        float(g.cdf(1.0 - 2.0**-k) - g.cdf(1.0 - 2.0 ** (1 - k))) for k in range(1, ell + 1)
    ]
    tail = float(g.cdf(1.0) - g.cdf(1.0 - 2.0**-ell))
    band_sum = math.fsum(bands)
    return EllCheck(ell, 2.0**-ell * s, band_sum + tail, tail, band_sum)


@dataclass(frozen=True)
class TheoremReport:
    lhs: float
    rhs: float
    margin: float
    med_supnorm_product: float
    dyadic_band_masses: List[float]
    ell_star: int
    arg_sup: float = float("nan")
    tail_bound: float = float("nan")
    proof_budget: float = float("nan")
    range_label: str = "median"
    dist_id: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.margin >= 0

    @property
    def ell_floor(self) -> float:
        """1/(8 ell), the intermediate lower bound from the argument."""
        return 1.0 / (8.0 * self.ell_star)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["holds"] = self.holds
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_theorem(
    d: Density,
    grid_points: int = 4096,
    n_bands: int = 12,
    dist_id: Optional[str] = None,
    range_which: str = "median",
) -> TheoremReport:
    """Compare sup over [0, median] of delta with the logarithmic lower bound.

    ``range_which="q999"`` widens the scan to [0, q(0.999)], which can only
    raise lhs. ``proof_budget`` is 2 * lhs * ell + 2**-ell * ||f||
    (median-normalized); the argument needs it to be at least 1/2.
    """
    prof = delta_profile(d, scan_range(d, range_which), grid_points=grid_points, range_label=range_which)
    product = med_supnorm_product(d)
    rhs = 1.0 / (24.0 + 8.0 * log2(product))
    ell = ell_of(product)
    tail_bound = 2.0**-ell * product
    g = normalize_median(d)
    bands = [float(g.cdf(1.0 - 2.0**-k) - g.cdf(1.0 - 2.0 ** (1 - k))) for k in range(1, n_bands + 1)]
    return TheoremReport(
        lhs=prof.sup_value,
        rhs=rhs,
        margin=prof.sup_value - rhs,
        med_supnorm_product=product,
        dyadic_band_masses=bands,
        ell_star=ell,
        arg_sup=prof.arg_sup,
        tail_bound=tail_bound,
        proof_budget=2.0 * prof.sup_value * ell + tail_bound,
        range_label=prof.range_label,
        dist_id=dist_id,
    )
