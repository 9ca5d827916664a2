"""Derivative-free search over histogram densities.

Heights live on a fixed edge layout and are perturbed one coordinate at a
time by a random multiplicative factor. Every proposal is renormalized and
dilated to median 1, so the only constraint left to enforce for the
fixed-product objective is the band on max height.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .density import HistogramDensity, normalize_median, renormalize_bins
from .errors import BadShapeError, InfeasibleConstraintError
from .functionals import delta_profile
from .openproblem import conjecture_scan
from .theorem import TheoremReport, theorem_rhs, verify_theorem

log = logging.getLogger(__name__)

PRODUCT_BAND = 0.02
REJECTIONS_BEFORE_SHRINK = 20
MIN_STEP = 1e-4


class Objective(str, Enum):
    MIN_SUP_DELTA_AT_FIXED_PRODUCT = "min_sup_delta_at_fixed_product"
    MIN_CONJECTURE_SUP_MED = "min_conjecture_sup_med"
    MIN_CONJECTURE_SUP_MEAN = "min_conjecture_sup_mean"


@dataclass(frozen=True)
class SearchConfig:
    n_bins: int = 16
    objective: Objective = Objective.MIN_SUP_DELTA_AT_FIXED_PRODUCT
    budget: int = 2000
    restarts: int = 1
    seed: int = 0
    product_target: float = math.log(2.0)
    layout: str = "uniform"
    grid_points: int = 256
    initial_step: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        if self.budget < 100:
            raise BadShapeError("budget must be at least 100")
        if not 4 <= self.n_bins <= 512:
            raise BadShapeError("n_bins must lie in [4, 512]")
        if self.restarts < 1:
            raise BadShapeError("restarts must be at least 1")
        if self.layout not in ("uniform", "dyadic"):
            raise BadShapeError(f"unknown layout {self.layout!r}")
        if self.product_target < 0.5:
            raise InfeasibleConstraintError(
                f"median * sup_norm >= 1/2 for every density; target {self.product_target!r} is infeasible"
            )

    @classmethod
    def from_dict(cls, doc: dict) -> "SearchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise BadShapeError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["objective"] = self.objective.value
        return out


def layout_edges(n_bins: int, layout: str) -> np.ndarray:
    if layout == "uniform":
        return np.linspace(0.0, 2.0, n_bins + 1)
    # dyadic: half the bins accumulate at 1 from the left, the rest cover [1, 2] uniformly
    left = n_bins // 2
    lo = 1.0 - 2.0 ** -np.arange(left)
    hi = np.linspace(1.0, 2.0, n_bins - left + 1)
    return np.concatenate([lo, hi])


@dataclass
class RestartRecord:
    index: int
    evaluations: int
    best_objective: float
    best_density: Optional[HistogramDensity]
    final_step: float


@dataclass
class SearchState:
    best_density: Optional[HistogramDensity]
    best_objective: float
    history: List[Tuple[int, float]] = field(default_factory=list)
    restarts: List[RestartRecord] = field(default_factory=list)
    # restart index of each history entry, so monotonicity can be checked per restart
    history_restart: List[int] = field(default_factory=list)

    def history_csv(self) -> str:
        lines = ["eval,objective"] + [f"{i},{v:.17g}" for i, v in self.history]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "best_objective": self.best_objective,
            "best_density": self.best_density.to_dict() if self.best_density is not None else None,
            "restarts": [
                {"index": r.index, "evaluations": r.evaluations, "best_objective": r.best_objective, "final_step": r.final_step}
                for r in self.restarts
            ],
        }


def objective_value(g: HistogramDensity, cfg: SearchConfig) -> float:
    """Objective for a median-normalized candidate."""
    if cfg.objective is Objective.MIN_SUP_DELTA_AT_FIXED_PRODUCT:
        return delta_profile(g, grid_points=max(64, cfg.grid_points)).sup_value
    scan = conjecture_scan(g, grid_points=cfg.grid_points)
    if cfg.objective is Objective.MIN_CONJECTURE_SUP_MED:
        return scan.sup_weighted_med
    return scan.sup_weighted_mean


def _violation(g: HistogramDensity, cfg: SearchConfig) -> float:
    if cfg.objective is not Objective.MIN_SUP_DELTA_AT_FIXED_PRODUCT:
        return 0.0
    product = g.median() * g.sup_norm()
    return max(0.0, abs(product / cfg.product_target - 1.0) - PRODUCT_BAND)


def _evaluate(edges, heights, cfg) -> Tuple[float, float, HistogramDensity]:
    g = normalize_median(renormalize_bins(edges, heights))
    viol = _violation(g, cfg)
    if viol > 0:
        return viol, math.inf, g
    return 0.0, objective_value(g, cfg), g


def optimize(cfg: SearchConfig, initial: Optional[HistogramDensity] = None) -> SearchState:
    """Coordinate-wise multiplicative search with step halving and restarts.

    A proposal is accepted when it lowers (constraint excess, objective)
    lexicographically, so a start outside the product band first walks into
    it. ``budget`` counts proposals across all restarts; each restart gets
    ``ceil(budget / restarts)`` of them and ends early once the step falls
    below ``MIN_STEP``. Restart r draws from its own seed ``(seed, r)``.
    """
    if initial is not None:
        edges = np.asarray(initial.edges, dtype=float)
        n_bins = len(edges) - 1
    else:
        edges = layout_edges(cfg.n_bins, cfg.layout)
        n_bins = cfg.n_bins
    allotment = math.ceil(cfg.budget / cfg.restarts)

    state = SearchState(best_density=None, best_objective=math.inf)
    used = 0
    r = 0
    while used < cfg.budget:
        rng = np.random.default_rng([cfg.seed, r])
        if r == 0:
            heights = np.asarray(initial.heights, dtype=float).copy() if initial is not None else np.ones(n_bins)
        else:
            heights = rng.exponential(size=n_bins)
        viol, obj, g = _evaluate(edges, heights, cfg)
        used += 1
        best_g = g if viol == 0 else None
        if viol == 0:
            state.history.append((used, obj))
            state.history_restart.append(r)
        step = cfg.initial_step
        rejections = 0
        seg_used = 1
        coord = 0
        while seg_used < allotment and used < cfg.budget and step >= MIN_STEP:
            proposal = heights.copy()
            proposal[coord % n_bins] *= math.exp(rng.uniform(-step, step))
            coord += 1
            p_viol, p_obj, p_g = _evaluate(edges, proposal, cfg)
            used += 1
            seg_used += 1
            if (p_viol, p_obj) < (viol, obj):
                heights, viol, obj = proposal, p_viol, p_obj
                if viol == 0:
                    best_g = p_g
                rejections = 0
            else:
                rejections += 1
                if rejections >= REJECTIONS_BEFORE_SHRINK:
                    step /= 2.0
                    rejections = 0
            if viol == 0:
                state.history.append((used, obj))
                state.history_restart.append(r)
        rec = RestartRecord(r, seg_used, obj if viol == 0 else math.inf, best_g, step)
        state.restarts.append(rec)
        log.debug("restart %d: %d evaluations, best %.6g, step %.3g", r, seg_used, rec.best_objective, step)
        r += 1

    best = min(state.restarts, key=lambda rec: (rec.best_objective, rec.index))
    state.best_objective = best.best_objective
    state.best_density = best.best_density
    return state


def objective_floor(cfg: SearchConfig) -> float:
    """Certified lower bound for the fixed-product objective anywhere in the constraint band."""
    worst_product = cfg.product_target * (1.0 + PRODUCT_BAND)
    return 1.0 / (24.0 + 8.0 * math.log2(worst_product))


def certify_candidate(d: HistogramDensity, grid_points: int = 8192) -> TheoremReport:
    """Re-verify a candidate at doubled resolution.

    A negative margin cannot be a counterexample to a proved bound, so it is
    logged as an evaluation error.
    """
    report = verify_theorem(d, grid_points=grid_points)
    if report.margin < 0:
        log.error("negative theorem margin %.3g: numerical evaluation error", report.margin)
    return report


def load_config(path) -> SearchConfig:
    with open(path) as fh:
        return SearchConfig.from_dict(json.load(fh))
