"""Seeded Monte Carlo engine for empirical validation of the analytic layer.

Every estimator derives one child RNG stream per trial from
(seed, trial index), so results are independent of batching or worker
count and regenerating any single trial is cheap. A trial samples a
Palm-conditioned realization (resampling, with a counter, the rare
degenerate draws with no transmitting vehicle or no base station), finds
the serving distances, applies the biased link selection, draws one
Rayleigh gain per interferer plus one for the serving link, and reduces
interference with the selected kernel backend (numba or numpy).

Two interference-exclusion modes are provided. ``paper_faithful`` keeps the
receiver at the origin for both link types and removes every interferer
inside the disc whose radius is the serving distance, which is the
geometry the analytic expressions integrate. ``physical`` removes only the
serving transmitter and, for V2B, moves the receiver to the serving base
station and measures interferer distances from there. The two modes bound
the modelling ambiguity for uplink reception; estimates report both ways.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from statistics import NormalDist
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .analytic import LaplaceArg, v2v_cdf, window_tail_fraction
from .pointprocess import NetworkParams, NetworkRealization, RngSeed, sample_network

__all__ = [
    "SimConfig",
    "TrialOutcome",
    "Estimate",
    "SuccessEstimates",
    "DistanceCdf",
    "AssociationEstimate",
    "LaplaceFunctionalEstimate",
    "WindowTooSmallError",
    "run_trial",
    "check_window",
    "estimate_success",
    "estimate_distance_cdf",
    "estimate_association",
    "estimate_laplace_functional",
]

MODES = ("paper_faithful", "physical")


class WindowTooSmallError(RuntimeError):
    """Interference from beyond the window would bias the run; enlarge it."""


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo campaign: parameters, window, budget, mode, seed."""

    params: NetworkParams
    window_radius: float = 500.0
    trials: int = 100_000
    seed: RngSeed = RngSeed(42)
    mode: str = "paper_faithful"
    ci_level: float = 0.95
    exact_ci: bool = False  # Clopper-Pearson intervals, for small trial counts

    def __post_init__(self):
        # trials == 0 means "analytic only" to the experiment runner; the
        # estimators themselves refuse to run without at least one trial.
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.window_radius <= 0:
            raise ValueError("window_radius must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("ci_level must lie in (0, 1)")


@dataclass(frozen=True)
class TrialOutcome:
    """Result of a single trial, for the link the bias rule selected."""

    r_v: float
    r_b: float
    mode_selected: str
    sinr: float
    success: bool
    I_r: float  # interference from the road through the origin, mW
    I_v: float  # interference from all other roads, mW
    min_interferer_dist: float = math.inf


@dataclass(frozen=True)
class Estimate:
    mean: float
    ci_halfwidth: float
    n: int


@dataclass(frozen=True)
class SuccessEstimates:
    """Per-threshold success estimates plus the link-selection fractions."""

    z_values: tuple[float, ...]
    v2x: tuple[Estimate, ...]
    cv2v: tuple[Estimate, ...]  # success AND v2v selected
    cv2b: tuple[Estimate, ...]  # success AND v2b selected
    v2v_only: tuple[Estimate, ...]  # v2v association forced, same realizations
    assoc_v2v: Estimate
    resamples: int


@dataclass(frozen=True)
class DistanceCdf:
    radii: tuple[float, ...]
    values: tuple[float, ...]
    resamples: int


@dataclass(frozen=True)
class AssociationEstimate:
    frac_v2v: Estimate
    resamples: int


@dataclass(frozen=True)
class LaplaceFunctionalEstimate:
    """Empirical means of exp(-s I) for the three interferer groupings."""

    all_roads: Estimate  # roads other than the origin's
    origin_road: Estimate
    combined: Estimate


# ---------------------------------------------------------------------------
# confidence intervals
# ---------------------------------------------------------------------------

def _normal_quantile(ci_level: float) -> float:
    return NormalDist().inv_cdf(0.5 + 0.5 * ci_level)


def _binom_cdf(k: int, n: int, p: float) -> float:
    """Exact P(X <= k) for X ~ Binomial(n, p), via log-space pmf summation."""
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return float(k >= n)
    log_p, log_q = math.log(p), math.log(1.0 - p)
    lg_n1 = math.lgamma(n + 1)
    acc = 0.0
    for i in range(0, k + 1):
        lpmf = (
            lg_n1 - math.lgamma(i + 1) - math.lgamma(n - i + 1)
            + i * log_p + (n - i) * log_q
        )
        acc += math.exp(lpmf)
    return min(acc, 1.0)


def _clopper_pearson(k: int, n: int, ci_level: float) -> tuple[float, float]:
    alpha = 1.0 - ci_level
    if k == 0:
        lower = 0.0
    else:
        # P(X >= k | p) grows with p; the lower bound makes it alpha/2
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if 1.0 - _binom_cdf(k - 1, n, mid) > alpha / 2.0:
                hi = mid
            else:
                lo = mid
        lower = 0.5 * (lo + hi)
    if k == n:
        upper = 1.0
    else:
        # P(X <= k | p) falls with p; the upper bound makes it alpha/2
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _binom_cdf(k, n, mid) > alpha / 2.0:
                lo = mid
            else:
                hi = mid
        upper = 0.5 * (lo + hi)
    return lower, upper


def _proportion_estimate(k: int, n: int, ci_level: float, exact: bool) -> Estimate:
    p = k / n
    if exact:
        lo, hi = _clopper_pearson(k, n, ci_level)
        return Estimate(p, 0.5 * (hi - lo), n)
    hw = _normal_quantile(ci_level) * math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return Estimate(p, hw, n)


def _mean_estimate(total: float, total_sq: float, n: int, ci_level: float) -> Estimate:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    hw = _normal_quantile(ci_level) * math.sqrt(var / n)
    return Estimate(mean, hw, n)


# ---------------------------------------------------------------------------
# per-trial machinery
# ---------------------------------------------------------------------------

class _TrialRecord(NamedTuple):
    r_v: float
    r_b: float
    mode: str
    sinr_selected: float
    sinr_v2v: float
    i_r: float
    i_v: float
    min_interferer_dist: float
    resamples: int


def _sample_usable(config: SimConfig, stream: np.random.Generator):
    resamples = 0
    while True:
        real = sample_network(config.params, config.window_radius, stream)
        if real.base_stations.shape[0] > 0 and real.tx_flags.any():
            return real, resamples
        resamples += 1


def _select_mode(params: NetworkParams, r_v: float, r_b: float) -> str:
    if params.bias_B == 0.0:
        return "v2b"
    if math.isinf(params.bias_B):
        return "v2v"
    lhs = params.bias_B * r_v ** (-params.alpha_v)
    return "v2v" if lhs >= r_b ** (-params.alpha_b) else "v2b"


def _distances(real: NetworkRealization, kern):
    ys = real.line_y()
    vy = ys[real.vehicle_line]
    d2 = vy * vy + real.vehicle_t * real.vehicle_t
    typical = real.vehicle_line == real.typical_line_index
    bs = real.base_stations
    bs_d2 = bs[:, 0] * bs[:, 0] + bs[:, 1] * bs[:, 1]
    j = int(np.argmin(bs_d2))
    min_d2v, serve = kern.min_tx_distance2(d2, real.tx_flags)
    return d2, typical, float(min_d2v), int(serve), float(bs_d2[j]), j


def _run_one(config: SimConfig, stream: np.random.Generator, kern) -> _TrialRecord:
    params = config.params
    real, resamples = _sample_usable(config, stream)
    d2, typical, min_d2v, serve, min_d2b, bs_idx = _distances(real, kern)
    r_v = math.sqrt(min_d2v)
    r_b = math.sqrt(min_d2b)
    mode = _select_mode(params, r_v, r_b)

    gains = stream.exponential(1.0, d2.size)
    h_serve = float(stream.exponential())
    power = params.P_v * gains
    faithful = config.mode == "paper_faithful"

    # V2V geometry (always computed: it also drives the forced-v2v estimate).
    # In paper_faithful mode the exclusion disc radius equals the serving
    # distance; for a v2v serving link no transmitter is closer anyway, so
    # mode only matters for exact ties.
    excl_v = min_d2v if faithful else 0.0
    i_r_v, i_v_v, min_kept_v = kern.interference_split(
        d2, power, real.tx_flags, typical, params.alpha_v, excl_v, serve
    )
    sinr_v2v = (
        params.P_v * h_serve * r_v ** (-params.alpha_v)
        / (i_r_v + i_v_v + params.sigma2)
    )

    if mode == "v2v":
        sinr_sel, i_r, i_v, min_kept2 = sinr_v2v, i_r_v, i_v_v, min_kept_v
    else:
        if faithful:
            # Receiver stays at the origin; no vehicle interferes from
            # inside the serving disc of radius r_b. The origin node is the
            # uplink transmitter and is not part of the vehicle set.
            i_r_b, i_v_b, min_kept_b = kern.interference_split(
                d2, power, real.tx_flags, typical, params.alpha_b, min_d2b, -1
            )
        else:
            # Receiver at the serving base station; every transmitting
            # vehicle interferes from its own distance to that station.
            thetas = np.array([ln.theta for ln in real.lines])
            ys = real.line_y()
            ct, st = np.cos(thetas), np.sin(thetas)
            vx = ys[real.vehicle_line] * ct[real.vehicle_line] - real.vehicle_t * st[real.vehicle_line]
            vy_pt = ys[real.vehicle_line] * st[real.vehicle_line] + real.vehicle_t * ct[real.vehicle_line]
            bx, by = real.base_stations[bs_idx]
            d2_bs = (vx - bx) ** 2 + (vy_pt - by) ** 2
            i_r_b, i_v_b, min_kept_b = kern.interference_split(
                d2_bs, power, real.tx_flags, typical, params.alpha_b, 0.0, -1
            )
        sinr_sel = (
            params.P_v * h_serve * r_b ** (-params.alpha_b)
            / (i_r_b + i_v_b + params.sigma2)
        )
        i_r, i_v, min_kept2 = i_r_b, i_v_b, min_kept_b

    return _TrialRecord(
        r_v=r_v,
        r_b=r_b,
        mode=mode,
        sinr_selected=sinr_sel,
        sinr_v2v=sinr_v2v,
        i_r=i_r,
        i_v=i_v,
        min_interferer_dist=math.sqrt(min_kept2) if math.isfinite(min_kept2) else math.inf,
        resamples=resamples,
    )


def run_trial(config: SimConfig, rng: np.random.Generator, backend: str | None = None) -> TrialOutcome:
    """Run one trial on an explicit RNG stream and report its outcome.

    Degenerate realizations are resampled from the same stream; the outcome
    always describes a usable draw.
    """
    kern = _backend.kernels(backend)
    rec = _run_one(config, rng, kern)
    return TrialOutcome(
        r_v=rec.r_v,
        r_b=rec.r_b,
        mode_selected=rec.mode,
        sinr=rec.sinr_selected,
        success=rec.sinr_selected > config.params.z,
        I_r=rec.i_r,
        I_v=rec.i_v,
        min_interferer_dist=rec.min_interferer_dist,
    )


# ---------------------------------------------------------------------------
# window sizing check
# ---------------------------------------------------------------------------

def _median_v2v_distance(params: NetworkParams, window_radius: float) -> float:
    lo, hi = 0.0, window_radius
    if v2v_cdf(hi, params) < 0.5:
        return hi
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if v2v_cdf(mid, params) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_window(config: SimConfig, z: float | None = None) -> float:
    """Abort if roads beyond the window would contribute materially.

    Evaluates, at the median V2V serving distance and the given threshold,
    the fraction of the analytic interference exponent produced by roads
    with |y| > window_radius; raises :class:`WindowTooSmallError` above
    1e-3. Returns the fraction. A zero threshold passes trivially.
    """
    params = config.params
    z_eff = params.z if z is None else z
    if z_eff <= 0.0:
        return 0.0
    r_med = _median_v2v_distance(params, config.window_radius)
    s = z_eff * r_med**params.alpha_v / params.P_v
    arg = LaplaceArg(
        s, r_med, params.alpha_v, params.mu_v, params.lambda_R, p_v=params.P_v
    )
    frac = window_tail_fraction(arg, config.window_radius)
    if frac >= 1e-3:
        suggestion = config.window_radius
        for _ in range(8):
            suggestion *= 2.0
            if window_tail_fraction(arg, suggestion) < 1e-3:
                break
        raise WindowTooSmallError(
            f"roads beyond the {config.window_radius:g} km window would carry "
            f"{frac:.2%} of the interference exponent (limit 0.1%); "
            f"increase window_radius to about {suggestion:g} km"
        )
    return frac


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def estimate_success(
    config: SimConfig, z_values: Sequence[float], backend: str | None = None
) -> SuccessEstimates:
    """Empirical success probabilities over a grid of linear thresholds.

    The SINR of a trial does not depend on the threshold, so one pass
    serves every entry of ``z_values`` with common random numbers; the
    forced-V2V estimate reuses the same realizations and fading.
    """
    if config.trials < 1:
        raise ValueError("estimation requires trials >= 1")
    kern = _backend.kernels(backend)
    z_arr = np.asarray(list(z_values), dtype=float)
    if z_arr.size and z_arr.min() < 0.0:
        raise ValueError("thresholds must be nonnegative")
    check_window(config, float(z_arr.max()) if z_arr.size else None)
    q = _normal_quantile(config.ci_level)
    if q * 0.5 / math.sqrt(config.trials) > 0.01:
        warnings.warn(
            f"{config.trials} trials cannot reach a 0.01 confidence halfwidth",
            stacklevel=2,
        )

    n = config.trials
    v2x = np.zeros(z_arr.size, dtype=np.int64)
    cv2v = np.zeros_like(v2x)
    cv2b = np.zeros_like(v2x)
    only = np.zeros_like(v2x)
    n_v2v = 0
    resamples = 0
    for i in range(n):
        rec = _run_one(config, config.seed.stream(i), kern)
        resamples += rec.resamples
        ok_sel = rec.sinr_selected > z_arr
        v2x += ok_sel
        if rec.mode == "v2v":
            n_v2v += 1
            cv2v += ok_sel
        else:
            cv2b += ok_sel
        only += rec.sinr_v2v > z_arr

    prop = lambda k: _proportion_estimate(int(k), n, config.ci_level, config.exact_ci)
    return SuccessEstimates(
        z_values=tuple(float(z) for z in z_arr),
        v2x=tuple(prop(k) for k in v2x),
        cv2v=tuple(prop(k) for k in cv2v),
        cv2b=tuple(prop(k) for k in cv2b),
        v2v_only=tuple(prop(k) for k in only),
        assoc_v2v=prop(n_v2v),
        resamples=resamples,
    )


def _distance_pass(config: SimConfig, kern):
    """Sample (r_v, r_b) per trial without fading draws."""
    if config.trials < 1:
        raise ValueError("estimation requires trials >= 1")
    n = config.trials
    r_v = np.empty(n)
    r_b = np.empty(n)
    resamples = 0
    for i in range(n):
        stream = config.seed.stream(i)
        real, extra = _sample_usable(config, stream)
        resamples += extra
        d2, typical, min_d2v, serve, min_d2b, _ = _distances(real, kern)
        r_v[i] = math.sqrt(min_d2v)
        r_b[i] = math.sqrt(min_d2b)
    return r_v, r_b, resamples


def estimate_distance_cdf(
    config: SimConfig, radii: Sequence[float], backend: str | None = None
) -> DistanceCdf:
    """Empirical CDF of the shortest V2V link distance on a radius grid."""
    kern = _backend.kernels(backend)
    r_v, _, resamples = _distance_pass(config, kern)
    r_v.sort()
    grid = np.asarray(list(radii), dtype=float)
    values = np.searchsorted(r_v, grid, side="right") / config.trials
    return DistanceCdf(
        radii=tuple(float(g) for g in grid),
        values=tuple(float(v) for v in values),
        resamples=resamples,
    )


def estimate_association(config: SimConfig, backend: str | None = None) -> AssociationEstimate:
    """Empirical probability that the bias rule selects the V2V link."""
    kern = _backend.kernels(backend)
    r_v, r_b, resamples = _distance_pass(config, kern)
    params = config.params
    if params.bias_B == 0.0:
        k = 0
    elif math.isinf(params.bias_B):
        k = config.trials
    else:
        k = int(
            np.count_nonzero(
                params.bias_B * r_v ** (-params.alpha_v) >= r_b ** (-params.alpha_b)
            )
        )
    return AssociationEstimate(
        frac_v2v=_proportion_estimate(k, config.trials, config.ci_level, config.exact_ci),
        resamples=resamples,
    )


def estimate_laplace_functional(
    config: SimConfig, s: float, r: float, backend: str | None = None
) -> LaplaceFunctionalEstimate:
    """Empirical E[exp(-s I)] conditioned on an empty disc of radius r.

    Conditioning a Poisson field on an empty region is just removal, so
    vehicles within r of the origin are dropped and the faded interference
    of the remainder is aggregated at the origin with the V2V path-loss
    exponent: the typical line alone, all other roads alone, and combined.
    No degeneracy applies here; an empty realization contributes exp(0).
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if config.trials < 1:
        raise ValueError("estimation requires trials >= 1")
    kern = _backend.kernels(backend)
    params = config.params
    n = config.trials
    sums = np.zeros(3)
    sums_sq = np.zeros(3)
    for i in range(n):
        stream = config.seed.stream(i)
        real = sample_network(params, config.window_radius, stream)
        ys = real.line_y()
        vy = ys[real.vehicle_line]
        d2 = vy * vy + real.vehicle_t * real.vehicle_t
        typical = real.vehicle_line == real.typical_line_index
        gains = stream.exponential(1.0, d2.size)
        i_typ, i_oth, _ = kern.interference_split(
            d2, params.P_v * gains, real.tx_flags, typical, params.alpha_v, r * r, -1
        )
        vals = np.array(
            [math.exp(-s * i_oth), math.exp(-s * i_typ), math.exp(-s * (i_oth + i_typ))]
        )
        sums += vals
        sums_sq += vals * vals
    est = [
        _mean_estimate(sums[j], sums_sq[j], n, config.ci_level) for j in range(3)
    ]
    return LaplaceFunctionalEstimate(all_roads=est[0], origin_road=est[1], combined=est[2])
