"""Closed-form and integral-form expressions for link distances, association
probabilities, interference Laplace functionals and success probabilities.

Conventions shared by every function here:

* All quantities are linear (mW, km, dimensionless SINR threshold z).
* The typical receiver sits at the origin; r is the serving distance and
  doubles as the radius of the interferer-free exclusion disc.
* The Laplace variable follows s = z * r^alpha / P_v, so the product
  s * P_v = z * r^alpha is what actually enters every interference
  integrand; transmit power cancels between signal and interference.
* Interference seen over a link with path-loss exponent alpha uses that
  same alpha for every interferer.

Where a quantity has both an integral form and a printed closed form, both
are implemented and cross-checked by the test suite; the quadrature route is
deliberately kept free of Bessel/Struve evaluations so the two routes stay
independent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pointprocess import NetworkParams
from .specfun import (
    DEFAULT_QUADRATURE,
    IntegrationError,
    QuadratureSpec,
    gauss_2f1,
    i0_minus_l0,
    integrate,
    lm1_minus_i1,
)

__all__ = [
    "LaplaceArg",
    "SuccessBreakdown",
    "v2v_cdf",
    "v2v_ccdf",
    "v2v_pdf",
    "v2b_pdf",
    "assoc_v2v_given_rv",
    "assoc_v2v",
    "assoc_v2b_given_rb",
    "assoc_v2b",
    "laplace_road_outside",
    "laplace_road_inside",
    "laplace_origin_road",
    "laplace_all_roads",
    "all_roads_exclusion_integrals",
    "window_tail_fraction",
    "success_v2v_given_r",
    "success_v2b_given_r",
    "success_v2x",
    "success_v2v_only",
]


@dataclass(frozen=True)
class LaplaceArg:
    """Arguments of the interference Laplace functionals.

    ``s`` is the Laplace variable (1/(mW km^-alpha)); the conditioning
    radius ``r`` is the exclusion-disc radius around the origin. ``p_v``
    carries the transmit power so integrands can form the product s*P_v;
    it defaults to 1 so callers that already fold the power into s (or
    sweep the dimensionless product directly) need not set it.
    """

    s: float
    r: float
    alpha: float
    mu_v: float
    lambda_R: float
    window_radius: float = math.inf
    p_v: float = 1.0

    def __post_init__(self):
        if not self.s >= 0.0:
            raise ValueError("s must be nonnegative")
        if not self.r >= 0.0:
            raise ValueError("r must be nonnegative")
        if not self.alpha > 1.0:
            raise ValueError("alpha must exceed 1")


@dataclass(frozen=True)
class SuccessBreakdown:
    """Success probability split into its V2V and V2B contributions.

    ``p_v2v_success``/``p_v2b_success`` are the association-weighted mode
    terms whose sum is ``p_v2x``; the association fields are the
    unconditional link-selection probabilities.
    """

    p_v2v_success: float
    p_v2b_success: float
    p_v2v_assoc: float
    p_v2b_assoc: float
    p_v2x: float
    p_v2v_only: float

    def __post_init__(self):
        eps = 1e-6
        for name in (
            "p_v2v_success",
            "p_v2b_success",
            "p_v2v_assoc",
            "p_v2b_assoc",
            "p_v2x",
            "p_v2v_only",
        ):
            v = getattr(self, name)
            if not -eps <= v <= 1.0 + eps:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.p_v2v_assoc + self.p_v2b_assoc - 1.0) > 2e-3:
            raise ValueError("association probabilities do not sum to 1")
        if abs(self.p_v2x - (self.p_v2v_success + self.p_v2b_success)) > 1e-9:
            raise ValueError("p_v2x must equal the sum of its mode terms")


# ---------------------------------------------------------------------------
# V2V / V2B distance laws
# ---------------------------------------------------------------------------

def _chord_gap_integral(radius: float, mu_v: float, quad: QuadratureSpec) -> float:
    """int_0^radius (1 - exp(-2 mu sqrt(radius^2 - y^2))) dy.

    Substituting y = radius*sin(phi) removes the square-root kink; the
    integrand then involves only exp/cos, keeping this route independent of
    the Bessel/Struve closed form it is tested against.
    """
    if radius == 0.0:
        return 0.0

    def g(phi):
        return (1.0 - np.exp(-2.0 * mu_v * radius * np.cos(phi))) * np.cos(phi) * radius

    return integrate(g, 0.0, 0.5 * math.pi, quad, vectorized=True)


def v2v_ccdf(r_v: float, params: NetworkParams, quad: QuadratureSpec | None = None) -> float:
    """P(no transmitter-eligible vehicle within r_v of the origin)."""
    if not r_v >= 0.0:
        raise ValueError("r_v must be nonnegative")
    quad = quad or DEFAULT_QUADRATURE
    gap = _chord_gap_integral(r_v, params.mu_v, quad)
    return math.exp(-2.0 * math.pi * params.lambda_R * gap - 2.0 * params.mu_v * r_v)


def v2v_cdf(r_v: float, params: NetworkParams, quad: QuadratureSpec | None = None) -> float:
    """CDF of the shortest V2V link distance."""
    return 1.0 - v2v_ccdf(r_v, params, quad)


def v2v_pdf(r_v: float, params: NetworkParams) -> float:
    """Density of the shortest V2V link distance (closed form).

    Written with the stable combinations I0-L0 and L_{-1}-I1 of the modified
    Bessel/Struve functions; algebraically identical to the derivative of
    the CDF, which the test suite checks by finite differences.
    """
    if not r_v >= 0.0:
        raise ValueError("r_v must be nonnegative")
    lam, mu = params.lambda_R, params.mu_v
    x = 2.0 * mu * r_v
    d0 = i0_minus_l0(x)
    d1 = lm1_minus_i1(x)
    front = 2.0 * math.pi**2 * lam * mu * r_v * d0 + 2.0 * mu
    exponent = (
        -2.0 * math.pi * lam * r_v + math.pi**2 * lam * r_v * d1 - 2.0 * mu * r_v
    )
    return front * math.exp(exponent)


def v2b_pdf(r_b: float, lambda_b: float) -> float:
    """Nearest base-station distance density: 2 pi lambda_b r exp(-pi lambda_b r^2)."""
    if r_b < 0.0:
        return 0.0
    return 2.0 * math.pi * lambda_b * r_b * math.exp(-math.pi * lambda_b * r_b * r_b)


# ---------------------------------------------------------------------------
# association probabilities of the biased link selection
# ---------------------------------------------------------------------------

def assoc_v2v_given_rv(r_v: float, params: NetworkParams) -> float:
    """P(V2V selected | shortest vehicle at r_v): no BS inside the bias disc.

    The selection rule B * r_v^-alpha_v >= r_b^-alpha_b holds exactly when
    the nearest BS is farther than r_v^(alpha_v/alpha_b) / B^(1/alpha_b).
    """
    if params.bias_B == 0.0:
        return 0.0
    if math.isinf(params.bias_B):
        return 1.0
    radius = r_v ** (params.alpha_v / params.alpha_b) / params.bias_B ** (
        1.0 / params.alpha_b
    )
    return math.exp(-math.pi * params.lambda_b * radius * radius)


def assoc_v2v(params: NetworkParams, quad: QuadratureSpec | None = None) -> float:
    """Unconditional probability that the V2V link is selected."""
    if params.bias_B == 0.0:
        return 0.0
    if math.isinf(params.bias_B):
        return 1.0
    quad = quad or DEFAULT_QUADRATURE

    def f(r):
        return assoc_v2v_given_rv(r, params) * v2v_pdf(r, params)

    return integrate(f, 0.0, math.inf, quad)


def assoc_v2b_given_rb(r_b: float, params: NetworkParams, quad: QuadratureSpec | None = None) -> float:
    """P(V2B selected | nearest BS at r_b): no vehicle inside the bias disc."""
    if params.bias_B == 0.0:
        return 1.0
    if math.isinf(params.bias_B):
        return 0.0
    radius = params.bias_B ** (1.0 / params.alpha_v) * r_b ** (
        params.alpha_b / params.alpha_v
    )
    return v2v_ccdf(radius, params, quad)


def assoc_v2b(params: NetworkParams, quad: QuadratureSpec | None = None) -> float:
    """Unconditional probability that the V2B link is selected."""
    if params.bias_B == 0.0:
        return 1.0
    if math.isinf(params.bias_B):
        return 0.0
    quad = quad or DEFAULT_QUADRATURE

    def f(r):
        return assoc_v2b_given_rb(r, params, quad) * v2b_pdf(r, params.lambda_b)

    return integrate(f, 0.0, math.inf, quad)


# ---------------------------------------------------------------------------
# interference Laplace functionals
# ---------------------------------------------------------------------------

def _road_gap(a: float, y, t_lower, alpha: float, quad: QuadratureSpec, method: str = "auto"):
    """int_{t_lower}^inf [1 - 1/(1 + a (y^2+t^2)^(-alpha/2))] dt.

    ``a`` is the product s*P_v. For alpha = 4 the integrand is
    a / ((y^2+t^2)^2 + a) and partial fractions over the complex conjugate
    roots give the closed form sqrt(a) * Im[(pi/2 - atan(T/c)) / c] with
    c = sqrt(y^2 - i sqrt(a)); vectorized over y. Other exponents go through
    adaptive quadrature. ``method`` forces one route for cross-checking.
    """
    if a == 0.0:
        return np.zeros_like(np.asarray(y, dtype=float)) if np.ndim(y) else 0.0
    use_closed = (alpha == 4.0 and method == "auto") or method == "closed"
    if use_closed:
        if alpha != 4.0:
            raise ValueError("closed route requires alpha = 4")
        ya = np.asarray(y, dtype=float)
        ta = np.asarray(t_lower, dtype=float)
        c = np.sqrt(ya * ya - 1j * math.sqrt(a))
        val = math.sqrt(a) * ((0.5 * math.pi - np.arctan(ta / c)) / c).imag
        return val if np.ndim(y) else float(val)

    y_s = float(y)
    t0 = float(t_lower)

    def g(t):
        return 1.0 - 1.0 / (1.0 + a * (y_s * y_s + t * t) ** (-0.5 * alpha))

    return integrate(g, t0, math.inf, quad, vectorized=True)


def laplace_road_outside(
    arg: LaplaceArg,
    y: float,
    method: str = "auto",
    quad: QuadratureSpec | None = None,
) -> float:
    """Laplace functional of interference from one road at distance y >= r.

    Interferers occupy the whole road, so the offset integral starts at 0.
    """
    if not y >= 0.0:
        raise ValueError("y must be nonnegative")
    if arg.s == 0.0:
        return 1.0
    quad = quad or DEFAULT_QUADRATURE
    gap = _road_gap(arg.s * arg.p_v, y, 0.0, arg.alpha, quad, method)
    return math.exp(-2.0 * arg.mu_v * gap)


def laplace_road_inside(
    arg: LaplaceArg,
    y: float,
    method: str = "auto",
    quad: QuadratureSpec | None = None,
) -> float:
    """Laplace functional for a road crossing the exclusion disc (y < r).

    The chord inside the disc holds no interferer, so the offset integral
    starts at sqrt(r^2 - y^2).
    """
    if not 0.0 <= y:
        raise ValueError("y must be nonnegative")
    if arg.s == 0.0:
        return 1.0
    quad = quad or DEFAULT_QUADRATURE
    t0 = math.sqrt(max(arg.r * arg.r - y * y, 0.0))
    gap = _road_gap(arg.s * arg.p_v, y, t0, arg.alpha, quad, method)
    return math.exp(-2.0 * arg.mu_v * gap)


def _acoth(w: float) -> float:
    return 0.5 * math.log((w + 1.0) / (w - 1.0))


@lru_cache(maxsize=512)
def _origin_road_hyp(alpha: float, z: float) -> float:
    return gauss_2f1(1.0, (alpha - 1.0) / alpha, 2.0 - 1.0 / alpha, -z)


def laplace_origin_road(
    z: float,
    r: float,
    alpha: float,
    mu_v: float,
    method: str = "auto",
    quad: QuadratureSpec | None = None,
) -> float:
    """Laplace functional of interference from the road through the origin.

    Evaluated at s = z r^alpha / P_v, the transform depends on (z, r, alpha,
    mu_v) only. Three routes are kept:

    * ``integral``: exp(-2 mu int_r^inf [1 - 1/(1 + z r^alpha t^-alpha)] dt)
    * ``hypergeometric``: exp(-2 r z mu 2F1(1, (a-1)/a; 2-1/a; -z) / (a-1))
    * ``closed4``: the alpha = 4 arctan/acoth form

    ``auto`` picks closed4 for alpha = 4 (falling back to the
    hypergeometric route for tiny z, where closed4 cancels badly) and the
    hypergeometric route otherwise.
    """
    if not z >= 0.0:
        raise ValueError("z must be nonnegative")
    if not alpha > 1.0:
        raise ValueError("alpha must exceed 1")
    if z == 0.0 or r == 0.0 or mu_v == 0.0:
        return 1.0
    if method == "auto":
        method = "closed4" if alpha == 4.0 and z >= 1e-8 else "hypergeometric"
    if method == "hypergeometric":
        exponent = -2.0 * r * z * mu_v * _origin_road_hyp(alpha, z) / (alpha - 1.0)
        return math.exp(exponent)
    if method == "closed4":
        if alpha != 4.0:
            raise ValueError("closed4 requires alpha = 4")
        q = z**0.25
        bracket = (
            -math.atan(math.sqrt(2.0) / q + 1.0)
            + math.atan(1.0 - math.sqrt(2.0) / q)
            - _acoth((math.sqrt(z) + 1.0) / (math.sqrt(2.0) * q))
            + math.pi
        )
        return math.exp(-(r * q * mu_v / math.sqrt(2.0)) * bracket)
    if method == "integral":
        quad = quad or DEFAULT_QUADRATURE
        gap = _road_gap(z * r**alpha, 0.0, r, alpha, quad, method="integral")
        return math.exp(-2.0 * mu_v * gap)
    raise ValueError(f"unknown method {method!r}")


def all_roads_exclusion_integrals(
    arg: LaplaceArg, quad: QuadratureSpec | None = None
) -> tuple[float, float]:
    """The two y-integrals of 1 - L(road at y) behind the all-roads functional.

    Returns (inner, outer): inner integrates roads crossing the exclusion
    disc over y in [0, r]; outer integrates whole roads over y in
    [r, window_radius] (window may be infinite). Exposed separately so the
    Monte Carlo suite can adjudicate the sign/prefactor of the assembled
    functional against the empirical E[exp(-s I)].
    """
    quad = quad or DEFAULT_QUADRATURE
    a = arg.s * arg.p_v
    if a == 0.0:
        return 0.0, 0.0
    vec = arg.alpha == 4.0

    if vec:
        def inner_f(y):
            t0 = np.sqrt(np.maximum(arg.r * arg.r - y * y, 0.0))
            return 1.0 - np.exp(-2.0 * arg.mu_v * _road_gap(a, y, t0, 4.0, quad))

        def outer_f(y):
            return 1.0 - np.exp(-2.0 * arg.mu_v * _road_gap(a, y, 0.0, 4.0, quad))
    else:
        def inner_f(y):
            t0 = math.sqrt(max(arg.r * arg.r - y * y, 0.0))
            return 1.0 - math.exp(-2.0 * arg.mu_v * _road_gap(a, y, t0, arg.alpha, quad))

        def outer_f(y):
            return 1.0 - math.exp(-2.0 * arg.mu_v * _road_gap(a, y, 0.0, arg.alpha, quad))

    try:
        inner = integrate(inner_f, 0.0, arg.r, quad, vectorized=vec) if arg.r > 0 else 0.0
    except IntegrationError as exc:
        raise IntegrationError(f"inner (crossing-roads) integral failed: {exc}", exc.partial) from exc
    try:
        outer = integrate(outer_f, arg.r, arg.window_radius, quad, vectorized=vec)
    except IntegrationError as exc:
        raise IntegrationError(f"outer (whole-roads) integral failed: {exc}", exc.partial) from exc
    return inner, outer


def laplace_all_roads(arg: LaplaceArg, quad: QuadratureSpec | None = None) -> float:
    """Laplace functional of interference from every road except the origin's.

    Assembled from the line-process generating functional as
    exp(-2 pi lambda_R [int_0^r (1 - L_in) dy + int_r^Rwin (1 - L_out) dy]),
    which is <= 1 and equals 1 at s = 0 as any Laplace transform must.
    """
    if arg.s == 0.0 or arg.lambda_R == 0.0 or arg.mu_v == 0.0:
        return 1.0
    inner, outer = all_roads_exclusion_integrals(arg, quad)
    return math.exp(-2.0 * math.pi * arg.lambda_R * (inner + outer))


def window_tail_fraction(arg: LaplaceArg, window_radius: float,
                         quad: QuadratureSpec | None = None) -> float:
    """Fraction of the all-roads exponent contributed by roads beyond the window.

    Used to size simulation windows: the finite-window simulator ignores
    roads with |y| > window_radius, and this measures what the analytic
    exponent loses with the same truncation.
    """
    quad = quad or DEFAULT_QUADRATURE
    full = LaplaceArg(arg.s, arg.r, arg.alpha, arg.mu_v, arg.lambda_R,
                      window_radius=math.inf, p_v=arg.p_v)
    inner, outer = all_roads_exclusion_integrals(full, quad)
    total = inner + outer
    if total <= 0.0:
        return 0.0
    a = arg.s * arg.p_v
    vec = arg.alpha == 4.0
    if vec:
        def outer_f(y):
            return 1.0 - np.exp(-2.0 * arg.mu_v * _road_gap(a, y, 0.0, 4.0, quad))
    else:
        def outer_f(y):
            return 1.0 - math.exp(-2.0 * arg.mu_v * _road_gap(a, y, 0.0, arg.alpha, quad))
    tail = integrate(outer_f, max(window_radius, arg.r), math.inf, quad, vectorized=vec)
    return tail / total


# ---------------------------------------------------------------------------
# success probabilities
# ---------------------------------------------------------------------------

def _success_given(z: float, r: float, alpha: float, params: NetworkParams,
                   quad: QuadratureSpec | None) -> float:
    if not z >= 0.0:
        raise ValueError("z must be nonnegative")
    if z == 0.0:
        return 1.0
    if r == 0.0:
        return 1.0
    r_alpha = r**alpha
    s = z * r_alpha / params.P_v
    noise = math.exp(-z * params.sigma2 * r_alpha / params.P_v)
    arg = LaplaceArg(s, r, alpha, params.mu_v, params.lambda_R, p_v=params.P_v)
    return (
        noise
        * laplace_all_roads(arg, quad)
        * laplace_origin_road(z, r, alpha, params.mu_v, quad=quad)
    )


def success_v2v_given_r(z: float, r_v: float, params: NetworkParams,
                        quad: QuadratureSpec | None = None) -> float:
    """P(SINR > z) over a V2V link of length r_v with exclusion disc r_v."""
    if not r_v > 0.0:
        raise ValueError("r_v must be positive")
    return _success_given(z, r_v, params.alpha_v, params, quad)


def success_v2b_given_r(z: float, r_b: float, params: NetworkParams,
                        quad: QuadratureSpec | None = None) -> float:
    """P(SINR > z) over a V2B uplink of length r_b with exclusion disc r_b."""
    if not r_b >= 0.0:
        raise ValueError("r_b must be nonnegative")
    return _success_given(z, r_b, params.alpha_b, params, quad)


def success_v2v_only(z: float, params: NetworkParams,
                     quad: QuadratureSpec | None = None) -> float:
    """Success probability when every node uses its nearest vehicle."""
    quad = quad or DEFAULT_QUADRATURE

    def f(r):
        return success_v2v_given_r(z, r, params, quad) * v2v_pdf(r, params)

    try:
        return integrate(f, 0.0, math.inf, quad)
    except IntegrationError as exc:
        raise IntegrationError(f"v2v-only success integral failed: {exc}", exc.partial) from exc


def success_v2x(z: float, params: NetworkParams,
                quad: QuadratureSpec | None = None) -> SuccessBreakdown:
    """Overall success probability under the biased link selection.

    Total-probability assembly: each mode term integrates the conditional
    success times the conditional association probability against that
    mode's serving-distance density. At z = 0 the two terms reduce to the
    association probabilities, so p_v2x(0) = 1 up to quadrature error.
    """
    quad = quad or DEFAULT_QUADRATURE

    if params.bias_B == 0.0:
        term_v = 0.0
    else:
        def f_v(r):
            return (
                success_v2v_given_r(z, r, params, quad)
                * assoc_v2v_given_rv(r, params)
                * v2v_pdf(r, params)
            )

        try:
            term_v = integrate(f_v, 0.0, math.inf, quad)
        except IntegrationError as exc:
            raise IntegrationError(f"v2v success term failed: {exc}", exc.partial) from exc

    if math.isinf(params.bias_B):
        term_b = 0.0
    else:
        def f_b(r):
            return (
                success_v2b_given_r(z, r, params, quad)
                * assoc_v2b_given_rb(r, params, quad)
                * v2b_pdf(r, params.lambda_b)
            )

        try:
            term_b = integrate(f_b, 0.0, math.inf, quad)
        except IntegrationError as exc:
            raise IntegrationError(f"v2b success term failed: {exc}", exc.partial) from exc

    return SuccessBreakdown(
        p_v2v_success=term_v,
        p_v2b_success=term_b,
        p_v2v_assoc=assoc_v2v(params, quad),
        p_v2b_assoc=assoc_v2b(params, quad),
        p_v2x=term_v + term_b,
        p_v2v_only=success_v2v_only(z, params, quad),
    )
