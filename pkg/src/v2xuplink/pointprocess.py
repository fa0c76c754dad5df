"""Sampling of the road/vehicle/base-station geometry inside a finite window.

Roads are an isotropic Poisson line process: a line is the pair (theta, y)
with theta the angle of the foot of the perpendicular from the origin and y
the signed perpendicular distance, so lines hitting the disc of radius R_win
correspond to a uniform Poisson point process on [0, pi) x [-R_win, R_win]
with mean count 2*pi*lambda_R*R_win. Vehicles live on each line as a 1D
Poisson process along the chord; base stations are a planar Poisson process
in the disc. The typical receiver is placed at the origin by adding one line
through the origin plus its own vehicle process (Palm conditioning), and the
receiver itself never transmits.

All sampling takes an explicit numpy Generator; nothing here holds global
state, so independent streams can run on any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "Line",
    "NetworkParams",
    "NetworkRealization",
    "RngSeed",
    "DegenerateRealizationError",
    "sample_plp",
    "sample_vehicles_on_line",
    "thin_transmitters",
    "sample_bs",
    "palm_condition",
    "sample_network",
    "to_xy",
    "nearest_distances",
]


class DegenerateRealizationError(RuntimeError):
    """Realization has no transmitting vehicle or no base station; resample."""


@dataclass(frozen=True)
class RngSeed:
    """64-bit seed from which named child streams are derived."""

    seed: int

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def stream(self, *key: int) -> np.random.Generator:
        """Deterministic child generator for a given integer key path."""
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=self.seed, spawn_key=key))
        )


@dataclass(frozen=True)
class Line:
    """A road in (theta, y) representation coordinates; distances in km."""

    theta: float
    y: float


@dataclass(frozen=True)
class NetworkParams:
    """Full parameter tuple consumed by every formula and by the simulator.

    Intensities are per km (mu_v), per km of perpendicular-distance space
    (lambda_R) and per km^2 (lambda_b). Powers are linear milliwatts, the
    SINR threshold z is linear; dB/dBm conversion happens only at the CLI
    boundary. bias_B may be 0 or math.inf, the documented selection extremes.
    """

    lambda_R: float
    mu_v: float
    lambda_b: float
    bias_B: float = 1.0
    P_v: float = 1000.0  # 30 dBm
    alpha_v: float = 4.0
    alpha_b: float = 4.0
    sigma2: float = 10.0 ** (-10.4)  # -174 dBm/Hz over 10 MHz
    p_tx: float = 1.0
    z: float = 1.0  # 0 dB

    def __post_init__(self):
        if not (self.lambda_R > 0 and self.mu_v > 0 and self.lambda_b > 0):
            raise ValueError("lambda_R, mu_v and lambda_b must be positive")
        if not (self.alpha_v > 1 and self.alpha_b > 1):
            raise ValueError("path-loss exponents must exceed 1")
        if not (self.P_v > 0 and self.sigma2 > 0):
            raise ValueError("P_v and sigma2 must be positive")
        if not 0.0 <= self.p_tx <= 1.0:
            raise ValueError("p_tx must lie in [0, 1]")
        if not self.z >= 0.0:
            raise ValueError("z must be nonnegative")
        if not self.bias_B >= 0.0:
            raise ValueError("bias_B must be nonnegative (inf allowed)")


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled network; immutable once built.

    Vehicles are stored flat: ``vehicle_line[i]`` indexes ``lines`` and
    ``vehicle_t[i]`` is the signed offset along that line from the foot of
    its perpendicular, so the distance of vehicle i from the origin is
    hypot(lines[vehicle_line[i]].y, vehicle_t[i]). ``typical_line_index`` is
    None until Palm conditioning adds the line through the origin (appended
    last). The receiver at the origin is implicit and never listed.
    """

    window_radius: float
    lines: tuple[Line, ...]
    vehicle_line: np.ndarray
    vehicle_t: np.ndarray
    tx_flags: np.ndarray
    base_stations: np.ndarray
    typical_line_index: int | None = None

    @property
    def vehicles(self) -> list[np.ndarray]:
        """Per-line offset arrays, in line order."""
        return [
            self.vehicle_t[self.vehicle_line == i] for i in range(len(self.lines))
        ]

    def line_y(self) -> np.ndarray:
        return np.array([ln.y for ln in self.lines], dtype=float)

    def vehicle_distances(self) -> np.ndarray:
        """Distance of every vehicle from the origin."""
        if self.vehicle_t.size == 0:
            return np.empty(0)
        ys = self.line_y()[self.vehicle_line]
        return np.hypot(ys, self.vehicle_t)


def sample_plp(lambda_R: float, window_radius: float, rng: np.random.Generator) -> list[Line]:
    """Sample the lines hitting the disc of radius ``window_radius``."""
    if lambda_R <= 0 or window_radius <= 0:
        raise ValueError("lambda_R and window_radius must be positive")
    n = rng.poisson(2.0 * math.pi * lambda_R * window_radius)
    thetas = rng.uniform(0.0, math.pi, n)
    ys = rng.uniform(-window_radius, window_radius, n)
    return [Line(float(t), float(y)) for t, y in zip(thetas, ys)]


def sample_vehicles_on_line(
    line: Line, mu: float, window_radius: float, rng: np.random.Generator
) -> np.ndarray:
    """1D Poisson process of intensity ``mu`` on the chord inside the window."""
    half = window_radius * window_radius - line.y * line.y
    if half <= 0.0:
        return np.empty(0)
    half = math.sqrt(half)
    n = rng.poisson(2.0 * mu * half)
    return rng.uniform(-half, half, n)


def thin_transmitters(vehicles, p_tx: float, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli(p_tx) retention flag per vehicle."""
    if not 0.0 <= p_tx <= 1.0:
        raise ValueError("p_tx must lie in [0, 1]")
    return rng.random(len(vehicles)) < p_tx


def sample_bs(lambda_b: float, window_radius: float, rng: np.random.Generator) -> np.ndarray:
    """Planar Poisson process in the disc; returns an (n, 2) array."""
    if lambda_b <= 0:
        raise ValueError("lambda_b must be positive")
    n = rng.poisson(lambda_b * math.pi * window_radius * window_radius)
    radius = window_radius * np.sqrt(rng.random(n))
    angle = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def palm_condition(
    realization: NetworkRealization,
    mu: float,
    rng: np.random.Generator,
    p_tx: float = 1.0,
) -> NetworkRealization:
    """Add the line through the origin and its vehicles; receiver at origin.

    The original lines and points are unchanged; the typical line is
    appended with a uniform angle and y = 0, populated over its full chord.
    """
    theta = float(rng.uniform(0.0, math.pi))
    typical = Line(theta, 0.0)
    t_new = sample_vehicles_on_line(typical, mu, realization.window_radius, rng)
    tx_new = thin_transmitters(t_new, p_tx, rng)
    idx = len(realization.lines)
    return replace(
        realization,
        lines=realization.lines + (typical,),
        vehicle_line=np.concatenate(
            [realization.vehicle_line, np.full(t_new.size, idx, dtype=np.int64)]
        ),
        vehicle_t=np.concatenate([realization.vehicle_t, t_new]),
        tx_flags=np.concatenate([realization.tx_flags, tx_new]),
        typical_line_index=idx,
    )


def sample_network(
    params: NetworkParams, window_radius: float, rng: np.random.Generator
) -> NetworkRealization:
    """Sample a complete Palm-conditioned realization.

    This is the vectorized path the Monte Carlo engine runs per trial: one
    Poisson draw for the line count, one batched Poisson draw for all
    per-line vehicle counts (typical line last), flat draws for offsets and
    thinning, then the base stations.
    """
    R = window_radius
    if R <= 0:
        raise ValueError("window_radius must be positive")
    n_lines = rng.poisson(2.0 * math.pi * params.lambda_R * R)
    thetas = rng.uniform(0.0, math.pi, n_lines)
    ys = rng.uniform(-R, R, n_lines)
    typ_theta = rng.uniform(0.0, math.pi)
    y_all = np.append(ys, 0.0)
    th_all = np.append(thetas, typ_theta)
    half = np.sqrt(np.maximum(R * R - y_all * y_all, 0.0))
    counts = rng.poisson(2.0 * params.mu_v * half)
    total = int(counts.sum())
    vehicle_t = rng.uniform(-1.0, 1.0, total) * np.repeat(half, counts)
    tx = rng.random(total) < params.p_tx
    bs = sample_bs(params.lambda_b, R, rng)
    lines = tuple(Line(float(t), float(y)) for t, y in zip(th_all, y_all))
    return NetworkRealization(
        window_radius=R,
        lines=lines,
        vehicle_line=np.repeat(np.arange(n_lines + 1, dtype=np.int64), counts),
        vehicle_t=vehicle_t,
        tx_flags=tx,
        base_stations=bs,
        typical_line_index=n_lines,
    )


def to_xy(line: Line, t):
    """Map a signed offset along a line to plane coordinates.

    The point at offset t on line (theta, y) is y*n + t*d with n the unit
    normal (cos theta, sin theta) and d the unit direction
    (-sin theta, cos theta); its distance from the origin is hypot(y, t).
    Accepts a scalar or an array of offsets.
    """
    ct, st = math.cos(line.theta), math.sin(line.theta)
    x = line.y * ct - np.asarray(t) * st
    yy = line.y * st + np.asarray(t) * ct
    if np.ndim(t) == 0:
        return float(x), float(yy)
    return np.column_stack([x, yy])


def nearest_distances(realization: NetworkRealization) -> tuple[float, float]:
    """Shortest transmitting-vehicle and base-station distances from origin.

    Raises :class:`DegenerateRealizationError` when either set is empty,
    signalling that the caller should resample.
    """
    if realization.base_stations.shape[0] == 0:
        raise DegenerateRealizationError("no base station in window")
    tx = realization.tx_flags
    if not tx.any():
        raise DegenerateRealizationError("no transmitting vehicle in window")
    d = realization.vehicle_distances()[tx]
    r_v = float(d.min())
    r_b = float(np.hypot(realization.base_stations[:, 0], realization.base_stations[:, 1]).min())
    return r_v, r_b
