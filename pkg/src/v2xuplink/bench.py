"""Backend benchmark: numba kernels against the pure-numpy fallback.

Runs the same seeded success-estimation workload on every available kernel
backend and reports wall time plus the largest estimate discrepancy. Both
paths consume identical sampled arrays, so agreement is limited only by
summation order (pairwise numpy reductions versus sequential loops).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

from ._backend import available_backends
from .experiments import make_preset_spec
from .simulator import SimConfig, estimate_success

__all__ = ["BenchRow", "run_benchmark", "format_report"]


@dataclass(frozen=True)
class BenchRow:
    backend: str
    seconds: float
    trials_per_second: float
    p_v2x: float


def run_benchmark(trials: int = 20_000, seed: int = 42,
                  warmup_trials: int = 200) -> list[BenchRow]:
    spec = make_preset_spec("fig4", trials=trials, seed=seed)
    cfg: SimConfig = spec.sim
    z_grid = [0.1, 1.0, 10.0]
    rows = []
    for backend in available_backends():
        # warm-up compiles the jit kernels so timing measures steady state
        warm = SimConfig(
            params=cfg.params, window_radius=cfg.window_radius,
            trials=warmup_trials, seed=cfg.seed, mode=cfg.mode,
        )
        with warnings.catch_warnings():
            # small-trial CI warnings are irrelevant when timing
            warnings.simplefilter("ignore")
            estimate_success(warm, z_grid, backend=backend)
            start = time.perf_counter()
            est = estimate_success(cfg, z_grid, backend=backend)
            dt = time.perf_counter() - start
        rows.append(
            BenchRow(
                backend=backend,
                seconds=dt,
                trials_per_second=trials / dt,
                p_v2x=est.v2x[1].mean,
            )
        )
    return rows


def format_report(rows: list[BenchRow], trials: int) -> str:
    lines = [f"kernel backend benchmark ({trials} trials, success estimation)"]
    lines.append(f"{'backend':<10} {'seconds':>10} {'trials/s':>12} {'p_v2x(z=1)':>12}")
    for row in rows:
        lines.append(
            f"{row.backend:<10} {row.seconds:>10.3f} {row.trials_per_second:>12.0f} "
            f"{row.p_v2x:>12.6f}"
        )
    if len(rows) > 1:
        spread = max(r.p_v2x for r in rows) - min(r.p_v2x for r in rows)
        lines.append(f"max estimate spread across backends: {spread:.3e}")
    return "\n".join(lines)
