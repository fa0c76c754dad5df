"""Configuration-driven experiment runner.

An experiment is described by an INI file with flat key=value sections
([experiment], [params], [sweep], [sim], [outputs]) or by a named preset
matching the published parameter sets; presets and file values merge, with
the file and then CLI flags winning. Runs produce a table of analytic
quantities and, when trials > 0, Monte Carlo estimates side by side, then
emit CSV and/or SVG artifacts.

Unit discipline: this module is the dB boundary. Files and CLI speak dBm
(powers) and dB (SINR threshold); everything below works in linear mW and
linear ratios. Sweep values for z are dB and are converted per row.
"""

from __future__ import annotations

import configparser
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import analytic
from .pointprocess import NetworkParams, RngSeed
from .simulator import (
    SimConfig,
    WindowTooSmallError,
    check_window,
    estimate_association,
    estimate_distance_cdf,
    estimate_success,
)

__all__ = [
    "ExperimentSpec",
    "ExperimentSpecError",
    "SweepResult",
    "RowResult",
    "PRESETS",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_mw",
    "mw_to_dbm",
    "noise_power_mw",
    "load_spec",
    "make_preset_spec",
    "run",
    "emit_csv",
    "emit_plot",
    "read_csv",
    "dump_realization",
    "load_realization",
]

KINDS = ("success_sweep", "association_sweep", "distance_cdf")
SWEEPABLE = ("z_dB", "mu_v", "lambda_R", "lambda_b", "bias_B")

SWEEP_COLUMN = {
    "z_dB": "z_dB",
    "mu_v": "mu_v_per_km",
    "lambda_R": "lambda_R_per_km",
    "lambda_b": "lambda_b_per_km2",
    "bias_B": "bias_B",
}

_ANALYTIC_COLUMNS = (
    "p_v2x_analytic",
    "p_cv2v_analytic",
    "p_cv2b_analytic",
    "p_v2v_only_analytic",
    "assoc_v2v_analytic",
    "assoc_v2b_analytic",
)
_MC_COLUMNS = (
    "p_v2x_mc",
    "p_v2x_mc_ci",
    "p_cv2v_mc",
    "p_cv2v_mc_ci",
    "p_cv2b_mc",
    "p_cv2b_mc_ci",
    "p_v2v_only_mc",
    "p_v2v_only_mc_ci",
    "assoc_v2v_mc",
    "assoc_v2v_mc_ci",
    "resamples_mc",
)
_CDF_COLUMNS = ("cdf_analytic", "cdf_mc")


class ExperimentSpecError(ValueError):
    """A named validation failure in an experiment description."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def noise_power_mw(psd_dbm_hz: float = -174.0, bandwidth_hz: float = 1.0e7) -> float:
    """Thermal noise over a bandwidth: psd + 10 log10(BW), linearized."""
    return dbm_to_mw(psd_dbm_hz + 10.0 * math.log10(bandwidth_hz))


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    params: NetworkParams
    sweep_parameter: str | None
    sweep_values: tuple[float, ...]  # user units: z in dB, the rest linear
    sim: SimConfig
    csv_path: str | None = None
    svg_path: str | None = None
    preset: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ExperimentSpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "distance_cdf":
            return
        if self.sweep_parameter not in SWEEPABLE:
            raise ExperimentSpecError(
                f"sweep parameter must be one of {SWEEPABLE}, got {self.sweep_parameter!r}"
            )
        if not self.sweep_values:
            raise ExperimentSpecError("sweep values must be a nonempty list")
        if list(self.sweep_values) != sorted(self.sweep_values):
            raise ExperimentSpecError("sweep values must be sorted ascending")


@dataclass(frozen=True)
class RowResult:
    value: float
    cells: dict
    error: str | None
    resamples: int
    wall_time: float  # seconds; reported but never written to CSV

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    kind: str
    parameter: str  # CSV column name of the swept quantity
    columns: tuple[str, ...]
    rows: tuple[RowResult, ...]

    @property
    def ok(self) -> bool:
        return all(row.ok for row in self.rows)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_COMMON = dict(
    lambda_b=2e-5,
    bias_B=1.0,
    P_v=dbm_to_mw(30.0),
    alpha_v=4.0,
    alpha_b=4.0,
    sigma2=noise_power_mw(),
    p_tx=1.0,
    z=db_to_linear(0.0),
)


def _logspace(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.logspace(lo, hi, n))


PRESETS: dict[str, dict] = {
    "fig3": dict(
        kind="distance_cdf",
        params=dict(lambda_R=0.005, mu_v=0.001, **_COMMON),
        sweep=None,
        window=500.0,
    ),
    "fig4": dict(
        kind="success_sweep",
        params=dict(lambda_R=0.001, mu_v=0.1, **_COMMON),
        sweep=("z_dB", tuple(float(z) for z in range(-20, 35, 5))),
        # the +30 dB end of the sweep needs the larger window to keep
        # out-of-window interference under the 0.1% budget
        window=1000.0,
    ),
    "fig5": dict(
        kind="success_sweep",
        params=dict(lambda_R=0.005, mu_v=0.001, **_COMMON),
        sweep=("mu_v", _logspace(-3, 0, 7)),
        window=500.0,
    ),
    "fig6": dict(
        kind="association_sweep",
        params=dict(lambda_R=0.005, mu_v=0.001, **_COMMON),
        sweep=("mu_v", _logspace(-3, 0, 7)),
        window=500.0,
    ),
    "fig7": dict(
        kind="success_sweep",
        params=dict(lambda_R=0.001, mu_v=0.005, **_COMMON),
        sweep=("lambda_R", _logspace(-3, -1, 7)),
        window=500.0,
    ),
    "fig8": dict(
        kind="success_sweep",
        params=dict(lambda_R=0.005, mu_v=0.005, lambda_b=1e-6, **{
            k: v for k, v in _COMMON.items() if k != "lambda_b"
        }),
        sweep=("lambda_b", _logspace(-6, -3, 7)),
        window=500.0,
    ),
    "fig9": dict(
        kind="success_sweep",
        params=dict(lambda_R=0.005, mu_v=0.005, bias_B=0.01, **{
            k: v for k, v in _COMMON.items() if k != "bias_B"
        }),
        sweep=("bias_B", _logspace(-2, 4, 7)),
        window=500.0,
    ),
}


def make_preset_spec(
    name: str,
    trials: int = 100_000,
    seed: int = 42,
    window_radius: float | None = None,
    mode: str = "paper_faithful",
) -> ExperimentSpec:
    """Materialize a preset into a full ExperimentSpec."""
    if name not in PRESETS:
        raise ExperimentSpecError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        )
    entry = PRESETS[name]
    params = NetworkParams(**entry["params"])
    sweep = entry["sweep"]
    return ExperimentSpec(
        kind=entry["kind"],
        params=params,
        sweep_parameter=None if sweep is None else sweep[0],
        sweep_values=() if sweep is None else sweep[1],
        sim=SimConfig(
            params=params,
            window_radius=entry["window"] if window_radius is None else window_radius,
            trials=max(trials, 0),
            seed=RngSeed(seed),
            mode=mode,
        ),
        preset=name,
    )


# ---------------------------------------------------------------------------
# INI loading
# ---------------------------------------------------------------------------

_PARAM_KEYS = {
    "lambda_R": "roads per km",
    "mu_v": "vehicles per km",
    "lambda_b": "base stations per km^2",
    "bias_B": "association bias",
    "P_v_dBm": "vehicle transmit power",
    "noise_dBm": "noise power over the operating bandwidth",
    "alpha_v": "V2V path-loss exponent",
    "alpha_b": "V2B path-loss exponent",
    "p_tx": "transmit probability",
    "z_dB": "SINR threshold",
}
# keys a user is likely to write without the unit suffix
_UNIT_SUFFIXED = {"P_v": "P_v_dBm", "noise": "noise_dBm", "sigma2": "noise_dBm",
                  "z": "z_dB", "window_radius": "window_radius_km"}
_SIM_KEYS = ("trials", "seed", "window_radius_km", "mode", "ci_level")
_EXPERIMENT_KEYS = ("preset", "kind")
_OUTPUT_KEYS = ("csv", "svg")


def _bad_key(section: str, key: str) -> ExperimentSpecError:
    hint = ""
    if key in _UNIT_SUFFIXED:
        hint = f"; did you mean {_UNIT_SUFFIXED[key]!r}?"
    return ExperimentSpecError(f"unknown key {key!r} in [{section}]{hint}")


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ExperimentSpecError(
            f"key {key!r} in [{section}]: cannot parse {raw!r} as a number"
        ) from None


def load_spec(path: str, trials: int | None = None, seed: int | None = None,
              mode: str | None = None, preset: str | None = None) -> ExperimentSpec:
    """Parse and validate an experiment file; optional overrides win.

    Every validation failure names the offending key. A file that names a
    preset inherits its values and may override any of them; a ``preset``
    argument (the CLI flag) plays the same role when the file names none,
    and conflicts with a different name in the file.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keys are case-sensitive (lambda_R vs lambda_b)
    read = cp.read(path)
    if not read:
        raise ExperimentSpecError(f"cannot read experiment file {path!r}")

    for section in cp.sections():
        if section not in ("experiment", "params", "sweep", "sim", "outputs"):
            raise ExperimentSpecError(f"unknown section [{section}]")

    kind = None
    file_preset = None
    if cp.has_section("experiment"):
        for key in cp["experiment"]:
            if key not in _EXPERIMENT_KEYS:
                raise _bad_key("experiment", key)
        file_preset = cp["experiment"].get("preset")
        kind = cp["experiment"].get("kind")
        if file_preset is not None and file_preset not in PRESETS and file_preset != "custom":
            raise ExperimentSpecError(
                f"unknown preset {file_preset!r}; choose from {sorted(PRESETS)} or 'custom'"
            )
        if kind is not None and kind not in KINDS:
            raise ExperimentSpecError(f"kind must be one of {KINDS}, got {kind!r}")
    if preset and file_preset and preset != file_preset:
        raise ExperimentSpecError(
            f"file names preset {file_preset!r} but {preset!r} was requested"
        )
    preset = file_preset or preset

    if preset and preset != "custom":
        base = make_preset_spec(preset)
        pvals = {
            "lambda_R": base.params.lambda_R,
            "mu_v": base.params.mu_v,
            "lambda_b": base.params.lambda_b,
            "bias_B": base.params.bias_B,
            "P_v_dBm": mw_to_dbm(base.params.P_v),
            "noise_dBm": mw_to_dbm(base.params.sigma2),
            "alpha_v": base.params.alpha_v,
            "alpha_b": base.params.alpha_b,
            "p_tx": base.params.p_tx,
            "z_dB": linear_to_db(base.params.z) if base.params.z > 0 else 0.0,
        }
        kind = kind or base.kind
        sweep_parameter = base.sweep_parameter
        sweep_values = base.sweep_values
        sim_vals = dict(trials=base.sim.trials, seed=base.sim.seed.seed,
                        window_radius_km=base.sim.window_radius, mode=base.sim.mode,
                        ci_level=base.sim.ci_level)
    else:
        pvals = {}
        kind = kind or "success_sweep"
        sweep_parameter = None
        sweep_values = ()
        sim_vals = dict(trials=100_000, seed=42, window_radius_km=500.0,
                        mode="paper_faithful", ci_level=0.95)

    if cp.has_section("params"):
        for key, raw in cp["params"].items():
            if key not in _PARAM_KEYS:
                raise _bad_key("params", key)
            pvals[key] = _parse_float("params", key, raw)

    missing = [k for k in ("lambda_R", "mu_v", "lambda_b") if k not in pvals]
    if missing:
        raise ExperimentSpecError(f"missing required [params] keys: {missing}")
    defaults = dict(bias_B=1.0, P_v_dBm=30.0, noise_dBm=mw_to_dbm(noise_power_mw()),
                    alpha_v=4.0, alpha_b=4.0, p_tx=1.0, z_dB=0.0)
    for k, v in defaults.items():
        pvals.setdefault(k, v)

    try:
        params = NetworkParams(
            lambda_R=pvals["lambda_R"],
            mu_v=pvals["mu_v"],
            lambda_b=pvals["lambda_b"],
            bias_B=pvals["bias_B"],
            P_v=dbm_to_mw(pvals["P_v_dBm"]),
            alpha_v=pvals["alpha_v"],
            alpha_b=pvals["alpha_b"],
            sigma2=dbm_to_mw(pvals["noise_dBm"]),
            p_tx=pvals["p_tx"],
            z=db_to_linear(pvals["z_dB"]),
        )
    except ValueError as exc:
        raise ExperimentSpecError(f"invalid [params] value: {exc}") from exc

    if cp.has_section("sweep"):
        for key in cp["sweep"]:
            if key not in ("parameter", "values"):
                raise _bad_key("sweep", key)
        sweep_parameter = cp["sweep"].get("parameter", sweep_parameter)
        if "values" in cp["sweep"]:
            raw = cp["sweep"]["values"].replace(",", " ").split()
            sweep_values = tuple(
                _parse_float("sweep", "values", token) for token in raw
            )

    if cp.has_section("sim"):
        for key, raw in cp["sim"].items():
            if key not in _SIM_KEYS:
                raise _bad_key("sim", key)
            if key == "mode":
                sim_vals["mode"] = raw.strip()
            elif key in ("trials", "seed"):
                sim_vals[key] = int(_parse_float("sim", key, raw))
            else:
                sim_vals[key] = _parse_float("sim", key, raw)

    csv_path = svg_path = None
    if cp.has_section("outputs"):
        for key, raw in cp["outputs"].items():
            if key not in _OUTPUT_KEYS:
                raise _bad_key("outputs", key)
            if key == "csv":
                csv_path = raw.strip()
            else:
                svg_path = raw.strip()

    if trials is not None:
        sim_vals["trials"] = trials
    if seed is not None:
        sim_vals["seed"] = seed
    if mode is not None:
        sim_vals["mode"] = mode

    try:
        sim = SimConfig(
            params=params,
            window_radius=sim_vals["window_radius_km"],
            trials=max(int(sim_vals["trials"]), 0),  # 0 = analytic only
            seed=RngSeed(int(sim_vals["seed"])),
            mode=sim_vals["mode"],
            ci_level=sim_vals["ci_level"],
        )
    except ValueError as exc:
        raise ExperimentSpecError(f"invalid [sim] value: {exc}") from exc

    return ExperimentSpec(
        kind=kind,
        params=params,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        sim=sim,
        csv_path=csv_path,
        svg_path=svg_path,
        preset=preset,
    )


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def _worker_count() -> int:
    raw = os.environ.get("V2X_THREADS", "1")
    try:
        return max(int(raw), 1)
    except ValueError:
        raise ExperimentSpecError(f"V2X_THREADS={raw!r} is not an integer") from None


def _row_params(spec: ExperimentSpec, value: float) -> NetworkParams:
    if spec.sweep_parameter == "z_dB":
        return replace(spec.params, z=db_to_linear(value))
    return replace(spec.params, **{spec.sweep_parameter: value})


def _sized_sim(spec: ExperimentSpec, params: NetworkParams) -> SimConfig:
    """Per-row SimConfig, growing the window until its interference budget passes.

    Sweeps over intensities move the serving-distance scale by orders of
    magnitude, and a single window cannot serve every row; rows with long
    links get doubled windows (up to 8x). A row that cannot pass at 8x is
    returned as-is so the estimator aborts with its usual guidance.
    """
    cfg = replace(spec.sim, params=params)
    for factor in (1, 2, 4, 8):
        candidate = replace(cfg, window_radius=spec.sim.window_radius * factor)
        try:
            check_window(candidate)
            return candidate
        except WindowTooSmallError:
            continue
    return candidate


def _analytic_cells(z: float, params: NetworkParams) -> dict:
    bd = analytic.success_v2x(z, params)
    return {
        "p_v2x_analytic": bd.p_v2x,
        "p_cv2v_analytic": bd.p_v2v_success,
        "p_cv2b_analytic": bd.p_v2b_success,
        "p_v2v_only_analytic": bd.p_v2v_only,
        "assoc_v2v_analytic": bd.p_v2v_assoc,
        "assoc_v2b_analytic": bd.p_v2b_assoc,
    }


def _sweep_row(spec: ExperimentSpec, value: float, mc_cells) -> RowResult:
    start = time.perf_counter()
    cells = {c: None for c in _ANALYTIC_COLUMNS + _MC_COLUMNS}
    error = None
    resamples = 0
    try:
        params = _row_params(spec, value)
        cells.update(_analytic_cells(params.z, params))
        if isinstance(mc_cells, str):  # the MC pass for this row failed
            error = mc_cells
        elif mc_cells is not None:
            cells.update(mc_cells)
            resamples = int(mc_cells.get("resamples_mc") or 0)
    except Exception as exc:  # per-row failures mark the row, sweep continues
        error = f"{type(exc).__name__}: {exc}"
    return RowResult(
        value=value,
        cells=cells,
        error=error,
        resamples=resamples,
        wall_time=time.perf_counter() - start,
    )


def _mc_cells_from_success(est, index: int) -> dict:
    return {
        "p_v2x_mc": est.v2x[index].mean,
        "p_v2x_mc_ci": est.v2x[index].ci_halfwidth,
        "p_cv2v_mc": est.cv2v[index].mean,
        "p_cv2v_mc_ci": est.cv2v[index].ci_halfwidth,
        "p_cv2b_mc": est.cv2b[index].mean,
        "p_cv2b_mc_ci": est.cv2b[index].ci_halfwidth,
        "p_v2v_only_mc": est.v2v_only[index].mean,
        "p_v2v_only_mc_ci": est.v2v_only[index].ci_halfwidth,
        "assoc_v2v_mc": est.assoc_v2v.mean,
        "assoc_v2v_mc_ci": est.assoc_v2v.ci_halfwidth,
        "resamples_mc": est.resamples,
    }


def _run_distance_cdf(spec: ExperimentSpec, run_mc: bool) -> SweepResult:
    params = spec.params
    # radius grid out to the 99.9th percentile of the analytic law
    lo, hi = 0.0, spec.sim.window_radius
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if analytic.v2v_cdf(mid, params) < 0.999:
            lo = mid
        else:
            hi = mid
    grid = np.linspace(0.0, hi, 81)
    mc_values = None
    mc_error = None
    resamples = 0
    if run_mc:
        try:
            cdf = estimate_distance_cdf(spec.sim, grid)
            mc_values = cdf.values
            resamples = cdf.resamples
        except Exception as exc:
            mc_error = f"{type(exc).__name__}: {exc}"
    rows = []
    for i, r in enumerate(grid):
        start = time.perf_counter()
        cells = {
            "cdf_analytic": analytic.v2v_cdf(float(r), params),
            "cdf_mc": None if mc_values is None else mc_values[i],
        }
        rows.append(RowResult(float(r), cells, mc_error, resamples if i == 0 else 0,
                              time.perf_counter() - start))
    return SweepResult("distance_cdf", "r_km", _CDF_COLUMNS, tuple(rows))


def run(spec: ExperimentSpec) -> SweepResult:
    """Execute an experiment: analytic table per row plus MC when enabled.

    Row failures are recorded in the row and do not stop the sweep. Rows
    are dispatched to a thread pool sized by V2X_THREADS (default 1);
    output order always follows the sweep values.
    """
    run_mc = spec.sim.trials > 0
    if spec.kind == "distance_cdf":
        return _run_distance_cdf(spec, run_mc)

    values = spec.sweep_values
    mc_by_row: list = [None] * len(values)
    if run_mc:
        if spec.sweep_parameter == "z_dB":
            # one MC pass serves the whole threshold grid (common random numbers)
            try:
                z_grid = [db_to_linear(v) for v in values]
                est = estimate_success(spec.sim, z_grid)
                mc_by_row = [_mc_cells_from_success(est, i) for i in range(len(values))]
            except Exception as exc:
                mc_by_row = [f"{type(exc).__name__}: {exc}"] * len(values)
        elif spec.kind == "association_sweep":
            def assoc_cells(value):
                try:
                    cfg = replace(spec.sim, params=_row_params(spec, value))
                    est = estimate_association(cfg)
                    return {
                        "assoc_v2v_mc": est.frac_v2v.mean,
                        "assoc_v2v_mc_ci": est.frac_v2v.ci_halfwidth,
                        "resamples_mc": est.resamples,
                    }
                except Exception as exc:
                    return f"{type(exc).__name__}: {exc}"

            with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
                mc_by_row = list(pool.map(assoc_cells, values))
        else:
            def success_cells(value):
                try:
                    params = _row_params(spec, value)
                    cfg = _sized_sim(spec, params)
                    est = estimate_success(cfg, [params.z])
                    return _mc_cells_from_success(est, 0)
                except Exception as exc:
                    return f"{type(exc).__name__}: {exc}"

            with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
                mc_by_row = list(pool.map(success_cells, values))

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        rows = list(
            pool.map(lambda iv: _sweep_row(spec, iv[1], mc_by_row[iv[0]]),
                     enumerate(values))
        )
    columns = _ANALYTIC_COLUMNS + _MC_COLUMNS
    return SweepResult(spec.kind, SWEEP_COLUMN[spec.sweep_parameter], columns, tuple(rows))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17e")


def _needs_quoting(s: str) -> bool:
    return any(ch in s for ch in (",", '"', "\n", "\r"))


def _quote(s: str) -> str:
    if _needs_quoting(s):
        return '"' + s.replace('"', '""') + '"'
    return s


def emit_csv(result: SweepResult, path: str) -> None:
    """Write the result table as RFC-4180 CSV with full-precision numbers.

    Byte-identical for identical runs: cell order is fixed, floats are
    emitted with 17 significant digits (round-trip exact), and volatile
    quantities such as wall time are deliberately excluded.
    """
    header = [result.parameter, *result.columns, "status"]
    lines = [",".join(_quote(h) for h in header)]
    for row in result.rows:
        cells = [_format_cell(row.value)]
        cells += [_format_cell(row.cells.get(c)) for c in result.columns]
        cells.append("ok" if row.ok else _quote(row.error))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\r\n".join(lines) + "\r\n")


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    """Minimal reader for round-trip checks of emitted files."""
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# realization serialization (debugging aid)
# ---------------------------------------------------------------------------
#
# JSON schema (all distances km):
#   {"window_radius": float,
#    "lines": [[theta, y], ...],            # typical line last if present
#    "vehicle_line": [int, ...],            # per vehicle, index into lines
#    "vehicle_t": [float, ...],             # per vehicle, signed offset
#    "tx_flags": [bool, ...],
#    "base_stations": [[x, y], ...],
#    "typical_line_index": int | null}

def dump_realization(realization, path: str) -> None:
    """Serialize a sampled realization to JSON for offline inspection."""
    import json

    from .pointprocess import NetworkRealization  # noqa: F401 (schema anchor)

    payload = {
        "window_radius": realization.window_radius,
        "lines": [[ln.theta, ln.y] for ln in realization.lines],
        "vehicle_line": realization.vehicle_line.tolist(),
        "vehicle_t": realization.vehicle_t.tolist(),
        "tx_flags": realization.tx_flags.tolist(),
        "base_stations": realization.base_stations.tolist(),
        "typical_line_index": realization.typical_line_index,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_realization(path: str):
    """Inverse of :func:`dump_realization`."""
    import json

    from .pointprocess import Line, NetworkRealization

    with open(path) as fh:
        payload = json.load(fh)
    return NetworkRealization(
        window_radius=payload["window_radius"],
        lines=tuple(Line(t, y) for t, y in payload["lines"]),
        vehicle_line=np.asarray(payload["vehicle_line"], dtype=np.int64),
        vehicle_t=np.asarray(payload["vehicle_t"], dtype=float),
        tx_flags=np.asarray(payload["tx_flags"], dtype=bool),
        base_stations=np.asarray(payload["base_stations"], dtype=float).reshape(-1, 2),
        typical_line_index=payload["typical_line_index"],
    )


# ---------------------------------------------------------------------------
# SVG emission
# ---------------------------------------------------------------------------

_SERIES = {
    "success_sweep": (
        ("p_v2x_analytic", "p_v2x_mc", "p_v2x_mc_ci", "V2X", "#1f77b4"),
        ("p_cv2v_analytic", "p_cv2v_mc", "p_cv2v_mc_ci", "C-V2V", "#d62728"),
        ("p_cv2b_analytic", "p_cv2b_mc", "p_cv2b_mc_ci", "C-V2B", "#2ca02c"),
        ("p_v2v_only_analytic", "p_v2v_only_mc", "p_v2v_only_mc_ci", "V2V only", "#9467bd"),
    ),
    "association_sweep": (
        ("assoc_v2v_analytic", "assoc_v2v_mc", "assoc_v2v_mc_ci", "V2V assoc.", "#1f77b4"),
        ("assoc_v2b_analytic", None, None, "V2B assoc.", "#d62728"),
    ),
    "distance_cdf": (
        ("cdf_analytic", "cdf_mc", None, "shortest V2V distance CDF", "#1f77b4"),
    ),
}

_Y_LABEL = {
    "success_sweep": "Success probability",
    "association_sweep": "Association probability",
    "distance_cdf": "CDF",
}

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 20, 55


def _axis_transform(values, log: bool):
    vals = [v for v in values if v is not None]
    if log:
        vals = [math.log10(v) for v in vals]
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.03 * (hi - lo)
    lo -= pad
    hi += pad

    def to_px(v):
        t = math.log10(v) if log else v
        return _ML + (t - lo) / (hi - lo) * (_W - _ML - _MR)

    return to_px, lo, hi


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_plot(result: SweepResult, path: str) -> None:
    """Render a static SVG: analytic curves as lines, MC as markers + CI bars."""
    rows = [r for r in result.rows if r.ok]
    if not rows:
        raise ValueError("cannot plot a result with no successful rows")
    xs = [r.value for r in rows]
    log_x = result.parameter not in ("z_dB", "r_km") and min(xs) > 0
    to_px, t_lo, t_hi = _axis_transform(xs, log_x)

    def y_px(p):
        return _MT + (1.02 - p) / 1.02 * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W-_ML-_MR}" height="{_H-_MT-_MB}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]

    # axis ticks
    if log_x:
        lo_dec = math.ceil(t_lo)
        hi_dec = math.floor(t_hi)
        ticks = [10.0**d for d in range(lo_dec, hi_dec + 1)]
    else:
        ticks = [t_lo + (t_hi - t_lo) * i / 5 for i in range(6)]
    for t in ticks:
        px = to_px(t)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{_H-_MB}" x2="{_fmt(px)}" y2="{_H-_MB+5}" '
            'stroke="#444444"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{_H-_MB+18}" font-size="11" text-anchor="middle" '
            f'fill="#222222">{_fmt(t)}</text>'
        )
    for frac in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        py = y_px(frac)
        parts.append(
            f'<line x1="{_ML-5}" y1="{_fmt(py)}" x2="{_ML}" y2="{_fmt(py)}" stroke="#444444"/>'
        )
        parts.append(
            f'<text x="{_ML-8}" y="{_fmt(py+4)}" font-size="11" text-anchor="end" '
            f'fill="#222222">{frac:g}</text>'
        )
    parts.append(
        f'<text x="{(_ML+_W-_MR)/2}" y="{_H-12}" font-size="13" text-anchor="middle" '
        f'fill="#222222">{result.parameter}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT+_H-_MB)/2}" font-size="13" text-anchor="middle" '
        f'fill="#222222" transform="rotate(-90 16 {(_MT+_H-_MB)/2})">'
        f"{_Y_LABEL[result.kind]}</text>"
    )

    legend_y = _MT + 14
    for ana_col, mc_col, ci_col, label, color in _SERIES[result.kind]:
        pts = [
            (to_px(r.value), y_px(r.cells[ana_col]))
            for r in rows
            if r.cells.get(ana_col) is not None
        ]
        if pts:
            d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
            parts.append(
                f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        if mc_col is not None:
            for r in rows:
                m = r.cells.get(mc_col)
                if m is None:
                    continue
                px, py = to_px(r.value), y_px(m)
                ci = r.cells.get(ci_col) if ci_col else None
                if ci:
                    parts.append(
                        f'<line x1="{_fmt(px)}" y1="{_fmt(y_px(min(m+ci,1.02)))}" '
                        f'x2="{_fmt(px)}" y2="{_fmt(y_px(max(m-ci,0.0)))}" '
                        f'stroke="{color}" stroke-width="1"/>'
                    )
                parts.append(
                    f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="none" '
                    f'stroke="{color}" stroke-width="1.2"/>'
                )
        parts.append(
            f'<line x1="{_W-_MR-150}" y1="{legend_y-4}" x2="{_W-_MR-125}" y2="{legend_y-4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W-_MR-118}" y="{legend_y}" font-size="11" fill="#222222">'
            f"{label}</text>"
        )
        legend_y += 16

    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
