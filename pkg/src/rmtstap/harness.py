"""Scenario-driven Monte Carlo runner and CSV output.

A scenario fixes the radar, the target Doppler, the algorithms to compare and
one sweep axis. Every trial draws fresh training data from a generator seeded
with ``base_seed ^ trial``, so results do not depend on execution order or
on the number of worker threads.
"""
from __future__ import annotations

import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .reduced import efa_transform, reduce, reduce_cncm, rd_stap
from .rmt import NotApplicable, rmt_fd_stap, rmt_rd_stap
from .sampling import draw_snapshots, sample_cncm
from .scene import ClutterScene, RadarConfig, build_scene, steering
from .stap import Method, fd_stap, optimal_weights, power_report

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SWEEP_AXES = ("samples", "doppler", "velocity", "dof_error")
CSV_HEADER = "sweep,algorithm,mean_scnr_loss_db,mean_power_db,std_db,n_valid,n_clamped"
DEFAULT_SEED = 20240611

DOPPLER_GRID = tuple(round(-0.5 + 0.025 * i, 3) for i in range(41))
SAMPLE_GRID = (10, 12, 15, 18, 20, 25, 30, 36, 48, 64, 80, 100, 128)
VELOCITY_GRID = tuple(float(v) for v in range(30, 301, 30))
DOF_ERROR_GRID = (-3, -2, -1, 0, 1, 2, 3)


class ConfigError(ValueError):
    """Invalid scenario definition."""


@dataclass(frozen=True)
class Scenario:
    name: str
    radar: RadarConfig
    sweep_axis: str
    sweep_values: tuple
    target_doppler: float = 0.3
    algorithms: tuple[Method, ...] = tuple(Method)
    n_samples: int | None = None
    n_trials: int = 1000
    base_seed: int = DEFAULT_SEED
    clutter_dof: int | None = None
    local_clutter_dof: int | None = None
    efa_channels: int = 3

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(Method(a) for a in self.algorithms))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        self.validate()

    def validate(self) -> None:
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}; expected one of {SWEEP_AXES}")
        if not self.sweep_values:
            raise ConfigError("sweep_values is empty")
        if len(set(self.sweep_values)) != len(self.sweep_values):
            raise ConfigError("sweep_values contains duplicates")
        if not self.algorithms:
            raise ConfigError("no algorithms selected")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.base_seed < 0 or self.base_seed >= 2 ** 64:
            raise ConfigError("base_seed must fit in 64 unsigned bits")
        K = self.radar.n_pulses
        if self.efa_channels < 1 or self.efa_channels % 2 == 0 or self.efa_channels >= K:
            raise ConfigError(f"efa_channels must be odd and smaller than K={K}")
        for v in self.sweep_values:
            if not math.isfinite(v):
                raise ConfigError(f"non-finite sweep value {v}")
        if self.sweep_axis == "samples":
            if any(int(v) != v or v < 1 for v in self.sweep_values):
                raise ConfigError("sample counts must be positive integers")
        elif self.n_samples is None or self.n_samples < 1:
            raise ConfigError(f"a {self.sweep_axis} sweep needs n_samples >= 1")
        if self.sweep_axis == "velocity" and any(v < 0 for v in self.sweep_values):
            raise ConfigError("velocities must be non-negative")
        if self.sweep_axis == "dof_error" and any(int(v) != v for v in self.sweep_values):
            raise ConfigError("DOF errors must be integers")
        for name in ("clutter_dof", "local_clutter_dof"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    algorithm: Method
    mean_scnr_loss_db: float | None
    mean_output_power_db: float | None
    std_db: float | None
    n_valid_trials: int
    n_clamped: int


@dataclass
class _Point:
    """Everything a trial needs for one sweep value."""

    value: float
    scene: ClutterScene
    target: object
    transform: object
    reduced: object
    n_samples: int
    Q: int
    Q_rd: int
    optimal: tuple


def _point_setup(s: Scenario, value, scenes: dict) -> _Point:
    radar, f_t, L, dq = s.radar, s.target_doppler, s.n_samples, 0
    if s.sweep_axis == "samples":
        L = int(value)
    elif s.sweep_axis == "doppler":
        f_t = float(value)
    elif s.sweep_axis == "velocity":
        radar = replace(radar, velocity_mps=float(value))
    else:
        dq = int(value)
    if radar not in scenes:
        scenes[radar] = build_scene(radar)
    scene = scenes[radar]
    N, K = radar.n_elements, radar.n_pulses
    target = steering(f_t, 0.0, N, K)
    T = efa_transform(radar, f_t, s.efa_channels)
    red = reduce(scene, T, target, s.local_clutter_dof)
    Q = (scene.clutter_rank if s.clutter_dof is None else s.clutter_dof) + dq
    Q_rd = red.local_rank + dq
    if Q < 0 or Q_rd < 0 or Q > scene.dim or Q_rd > T.M:
        raise ConfigError(f"clutter DOF out of range at sweep value {value}: Q={Q}, Q_rd={Q_rd}")
    optimal = _metrics(optimal_weights(scene.R, target), scene)
    return _Point(float(value), scene, target, T, red, L, Q, Q_rd, optimal)


def _metrics(weights, scene: ClutterScene, clamped: bool = False):
    report = power_report(weights, scene.R, scene.noise_power, scene.dim)
    return report.scnr_loss, report.output_power, clamped


def _run_trial(points: list[_Point], methods: tuple[Method, ...], seed: int):
    """Metrics for every (point, method) of one trial; ``None`` marks
    an algorithm that is not applicable."""
    needs_rd = any(m in (Method.RD, Method.RMT_RD) for m in methods)
    cache = {}
    out = []
    for pt in points:
        key = (id(pt.scene), pt.n_samples)
        if key not in cache:
            cache[key] = sample_cncm(draw_snapshots(pt.scene, pt.n_samples, seed))
        sample = cache[key]
        sigma2 = pt.scene.noise_power
        T, a = pt.transform, pt.target
        sample_rd = reduce_cncm(sample, T) if needs_rd else None
        row = {}
        for m in methods:
            if m is Method.OPTIMAL:
                row[m] = pt.optimal
            elif m is Method.FD:
                row[m] = _metrics(fd_stap(sample, a), pt.scene)
            elif m is Method.RD:
                w = rd_stap(sample_rd, pt.reduced.a_rd).to_full(T.T, a)
                row[m] = _metrics(w, pt.scene)
            elif m is Method.RMT_FD:
                try:
                    w, inv = rmt_fd_stap(sample, pt.Q, a, sigma2)
                except NotApplicable:
                    row[m] = None
                else:
                    row[m] = _metrics(w, pt.scene, inv.correction.clamped)
            elif m is Method.RMT_RD:
                try:
                    w, inv = rmt_rd_stap(sample_rd, pt.Q_rd, pt.reduced.a_rd, sigma2)
                except NotApplicable:
                    row[m] = None
                else:
                    row[m] = _metrics(w.to_full(T.T, a), pt.scene, inv.correction.clamped)
        out.append(row)
    return out


def _db(x: float) -> float:
    return 10.0 * math.log10(x)


def _aggregate(value, method, samples) -> ResultRow:
    valid = [s for s in samples if s is not None]
    if not valid:
        return ResultRow(value, method, None, None, None, 0, 0)
    loss = np.array([v[0] for v in valid])
    power = np.array([v[1] for v in valid])
    loss_db = 10.0 * np.log10(loss)
    std = float(np.std(loss_db, ddof=1)) if len(valid) > 1 else 0.0
    return ResultRow(
        value, method,
        _db(float(np.mean(loss))), _db(float(np.mean(power))), std,
        len(valid), sum(1 for v in valid if v[2]),
    )


def run_scenario(s: Scenario, threads: int = 1) -> list[ResultRow]:
    """Monte Carlo averages for every sweep value and algorithm.

    Losses and powers are averaged in linear units, then converted to dB.
    Rows come out sorted by sweep value, then algorithm.
    """
    s.validate()
    scenes: dict = {}
    values = sorted(s.sweep_values)
    points = [_point_setup(s, v, scenes) for v in values]
    methods = tuple(sorted(set(s.algorithms), key=lambda m: m.order))
    seeds = [s.base_seed ^ t for t in range(s.n_trials)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trials = list(pool.map(lambda sd: _run_trial(points, methods, sd), seeds))
    else:
        trials = [_run_trial(points, methods, sd) for sd in seeds]

    rows = []
    for i, pt in enumerate(points):
        for m in methods:
            rows.append(_aggregate(pt.value, m, [tr[i][m] for tr in trials]))
    return rows


def _fmt_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def format_csv(rows: list[ResultRow]) -> str:
    rows = sorted(rows, key=lambda r: (r.sweep_value, r.algorithm.order))
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(",".join([
            _fmt_value(r.sweep_value), r.algorithm.value,
            _fmt(r.mean_scnr_loss_db), _fmt(r.mean_output_power_db), _fmt(r.std_db),
            str(r.n_valid_trials), str(r.n_clamped),
        ]) + "\n")
    return buf.getvalue()


def emit_csv(rows: list[ResultRow], path) -> Path:
    if not rows:
        raise ValueError("no result rows to write")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(rows))
    return path


# -- scenario files ---------------------------------------------------------

_RADAR_KEYS = tuple(f.name for f in fields(RadarConfig))
_SCENARIO_KEYS = ("name", "sweep_axis", "sweep_values", "target_doppler", "algorithms",
                  "n_samples", "n_trials", "base_seed", "clutter_dof",
                  "local_clutter_dof", "efa_channels")


def scenario_from_dict(d: dict) -> Scenario:
    unknown = set(d) - set(_RADAR_KEYS) - set(_SCENARIO_KEYS)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("name", "sweep_axis", "sweep_values"):
        if key not in d:
            raise ConfigError(f"missing required key {key!r}")
    try:
        radar = RadarConfig(**{k: d[k] for k in _RADAR_KEYS if k in d})
        kwargs = {k: d[k] for k in _SCENARIO_KEYS if k in d}
        if "algorithms" in kwargs:
            kwargs["algorithms"] = tuple(Method(a) for a in kwargs["algorithms"])
        return Scenario(radar=radar, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return scenario_from_dict(data)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("-inf" if v < 0 else "inf")
    return str(v)


def dump_scenario(s: Scenario) -> str:
    lines = []
    for key in _SCENARIO_KEYS:
        v = getattr(s, key)
        if v is None:
            continue
        if key == "algorithms":
            v = [m.value for m in v]
        lines.append(f"{key} = {_toml_value(v)}")
    for key in _RADAR_KEYS:
        lines.append(f"{key} = {_toml_value(getattr(s.radar, key))}")
    return "\n".join(lines) + "\n"


# -- bundled scenarios reproducing the published experiments ----------------

def bundled_scenarios(n_trials: int = 1000, base_seed: int = DEFAULT_SEED) -> dict[str, Scenario]:
    v150 = RadarConfig(velocity_mps=150.0)
    v300 = RadarConfig(velocity_mps=300.0)
    common = dict(n_trials=n_trials, base_seed=base_seed, target_doppler=0.3)
    out = {}
    for name, radar, q_rd in (("fig1_v150", v150, 10), ("fig1_v300", v300, 12)):
        out[name] = Scenario(
            name=name, radar=radar, sweep_axis="samples", sweep_values=SAMPLE_GRID,
            algorithms=(Method.OPTIMAL, Method.RD, Method.RMT_RD),
            local_clutter_dof=q_rd, **common)
    for L in (10, 15, 48, 128):
        name = f"fig2_L{L}"
        out[name] = Scenario(
            name=name, radar=v150, sweep_axis="doppler", sweep_values=DOPPLER_GRID,
            algorithms=(Method.FD, Method.RD, Method.RMT_FD, Method.RMT_RD),
            n_samples=L, **common)
    out["fig3"] = Scenario(
        name="fig3", radar=v150, sweep_axis="samples", sweep_values=SAMPLE_GRID,
        local_clutter_dof=10, **common)
    for L in (12, 22):
        name = f"fig4_L{L}"
        out[name] = Scenario(
            name=name, radar=v150, sweep_axis="velocity", sweep_values=VELOCITY_GRID,
            n_samples=L, **common)
    for L in (13, 18):
        name = f"fig5_L{L}"
        out[name] = Scenario(
            name=name, radar=v150, sweep_axis="dof_error", sweep_values=DOF_ERROR_GRID,
            n_samples=L, local_clutter_dof=10, **common)
    return out
