"""Experiment pipelines, configuration, and artifact emission.

A single flat config drives everything. Randomness comes from numpy's
seedable PCG64 generator; the data image and the initial noise draw from
separate deterministic streams derived from the one seed, so identical
configs always produce byte-identical artifacts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .dynamics import ForwardParams, ReverseParams, forward_block_blur, run_reverse_pair
from .errors import ConfigError
from .grid import BlockPartition, MassVector, PmfGrid, block_masses, make_partition, normalize
from .potentials import ToleranceBand, e_block, e_pix, potential_v, potential_v_delta

RESTORE_COLUMNS = (
    "n",
    "V_base",
    "V_proj",
    "Vdelta_base",
    "Vdelta_proj",
    "Eblock_base",
    "Eblock_proj",
    "Epix_base",
    "Epix_proj",
)
FORWARD_COLUMNS = ("n", "V", "Eblock")

IMAGE_MODES = ("checkerboard", "constant-random")

# SeedSequence stream keys appended to the config seed.
_STREAM_DATA = 0
_STREAM_NOISE = 1

_INT_FIELDS = ("L_x", "L_y", "B_x", "B_y", "seed", "T", "forward_steps")
_FLOAT_FIELDS = ("c_high", "c_low", "delta", "beta", "sigma_smooth", "sigma_fwd")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment configuration; defaults reproduce the stock restore run."""

    L_x: int = 128
    L_y: int = 128
    B_x: int = 4
    B_y: int = 4
    image_mode: str = "checkerboard"
    c_high: float = 0.9
    c_low: float = 0.1
    seed: int = 0
    delta: float = 0.01
    beta: float = 0.05
    sigma_smooth: float = 0.5
    T: int = 40
    sigma_fwd: float = 1.0
    forward_steps: int = 30
    start: str = "noise"
    snapshot_steps: tuple[int, ...] = (0, 10, 20, 40)
    output_dir: str = "out"

    def __post_init__(self):
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in _FLOAT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if min(self.L_x, self.L_y, self.B_x, self.B_y) <= 0:
            raise ConfigError("grid and block counts must be positive")
        if self.image_mode not in IMAGE_MODES:
            raise ConfigError(f"image_mode must be one of {IMAGE_MODES}, got {self.image_mode!r}")
        if self.c_high < 0.0 or self.c_low < 0.0 or self.c_high + self.c_low <= 0.0:
            raise ConfigError("checkerboard intensities must be nonnegative, not both zero")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed!r}")
        if self.delta < 0.0:
            raise ConfigError(f"delta must be >= 0, got {self.delta!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta!r}")
        if self.sigma_smooth < 0.0:
            raise ConfigError(f"sigma_smooth must be >= 0, got {self.sigma_smooth!r}")
        if self.T < 0:
            raise ConfigError(f"T must be >= 0, got {self.T!r}")
        if self.sigma_fwd <= 0.0:
            raise ConfigError(f"sigma_fwd must be > 0, got {self.sigma_fwd!r}")
        if self.forward_steps < 0:
            raise ConfigError(f"forward_steps must be >= 0, got {self.forward_steps!r}")
        if self.start not in ("noise", "blurred", "data"):
            raise ConfigError(f"start must be noise|blurred|data, got {self.start!r}")
        if isinstance(self.snapshot_steps, (str, bytes)) or not np.iterable(self.snapshot_steps):
            raise ConfigError(f"snapshot_steps must be a list of integers: {self.snapshot_steps!r}")
        steps = []
        for s in self.snapshot_steps:
            if isinstance(s, bool) or not isinstance(s, (int, np.integer)):
                raise ConfigError(f"snapshot_steps entries must be integers, got {s!r}")
            steps.append(int(s))
        object.__setattr__(self, "snapshot_steps", tuple(steps))
        # Out-of-range snapshot steps are rejected outright, never clamped.
        bad = [s for s in steps if not 0 <= s <= self.T]
        if bad:
            raise ConfigError(f"snapshot_steps {bad} outside [0, {self.T}]")
        if not isinstance(self.output_dir, (str, Path)):
            raise ConfigError(f"output_dir must be a path, got {self.output_dir!r}")
        object.__setattr__(self, "output_dir", str(self.output_dir))


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Build a config from an optional flat JSON file plus keyword overrides.

    Overrides with value None are ignored, so CLI flags can be passed
    through unconditionally. Unknown keys in the file are an error.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    data: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a flat JSON object")
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
        data.update(raw)
    for key, value in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config override: {key}")
        if value is not None:
            data[key] = value
    return ExperimentConfig(**data)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Stored baseline/projected states plus the per-step metric table."""

    states_base: tuple[PmfGrid, ...]
    states_proj: tuple[PmfGrid, ...]
    series: dict[str, np.ndarray]

    def __post_init__(self):
        lengths = {len(self.states_base), len(self.states_proj)}
        lengths.update(len(col) for col in self.series.values())
        if len(lengths) != 1:
            raise ValueError(f"trajectory lists and series columns disagree in length: {lengths}")


def _rng(config: ExperimentConfig, stream: int) -> np.random.Generator:
    """PCG64 generator on a (seed, stream) SeedSequence key."""
    return np.random.default_rng([config.seed, stream])


def make_data_image(config: ExperimentConfig) -> tuple[PmfGrid, BlockPartition, MassVector]:
    """Block-constant data image, its partition, and the reference masses.

    Checkerboard mode paints blocks with even b_x + b_y at c_high and the
    rest at c_low; constant-random mode draws each block's intensity from
    Unif[0, 1) on the data stream of the seeded generator.
    """
    part = make_partition(config.L_x, config.L_y, config.B_x, config.B_y)
    rng = _rng(config, _STREAM_DATA)
    img = np.zeros((config.L_x, config.L_y))
    for j, (xs, ys) in enumerate(part.blocks):
        bx, by = part.block_coords(j)
        if config.image_mode == "checkerboard":
            img[xs, ys] = config.c_high if (bx + by) % 2 == 0 else config.c_low
        else:
            img[xs, ys] = rng.uniform(0.0, 1.0)
    q_data = normalize(img)
    w_ref = block_masses(q_data, part)
    return q_data, part, w_ref


def make_initial_noise(config: ExperimentConfig) -> PmfGrid:
    """I.i.d. Unif[0, 1) pixels from the noise stream, normalized."""
    rng = _rng(config, _STREAM_NOISE)
    return normalize(rng.random((config.L_x, config.L_y)))


def _restore_start(config: ExperimentConfig, q_data: PmfGrid, part: BlockPartition) -> PmfGrid:
    if config.start == "noise":
        return make_initial_noise(config)
    if config.start == "blurred":
        p = q_data
        for _ in range(config.forward_steps):
            p = forward_block_blur(p, part, config.sigma_fwd)
        return p
    raise ConfigError(f"restore start must be noise|blurred, got {config.start!r}")


def run_restore_experiment(config: ExperimentConfig) -> TrajectoryRecord:
    """Baseline vs projected reverse diffusion with full per-step metrics.

    Builds the data image and its tolerance band, runs both reverse
    trajectories from the configured start state, and evaluates V, the
    leak-tolerant potential, the block-mass error, and the pixel MSE at
    every step for both runs.
    """
    q_data, part, w_ref = make_data_image(config)
    band = ToleranceBand.from_reference(w_ref, config.delta)
    p_start = _restore_start(config, q_data, part)
    params = ReverseParams(beta=config.beta, sigma_smooth=config.sigma_smooth, steps=config.T)
    base, proj = run_reverse_pair(p_start, q_data, part, band, params)

    count = len(base)
    series = {name: np.zeros(count) for name in RESTORE_COLUMNS}
    series["n"] = np.arange(count)
    for i, (pb, pp) in enumerate(zip(base, proj)):
        series["V_base"][i] = potential_v(pb, part)
        series["V_proj"][i] = potential_v(pp, part)
        series["Vdelta_base"][i] = potential_v_delta(pb, part, band)
        series["Vdelta_proj"][i] = potential_v_delta(pp, part, band)
        series["Eblock_base"][i] = e_block(pb, part, w_ref)
        series["Eblock_proj"][i] = e_block(pp, part, w_ref)
        series["Epix_base"][i] = e_pix(pb, q_data)
        series["Epix_proj"][i] = e_pix(pp, q_data)
    return TrajectoryRecord(states_base=tuple(base), states_proj=tuple(proj), series=series)


def run_forward_experiment(config: ExperimentConfig) -> dict[str, np.ndarray]:
    """Forward blockwise-blur trajectory with V and E_block per step.

    The start state is q_data itself (start="data" or "blurred") or seeded
    noise (start="noise"). E_block is measured against the block masses of
    the start state, which the dynamics preserve; for a data start that is
    exactly w(q_data).
    """
    q_data, part, _ = make_data_image(config)
    if config.start == "noise":
        p = make_initial_noise(config)
    else:
        p = q_data
    params = ForwardParams(sigma_fwd=config.sigma_fwd, steps=config.forward_steps)
    w_start = block_masses(p, part)

    count = params.steps + 1
    series = {name: np.zeros(count) for name in FORWARD_COLUMNS}
    series["n"] = np.arange(count)
    for i in range(count):
        if i > 0:
            p = forward_block_blur(p, part, params.sigma_fwd)
        series["V"][i] = potential_v(p, part)
        series["Eblock"][i] = e_block(p, part, w_start)
    return series


def _format_cell(column: str, value) -> str:
    if column == "n":
        return str(int(value))
    return repr(float(value))


def write_series_csv(series: dict[str, np.ndarray], columns: tuple[str, ...], path) -> Path:
    """Write a metric table; floats keep full round-trip decimal precision."""
    rows = [",".join(columns)]
    count = len(series[columns[0]])
    for i in range(count):
        rows.append(",".join(_format_cell(c, series[c][i]) for c in columns))
    path = Path(path)
    path.write_text("\n".join(rows) + "\n")
    return path


def emit_csv(record: TrajectoryRecord, path) -> Path:
    """Write the restore metric table (one row per step, fixed header)."""
    return write_series_csv(record.series, RESTORE_COLUMNS, path)


def read_series_csv(path) -> dict[str, np.ndarray]:
    """Parse a metric CSV back into column arrays (exact float round trip)."""
    lines = Path(path).read_text().splitlines()
    columns = lines[0].split(",")
    series: dict[str, np.ndarray] = {}
    rows = [line.split(",") for line in lines[1:]]
    for k, name in enumerate(columns):
        series[name] = np.array([float(row[k]) for row in rows])
    return series


def emit_snapshot(p: PmfGrid, path) -> Path:
    """Write an 8-bit binary graymap (P5); the peak-mass pixel maps to 255.

    Raster rows follow the first grid axis, so the header reads
    "width height" = "L_y L_x". Byte output is deterministic per grid.
    """
    v = p.values
    scaled = np.clip(np.rint(255.0 * (v / v.max())), 0.0, 255.0).astype(np.uint8)
    header = f"P5\n{v.shape[1]} {v.shape[0]}\n255\n".encode("ascii")
    path = Path(path)
    path.write_bytes(header + scaled.tobytes())
    return path


def _parse_pgm(data: bytes, path) -> np.ndarray:
    tokens: list[bytes] = []
    i = 2  # past the magic
    while len(tokens) < 3 and i < len(data):
        ch = data[i : i + 1]
        if ch == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 3:
        raise ConfigError(f"{path}: truncated graymap header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ConfigError(f"{path}: malformed graymap header")
    if maxval <= 0 or maxval > 255:
        raise ConfigError(f"{path}: only 8-bit graymaps are supported (maxval={maxval})")
    raster = data[i + 1 : i + 1 + width * height]
    if len(raster) != width * height:
        raise ConfigError(f"{path}: graymap raster truncated")
    img = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return img.astype(np.float64) / maxval


def read_grid(path) -> PmfGrid:
    """Load a grid file (binary P5 graymap or plain CSV matrix) and normalize it.

    Graymap pixel values are rescaled to [0, 1] before normalization; CSV
    matrices are taken as raw nonnegative intensities.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        values = _parse_pgm(data, path)
    else:
        try:
            text = data.decode("utf-8")
            values = np.array(
                [[float(cell) for cell in line.split(",")] for line in text.splitlines() if line.strip()]
            )
        except (UnicodeDecodeError, ValueError) as exc:
            raise ConfigError(f"{path}: not a P5 graymap or CSV matrix: {exc}") from exc
        if values.ndim != 2:
            raise ConfigError(f"{path}: CSV rows have uneven lengths")
    try:
        return normalize(values)
    except Exception as exc:
        raise ConfigError(f"{path}: grid could not be normalized: {exc}") from exc


def write_grid_csv(p: PmfGrid, path) -> Path:
    """Write a grid as a CSV matrix with full round-trip precision."""
    lines = [",".join(repr(float(x)) for x in row) for row in p.values]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path
