"""Run orchestration: configuration, observation callbacks, persistence.

A single run maps the reservoir onto a chain, evolves |+x> x vacuum, records
scalar diagnostics on a fixed cadence, reconstructs conditional and
unconditional phase-space distributions of the leading collective mode on a
coarser cadence, and serialises everything as CSV tables plus JSON metadata.
Sweeps are Cartesian products of (alpha, s, theta) executed independently.

All outputs are deterministic: there is no random number generator anywhere
in the pipeline, and record times come from step indices.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .conditional import mode_occupation, postselect_plus_x
from .errors import ChainTomoError, ConfigError, DegenerateOrbitalError, ResourceLimitError
from .evolution import ChainModel, EvolutionConfig, evolve
from .mps import Mps, TruncationPolicy, one_body_matrix, product_state, save_mps, truncate
from .observables import (
    chain_occupations,
    hopping_guide_velocity,
    initial_orbital,
    leading_natural_orbital,
    occupation_front,
    qubit_metrics,
)
from .operators import PLUS_X, vacuum
from .spectral import (
    ChainCoefficients,
    SpectralDensity,
    ThermalizedDensity,
    chain_coefficients,
)
from .wigner import (
    WignerFunction,
    characteristic_function,
    default_grids,
    negativity_volume,
    wigner_from_characteristic,
)

SCHEMA_VERSION = 1

TIMESERIES_COLUMNS = [
    "time",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "coherence",
    "purity",
    "entropy",
    "p_plus",
    "total_occupation",
    "front_site",
    "orbital_occupation",
    "leading_fraction",
    "ipr_width",
    "mode_occ_uncond",
    "mode_occ_cond",
    "vnc_uncond",
    "vnc_cond",
    "max_discarded",
]

_DEFAULT_SNAPSHOTS = (0.0, 0.5, 1.0, 2.5, 5.0)


def auto_fock_dims(theta: float, length: int) -> tuple[int, ...]:
    """Per-site Fock dimensions: flat 8 cold, front-loaded 16/10 warm.

    Warm chains concentrate occupation near the qubit, so the first ten
    sites get the larger cutoff.
    """
    if theta == 0.0:
        return (8,) * length
    return tuple([16] * min(10, length) + [10] * max(0, length - 10))


@dataclass(frozen=True)
class RunConfig:
    """Complete, JSON-serialisable description of one simulation."""

    alpha: float
    s: float
    theta: float = 0.0  # temperature in units of the qubit splitting
    delta: float = 1.0
    omega_c: float = 4.0
    length: int = 120
    dt: float = 0.01
    t_max: float = 5.0
    max_bond: int = 100
    sv_cutoff: float = 1e-8
    fock_dims: Union[str, tuple[int, ...]] = "auto"
    observe_stride: int = 10
    vnc_interval: float = 0.1
    snapshot_times: tuple[float, ...] = _DEFAULT_SNAPSHOTS
    wigner_max_bond: int = 0  # 0 = reconstruct from the untruncated state
    grid_half_extent: float = 6.0
    lambda_points: int = 64
    out_points: int = 101
    krylov_dim: int = 30
    krylov_tol: float = 1e-12
    memory_limit_mb: float = 4096.0
    save_checkpoints: bool = False

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.s <= 0:
            raise ConfigError(f"s must be > 0, got {self.s}")
        if self.theta < 0:
            raise ConfigError(f"theta must be >= 0, got {self.theta}")
        if self.length < 1:
            raise ConfigError(f"length must be >= 1, got {self.length}")
        if self.memory_limit_mb <= 0:
            raise ConfigError("memory_limit_mb must be > 0")
        if self.wigner_max_bond < 0:
            raise ConfigError("wigner_max_bond must be >= 0")
        if isinstance(self.fock_dims, str):
            if self.fock_dims != "auto":
                raise ConfigError(f"fock_dims must be 'auto' or a list, got {self.fock_dims!r}")
        else:
            object.__setattr__(self, "fock_dims", tuple(int(d) for d in self.fock_dims))
            if len(self.fock_dims) != self.length:
                raise ConfigError(
                    f"fock_dims has {len(self.fock_dims)} entries for length {self.length}"
                )
            if any(d < 2 for d in self.fock_dims):
                raise ConfigError("every Fock dimension must be >= 2")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

    def resolved_fock_dims(self) -> tuple[int, ...]:
        if isinstance(self.fock_dims, str):
            return auto_fock_dims(self.theta, self.length)
        return self.fock_dims

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if not isinstance(d["fock_dims"], str):
            d["fock_dims"] = list(d["fock_dims"])
        d["snapshot_times"] = list(d["snapshot_times"])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def desk_config(alpha: float = 0.2, s: float = 1.0, theta: float = 0.0, **overrides) -> RunConfig:
    """CI-runnable preset: short chain, flat d=8, compressed tomography."""
    base = dict(
        alpha=alpha,
        s=s,
        theta=theta,
        length=24,
        max_bond=48,
        fock_dims=(8,) * 24,
        vnc_interval=0.25,
        wigner_max_bond=32,
    )
    base.update(overrides)
    return RunConfig(**base)


def paper_config(alpha: float, s: float, theta: float = 0.0, **overrides) -> RunConfig:
    """Full-scale preset (long-running): L=120, bond 100, auto Fock dims.

    The local-exponential Krylov depth scales with the largest on-site
    frequency, which grows linearly along the chain; at L=120 the far
    blocks need of order 100 vectors per step, so the preset raises the
    default accordingly.
    """
    base = dict(alpha=alpha, s=s, theta=theta, krylov_dim=100)
    base.update(overrides)
    return RunConfig(**base)


def estimate_memory_mb(config: RunConfig) -> float:
    """Pre-flight memory model: state copies + Krylov basis + environments.

    Counts complex doubles for two state copies, the Krylov basis on the
    largest two-site block, and the MPO environments, with a 1.5x slack
    factor for transient SVD workspace.
    """
    dims = (2,) + config.resolved_fock_dims()
    bond = config.max_bond
    state = sum(bond * bond * d for d in dims)
    theta_block = max(
        bond * dims[i] * dims[i + 1] * bond for i in range(len(dims) - 1)
    )
    envs = 4 * bond * bond * (len(dims) + 1)
    total_complex = 2 * state + config.krylov_dim * theta_block + envs
    return 16.0 * total_complex * 1.5 / 1e6


def chain_for_config(config: RunConfig) -> ChainCoefficients:
    """Chain mapping for a run; alpha=0 keeps the measure, zeroes the coupling.

    The recurrence coefficients do not depend on the overall weight scale,
    so the decoupled limit reuses the alpha=1 measure with g set to zero.
    """
    measure_alpha = config.alpha if config.alpha > 0 else 1.0
    density: Union[SpectralDensity, ThermalizedDensity]
    density = SpectralDensity(alpha=measure_alpha, s=config.s, omega_c=config.omega_c)
    if config.theta > 0:
        density = ThermalizedDensity(density, theta=config.theta * config.delta)
    coeffs = chain_coefficients(density, config.length)
    if config.alpha == 0:
        coeffs = dataclasses.replace(coeffs, g=0.0, total_weight=0.0)
    return coeffs


@dataclass
class WignerSnapshot:
    time: float
    condition: str  # "uncond" | "plus_x"
    wigner: WignerFunction
    negativity: float
    mode_occupation: float
    orbital: NDArray
    lambda_half_extent: float
    lambda_points: int


@dataclass
class RunOutput:
    config: RunConfig
    coeffs: ChainCoefficients
    records: list[dict]
    times: NDArray
    occupations: NDArray  # records x chain sites
    snapshots: list[WignerSnapshot]
    guide_velocity: float
    final_state: Mps

    def record_table(self) -> NDArray:
        """Timeseries as a dense float matrix in TIMESERIES_COLUMNS order."""
        out = np.full((len(self.records), len(TIMESERIES_COLUMNS)), np.nan)
        for i, rec in enumerate(self.records):
            for j, col in enumerate(TIMESERIES_COLUMNS):
                if col in rec:
                    out[i, j] = rec[col]
        return out


class _RunObserver:
    """Evolution callback computing every per-record diagnostic."""

    def __init__(self, config: RunConfig, coeffs: ChainCoefficients):
        self.config = config
        self.coeffs = coeffs
        self.occupation_rows: list[NDArray] = []
        self.times: list[float] = []
        self.snapshots: list[WignerSnapshot] = []
        self.checkpoints: list[tuple[float, Mps]] = []
        self._prev_orbital = None  # NaturalOrbital once the chain has weight
        self.last_state: Optional[Mps] = None
        self._n_records = 0
        record_dt = config.observe_stride * config.dt
        self._vnc_every = max(1, round(config.vnc_interval / record_dt))

    def _snapshot_due(self, t: float) -> bool:
        half_step = self.config.dt / 2.0
        return any(abs(t - s) < half_step for s in self.config.snapshot_times)

    def _tomography_copy(self, state: Mps) -> Mps:
        if self.config.wigner_max_bond and state.max_bond > self.config.wigner_max_bond:
            policy = TruncationPolicy(
                max_bond=self.config.wigner_max_bond, sv_cutoff=1e-10
            )
            return truncate(state, policy)[0]
        return state

    def _reconstruct(
        self, state: Mps, f: NDArray, occupation: float, first_site: int
    ) -> tuple[WignerFunction, float, tuple[float, int]]:
        lam, out = default_grids(
            occupation,
            base_extent=self.config.grid_half_extent,
            lambda_points=self.config.lambda_points,
            out_points=self.config.out_points,
        )
        chi = characteristic_function(state, f, lam, first_site=first_site)
        w = wigner_from_characteristic(chi, lam, out)
        return w, negativity_volume(w), (lam.half_extent, lam.n_points)

    def __call__(self, t: float, state: Mps) -> dict:
        config = self.config
        metrics = qubit_metrics(state)
        occ = chain_occupations(state)
        front = occupation_front(occ)
        row: dict = {
            "sigma_x": metrics.bloch[0],
            "sigma_y": metrics.bloch[1],
            "sigma_z": metrics.bloch[2],
            "coherence": metrics.coherence,
            "purity": metrics.purity,
            "entropy": metrics.entropy,
            "total_occupation": float(occ.sum()),
            "front_site": float(front),
        }

        try:
            orbital = leading_natural_orbital(one_body_matrix(state), self._prev_orbital)
            self._prev_orbital = orbital
        except DegenerateOrbitalError:
            orbital = initial_orbital(config.length)
        row["orbital_occupation"] = orbital.eigenvalue
        row["leading_fraction"] = orbital.leading_fraction
        row["ipr_width"] = orbital.participation_width

        cond = postselect_plus_x(state)
        row["p_plus"] = cond.probability
        occ_uncond = mode_occupation(state, orbital.f, joint=True)
        occ_cond = mode_occupation(cond.state, orbital.f)
        row["mode_occ_uncond"] = occ_uncond
        row["mode_occ_cond"] = occ_cond

        snapshot = self._snapshot_due(t)
        if snapshot or self._n_records % self._vnc_every == 0:
            shared_occ = max(occ_uncond, occ_cond)
            joint_copy = self._tomography_copy(state)
            cond_copy = self._tomography_copy(cond.state)
            w_u, v_u, lam_u = self._reconstruct(joint_copy, orbital.f, shared_occ, 1)
            w_c, v_c, lam_c = self._reconstruct(cond_copy, orbital.f, shared_occ, 0)
            row["vnc_uncond"] = v_u
            row["vnc_cond"] = v_c
            if snapshot:
                self.snapshots.append(
                    WignerSnapshot(t, "uncond", w_u, v_u, occ_uncond, orbital.f, *lam_u)
                )
                self.snapshots.append(
                    WignerSnapshot(t, "plus_x", w_c, v_c, occ_cond, orbital.f, *lam_c)
                )
                if config.save_checkpoints:
                    self.checkpoints.append((t, state.copy()))
        else:
            row["vnc_uncond"] = math.nan
            row["vnc_cond"] = math.nan

        self.occupation_rows.append(occ.copy())
        self.times.append(t)
        self.last_state = state
        self._n_records += 1
        return row


def run_single(config: RunConfig, out_dir: Optional[Union[str, Path]] = None) -> RunOutput:
    """Execute one full simulation; optionally persist all artefacts."""
    est = estimate_memory_mb(config)
    if est > config.memory_limit_mb:
        raise ResourceLimitError(
            f"estimated working set {est:.0f} MB exceeds the "
            f"{config.memory_limit_mb:.0f} MB ceiling"
        )
    coeffs = chain_for_config(config)
    dims = config.resolved_fock_dims()
    state = product_state([PLUS_X] + [vacuum(d) for d in dims])
    model = ChainModel(delta=config.delta, coeffs=coeffs)
    evo = EvolutionConfig(
        dt=config.dt,
        t_max=config.t_max,
        krylov_dim=config.krylov_dim,
        krylov_tol=config.krylov_tol,
        trunc=TruncationPolicy(max_bond=config.max_bond, sv_cutoff=config.sv_cutoff),
        observe_stride=config.observe_stride,
    )
    observer = _RunObserver(config, coeffs)
    try:
        records = evolve(state, model, evo, [observer])
    except ChainTomoError as exc:
        t_fail = observer.times[-1] if observer.times else 0.0
        if out_dir is not None:
            _write_failure(Path(out_dir), config, exc, t_fail)
        raise
    output = RunOutput(
        config=config,
        coeffs=coeffs,
        records=records,
        times=np.asarray(observer.times),
        occupations=np.asarray(observer.occupation_rows),
        snapshots=observer.snapshots,
        guide_velocity=hopping_guide_velocity(coeffs),
        final_state=observer.last_state if observer.last_state is not None else state,
    )
    if out_dir is not None:
        write_run_output(output, Path(out_dir))
        for t, chk in observer.checkpoints:
            save_mps(chk, str(Path(out_dir) / f"state_{_time_tag(t)}.mps"))
    return output


def _time_tag(t: float) -> str:
    return "t" + f"{t:.2f}".replace(".", "p")


def _format_cell(v: float) -> str:
    return f"{v:.12g}"


def _write_csv(path: Path, header: Sequence[str], rows: NDArray) -> None:
    lines = [f"# schema_version={SCHEMA_VERSION}", ",".join(header)]
    for row in np.atleast_2d(rows):
        lines.append(",".join(_format_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_failure(out_dir: Path, config: RunConfig, exc: Exception, t: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "error": {"type": type(exc).__name__, "message": str(exc), "time": t},
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def write_run_output(output: RunOutput, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "timeseries.csv", TIMESERIES_COLUMNS, output.record_table())

    occ_header = ["time"] + [f"site_{k}" for k in range(1, output.config.length + 1)]
    occ_rows = np.column_stack([output.times, output.occupations])
    _write_csv(out_dir / "occupations.csv", occ_header, occ_rows)

    for snap in output.snapshots:
        stem = f"wigner_{snap.condition}_{_time_tag(snap.time)}"
        _write_csv(
            out_dir / f"{stem}.csv",
            [f"p_{j}" for j in range(snap.wigner.grid.n_points)],
            snap.wigner.values,
        )
        sidecar = {
            "schema_version": SCHEMA_VERSION,
            "time": snap.time,
            "condition": snap.condition,
            "grid": {
                "half_extent": snap.wigner.grid.half_extent,
                "n_points": snap.wigner.grid.n_points,
                "spacing": snap.wigner.grid.spacing,
            },
            "lambda_grid": {
                "half_extent": snap.lambda_half_extent,
                "n_points": snap.lambda_points,
            },
            "negativity_volume": snap.negativity,
            "norm_defect": snap.wigner.norm_defect,
            "mode_occupation": snap.mode_occupation,
            "orbital": [[float(c.real), float(c.imag)] for c in snap.orbital],
        }
        (out_dir / f"{stem}.json").write_text(json.dumps(sidecar, indent=2) + "\n")

    worst = max((r["max_discarded"] for r in output.records), default=0.0)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config": output.config.to_dict(),
        "coefficients": json.loads(output.coeffs.to_json()),
        "guide_velocity": output.guide_velocity,
        "max_discarded_weight": worst,
        "timeseries_columns": TIMESERIES_COLUMNS,
        "conventions": {
            "wigner_normalisation": "integral of W over (q,p) equals 1; vacuum peak 1/pi",
            "quadratures": "q = (c + c^dag)/sqrt(2), hbar = 1",
            "negativity_volume": "2 * integral of |W| over the region W < 0",
            "coherence_loss": "1 - sigma_x at the time of peak conditional negativity volume",
            "conditional_branch": "projection of the qubit onto +x before reconstruction",
            "front_site": "largest chain site (1-based) with occupation > 1e-3; -1 if none",
        },
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep over coupling, exponent and temperature."""

    alphas: tuple[float, ...]
    ss: tuple[float, ...]
    thetas: tuple[float, ...]
    base: RunConfig

    def __post_init__(self) -> None:
        if not (self.alphas and self.ss and self.thetas):
            raise ConfigError("sweep axes must be non-empty")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "ss", tuple(float(v) for v in self.ss))
        object.__setattr__(self, "thetas", tuple(float(v) for v in self.thetas))

    def points(self) -> list[RunConfig]:
        return [
            dataclasses.replace(self.base, alpha=a, s=s, theta=th)
            for a, s, th in itertools.product(self.alphas, self.ss, self.thetas)
        ]

    @classmethod
    def from_dict(cls, data: dict, base: Optional[RunConfig] = None) -> "SweepSpec":
        try:
            axes = {k: tuple(data[k]) for k in ("alphas", "ss", "thetas")}
        except KeyError as exc:
            raise ConfigError(f"sweep spec missing axis {exc}") from exc
        overrides = dict(data.get("base", {}))
        if base is None:
            overrides.setdefault("alpha", axes["alphas"][0])
            overrides.setdefault("s", axes["ss"][0])
            base_cfg = RunConfig.from_dict(overrides)
        else:
            base_cfg = dataclasses.replace(base, **overrides) if overrides else base
        return cls(base=base_cfg, **axes)


SWEEP_COLUMNS = [
    "alpha",
    "s",
    "theta",
    "peak_vnc_cond",
    "t_peak",
    "coherence_loss",
    "p_plus_at_peak",
    "peak_vnc_uncond",
    "peak_occupation",
]


def summarize_run(output: RunOutput) -> dict:
    """Per-point summary row: peak conditional negativity and its context."""
    table = output.record_table()
    col = {name: i for i, name in enumerate(TIMESERIES_COLUMNS)}
    vnc_c = table[:, col["vnc_cond"]]
    if np.all(np.isnan(vnc_c)):
        peak_idx = 0
        peak = 0.0
    else:
        peak_idx = int(np.nanargmax(vnc_c))
        peak = float(vnc_c[peak_idx])
    vnc_u = table[:, col["vnc_uncond"]]
    return {
        "alpha": output.config.alpha,
        "s": output.config.s,
        "theta": output.config.theta,
        "peak_vnc_cond": peak,
        "t_peak": float(table[peak_idx, col["time"]]),
        "coherence_loss": float(1.0 - table[peak_idx, col["sigma_x"]]),
        "p_plus_at_peak": float(table[peak_idx, col["p_plus"]]),
        "peak_vnc_uncond": float(np.nanmax(vnc_u)) if not np.all(np.isnan(vnc_u)) else 0.0,
        "peak_occupation": float(np.max(table[:, col["total_occupation"]])),
    }


def _point_dir(root: Path, config: RunConfig) -> Path:
    return root / f"a{config.alpha:g}_s{config.s:g}_th{config.theta:g}"


def _sweep_point(args: tuple[RunConfig, Optional[str]]) -> dict:
    config, out_dir = args
    try:
        output = run_single(config, out_dir)
        row = summarize_run(output)
        row["status"] = "ok"
    except ChainTomoError as exc:
        row = {
            "alpha": config.alpha,
            "s": config.s,
            "theta": config.theta,
            "status": f"error: {type(exc).__name__}: {exc}",
        }
    return row


def run_sweep(
    spec: SweepSpec,
    workers: int = 1,
    out_dir: Optional[Union[str, Path]] = None,
) -> list[dict]:
    """Execute every sweep point; failures are recorded, not fatal.

    Row order follows the Cartesian product regardless of worker count.
    """
    root = Path(out_dir) if out_dir is not None else None
    jobs = [
        (cfg, str(_point_dir(root, cfg)) if root is not None else None)
        for cfg in spec.points()
    ]
    if workers <= 1:
        rows = [_sweep_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    if root is not None:
        root.mkdir(parents=True, exist_ok=True)
        lines = [f"# schema_version={SCHEMA_VERSION}", ",".join(SWEEP_COLUMNS + ["status"])]
        for row in rows:
            cells = [
                _format_cell(row[c]) if c in row else "nan" for c in SWEEP_COLUMNS
            ]
            cells.append('"' + row["status"] + '"')
            lines.append(",".join(cells))
        (root / "sweep_summary.csv").write_text("\n".join(lines) + "\n")
        meta = {
            "schema_version": SCHEMA_VERSION,
            "alphas": list(spec.alphas),
            "ss": list(spec.ss),
            "thetas": list(spec.thetas),
            "base": spec.base.to_dict(),
            "columns": SWEEP_COLUMNS + ["status"],
        }
        (root / "sweep_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return rows
