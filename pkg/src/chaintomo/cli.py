"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical-convergence
error, 4 resource guardrail.  All science output goes to files; stdout
carries a short human-readable summary (or, for ``coeffs``, the JSON
itself).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .conditional import mode_occupation, postselect_plus_x
from .errors import ConfigError, ConvergenceError, ResourceLimitError
from .mps import load_mps, one_body_matrix
from .observables import leading_natural_orbital
from .runner import (
    RunConfig,
    SweepSpec,
    WignerSnapshot,
    desk_config,
    paper_config,
    run_single,
    run_sweep,
    summarize_run,
    write_run_output,
)
from .spectral import SpectralDensity, ThermalizedDensity, chain_coefficients
from .wigner import characteristic_function, default_grids, negativity_volume, wigner_from_characteristic


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _preset_dict(name: Optional[str]) -> dict:
    if name is None:
        return {}
    if name == "desk":
        return desk_config().to_dict()
    if name == "paper":
        return paper_config(alpha=0.2, s=1.0).to_dict()
    raise ConfigError(f"unknown preset {name!r}")


def _cmd_run(args: argparse.Namespace) -> int:
    data = _preset_dict(args.preset)
    if args.config:
        data.update(_load_json(args.config))
    if "alpha" not in data or "s" not in data:
        raise ConfigError("config must define at least alpha and s")
    config = RunConfig.from_dict(data)
    out = args.out or f"runs/a{config.alpha:g}_s{config.s:g}_th{config.theta:g}"
    output = run_single(config, out)
    row = summarize_run(output)
    print(
        f"wrote {out}: peak conditional negativity {row['peak_vnc_cond']:.4f} "
        f"at t={row['t_peak']:.2f} (P+ {row['p_plus_at_peak']:.3f})"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    data = _load_json(args.spec)
    base = None
    if args.preset:
        preset = _preset_dict(args.preset)
        preset.update(data.get("base", {}))
        data = dict(data, base=preset)
    spec = SweepSpec.from_dict(data, base)
    rows = run_sweep(spec, workers=args.workers, out_dir=args.out)
    failed = sum(1 for r in rows if r["status"] != "ok")
    print(f"{len(rows)} sweep points, {failed} failed")
    return 0


def _cmd_wigner_snapshot(args: argparse.Namespace) -> int:
    state = load_mps(args.state)
    joint = state.phys_dims[0] == 2  # chain sites always carry d >= 3
    first_site = 1 if joint else 0
    orbital = leading_natural_orbital(one_body_matrix(state, first_site=first_site))
    f = orbital.f

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    snapshots = []
    occ_u = mode_occupation(state, f, joint=joint)
    if joint:
        cond = postselect_plus_x(state)
        occ_c = mode_occupation(cond.state, f)
        targets = [("uncond", state, 1), ("plus_x", cond.state, 0)]
        shared = max(occ_u, occ_c)
    else:
        targets = [("uncond", state, 0)]
        shared = occ_u
    for condition, st, fs in targets:
        lam, out_grid = default_grids(shared)
        chi = characteristic_function(st, f, lam, first_site=fs)
        w = wigner_from_characteristic(chi, lam, out_grid)
        snapshots.append(
            WignerSnapshot(
                time=args.time,
                condition=condition,
                wigner=w,
                negativity=negativity_volume(w),
                mode_occupation=mode_occupation(st, f, joint=fs > 0),
                orbital=f,
                lambda_half_extent=lam.half_extent,
                lambda_points=lam.n_points,
            )
        )
    # reuse the runner's serialisation by wrapping the snapshots alone
    from .runner import SCHEMA_VERSION, _time_tag, _write_csv

    for snap in snapshots:
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
        print(f"wrote {out_dir / stem}.csv (V_nc {snap.negativity:.4f})")
    return 0


def _cmd_coeffs(args: argparse.Namespace) -> int:
    density = SpectralDensity(alpha=args.alpha, s=args.s, omega_c=args.omega_c)
    if args.theta > 0:
        density = ThermalizedDensity(density, theta=args.theta)
    coeffs = chain_coefficients(density, args.length)
    print(coeffs.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaintomo",
        description="Qubit-reservoir chain simulation and mode tomography",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a single simulation")
    run_p.add_argument("--config", help="JSON file with RunConfig fields")
    run_p.add_argument("--out", help="output directory (default runs/<label>)")
    run_p.add_argument("--preset", choices=["desk", "paper"], help="base parameter set")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a Cartesian parameter sweep")
    sweep_p.add_argument("--spec", required=True, help="JSON with alphas/ss/thetas/base")
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.add_argument("--out", help="sweep output root")
    sweep_p.add_argument("--preset", choices=["desk", "paper"])
    sweep_p.set_defaults(func=_cmd_sweep)

    snap_p = sub.add_parser(
        "wigner-snapshot", help="reconstruct phase space from a saved state"
    )
    snap_p.add_argument("--state", required=True, help="MPS checkpoint file")
    snap_p.add_argument("--time", type=float, required=True, help="time label")
    snap_p.add_argument("--out", default=".", help="output directory")
    snap_p.set_defaults(func=_cmd_wigner_snapshot)

    coeffs_p = sub.add_parser("coeffs", help="print chain coefficients as JSON")
    coeffs_p.add_argument("--alpha", type=float, required=True)
    coeffs_p.add_argument("--s", type=float, required=True)
    coeffs_p.add_argument("--omega-c", type=float, default=4.0)
    coeffs_p.add_argument("--theta", type=float, default=0.0)
    coeffs_p.add_argument("--L", "--length", dest="length", type=int, default=120)
    coeffs_p.set_defaults(func=_cmd_coeffs)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource guardrail: {exc}", file=sys.stderr)
        return 4
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
