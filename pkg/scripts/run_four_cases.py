#!/usr/bin/env python3
"""Run the four reference parameter sets at desk scale.

Writes one artefact directory per case (timeseries, occupation heatmap,
Wigner snapshots, metadata) plus a summary line on stdout.  These outputs
feed the plotting frontend and double as a quick qualitative check of the
whole pipeline.
"""

import argparse
import time
from pathlib import Path

from chaintomo.runner import desk_config, run_single, summarize_run

CASES = [(1.0, 0.0), (0.5, 0.0), (1.0, 1.0), (0.5, 1.0)]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/desk_four_cases")
    parser.add_argument("--alpha", type=float, default=0.2)
    parser.add_argument("--t-max", type=float, default=5.0)
    args = parser.parse_args()

    for s, theta in CASES:
        label = f"s{s:g}_th{theta:g}"
        config = desk_config(alpha=args.alpha, s=s, theta=theta, t_max=args.t_max)
        start = time.time()
        output = run_single(config, Path(args.out) / label)
        row = summarize_run(output)
        print(
            f"{label}: {time.time() - start:6.0f} s  "
            f"peak V_nc cond {row['peak_vnc_cond']:.4f} / "
            f"uncond {row['peak_vnc_uncond']:.4f}  "
            f"P+ at peak {row['p_plus_at_peak']:.3f}  "
            f"peak occupation {row['peak_occupation']:.2f}",
            flush=True,
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
