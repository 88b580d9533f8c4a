#!/usr/bin/env python3
"""Run one full-scale case (L=120, D=100) — long-running.

No tolerance is attached to this scale; it exists to regenerate
full-resolution artefacts when a machine can be left alone for a few
hours.  Expect hours per case and a few GB of working memory; the
pre-flight guardrail will refuse configurations that exceed
``--memory-limit``.
"""

import argparse
import time
from pathlib import Path

from chaintomo.runner import paper_config, run_single, summarize_run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/paper_scale")
    parser.add_argument("--alpha", type=float, default=0.2)
    parser.add_argument("--s", type=float, default=1.0)
    parser.add_argument("--theta", type=float, default=0.0)
    parser.add_argument("--memory-limit", type=float, default=16384.0,
                        help="guardrail in MB (default 16 GB)")
    args = parser.parse_args()

    label = f"a{args.alpha:g}_s{args.s:g}_th{args.theta:g}"
    config = paper_config(
        alpha=args.alpha, s=args.s, theta=args.theta,
        memory_limit_mb=args.memory_limit,
    )
    start = time.time()
    output = run_single(config, Path(args.out) / label)
    summary = summarize_run(output)
    print(
        "%s: %6.0f s  peak V_nc cond %.4f / uncond %.4f  P+ at peak %.3f"
        % (
            label,
            time.time() - start,
            summary["peak_vnc_cond"],
            summary["peak_vnc_uncond"],
            summary["p_plus_at_peak"],
        ),
        flush=True,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
