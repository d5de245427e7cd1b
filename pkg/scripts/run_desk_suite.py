#!/usr/bin/env python3
"""Run every campaign at desk scale and drop reports + CSV tables in out/.

Usage: python3 scripts/run_desk_suite.py [--out out/desk] [--seed 7]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mi2das.experiments import CAMPAIGNS, desk_profile, emit_csv, run_campaign  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/desk")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for campaign in CAMPAIGNS:
        cfg = desk_profile(campaign, seed=args.seed)
        t0 = time.perf_counter()
        report = run_campaign(cfg)
        report.write(out)
        (out / f"{campaign}_table.csv").write_text(emit_csv(report))
        print(f"{campaign}: {report.aggregates.get('n_runs')} runs in {time.perf_counter()-t0:.1f}s -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
