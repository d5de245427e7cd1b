#!/usr/bin/env python3
"""Run one paper-scale campaign against the official CSVs.

Expects --dataset-dir (or MI2DAS_DATA_DIR) holding train.csv, test.csv and
schema.json (see configs/edge_iiotset_schema.json for the schema template).

Usage: python3 scripts/run_official_campaign.py --campaign acm --dataset-dir /data/edge-iiotset
"""

import argparse
import os
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mi2das.experiments import (  # noqa: E402
    CAMPAIGNS,
    DataSource,
    emit_csv,
    full_profile,
    run_campaign,
)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--campaign", required=True, choices=list(CAMPAIGNS))
    ap.add_argument("--dataset-dir", default=os.environ.get("MI2DAS_DATA_DIR"))
    ap.add_argument("--out", default="out/official")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not args.dataset_dir:
        ap.error("--dataset-dir or MI2DAS_DATA_DIR is required")

    root = Path(args.dataset_dir)
    data = DataSource(
        kind="official",
        official_train_csv=str(root / "train.csv"),
        official_test_csv=str(root / "test.csv"),
        schema_json=str(root / "schema.json"),
        expect_dim=53,
    )
    cfg = full_profile(args.campaign, data, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    report = run_campaign(cfg)
    report.write(out)
    (out / f"{args.campaign}_table.csv").write_text(emit_csv(report))
    print(f"{args.campaign}: {report.aggregates.get('n_runs')} runs in {time.perf_counter()-t0:.0f}s -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
