"""Batch fixture generation: every table CSV in, one fixture JSON out."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .fixtures import fixture_from_csv


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adaptometer-oracle",
        description="Fit reference models for exported sample tables and "
                    "write golden fixtures",
    )
    parser.add_argument("--tables", required=True,
                        help="directory of sample-table CSVs")
    parser.add_argument("--fixtures", required=True,
                        help="output directory for fixture JSONs")
    parser.add_argument("--fe-only", action="append", default=[],
                        help="table stem to also fit without random effects")
    args = parser.parse_args(argv)

    tables = sorted(Path(args.tables).glob("*.csv"))
    if not tables:
        print(f"no CSV tables under {args.tables}", file=sys.stderr)
        return 1
    out_dir = Path(args.fixtures)
    out_dir.mkdir(parents=True, exist_ok=True)
    for csv_path in tables:
        rel_name = f"tables/{csv_path.name}"
        fixture = fixture_from_csv(csv_path, mixed=True, input_name=rel_name)
        target = out_dir / f"{csv_path.stem}.mixed.json"
        target.write_text(fixture.to_json(), encoding="utf-8")
        note = "" if fixture.converged else "  [non-convergence flagged]"
        print(f"{target.name}: loglik={fixture.loglik:.2f}{note}")
        if csv_path.stem in args.fe_only:
            fe = fixture_from_csv(csv_path, mixed=False, input_name=rel_name)
            fe_target = out_dir / f"{csv_path.stem}.logit.json"
            fe_target.write_text(fe.to_json(), encoding="utf-8")
            print(f"{fe_target.name}: loglik={fe.loglik:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
