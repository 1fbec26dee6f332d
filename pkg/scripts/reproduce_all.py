"""Run every named scenario and collect the headline numbers.

Each scenario writes its artifacts (trajectory or basin outputs plus a
summary.txt) into its own subdirectory of --out. The script prints one
line per scenario and exits nonzero if any tolerance check fails, so it
doubles as a coarse regression gate:

    python scripts/reproduce_all.py --out runs/
    python scripts/reproduce_all.py --only fig4 --resolution 11
"""

import argparse
import sys
import time
from pathlib import Path

from twostrain.figures import FIGURE_NAMES, reproduce


def run_one(name: str, outdir: Path, resolution: int) -> bool:
    options = {"resolution": resolution} if name == "fig4" else {}
    t0 = time.perf_counter()
    summary = reproduce(name, outdir / name, **options)
    wall = time.perf_counter() - t0
    if name == "fig4":
        ok = (
            summary["saddle_gap"] <= 1e-2
            and summary["side_fraction"] >= 0.95
            and summary["n_skipped"] == 0
        )
        print(
            f"{name}: {summary['n_boundary_points']} boundary points, "
            f"saddle gap {summary['saddle_gap']:.2e}, side probes "
            f"{summary['side_matches']}/{summary['side_total']}, "
            f"{wall:.1f} s -> {'ok' if ok else 'FAIL'}"
        )
        return ok
    ok = bool(summary["tolerance_met"])
    print(
        f"{name}: -> {summary['target_id']} deviation {summary['max_deviation']:.2e}, "
        f"{summary['termination']} at t={summary['t_end']:.1f}, "
        f"{wall * 1e3:.0f} ms -> {'ok' if ok else 'FAIL'}"
    )
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("runs"),
                        help="root directory for per-scenario outputs")
    parser.add_argument("--only", choices=FIGURE_NAMES, action="append",
                        help="run just this scenario (repeatable)")
    parser.add_argument("--resolution", type=int, default=21,
                        help="grid nodes per axis for the basin scenario")
    args = parser.parse_args()

    names = args.only or list(FIGURE_NAMES)
    results = [run_one(name, args.out, args.resolution) for name in names]
    print(f"{sum(results)}/{len(results)} scenarios within tolerance")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
