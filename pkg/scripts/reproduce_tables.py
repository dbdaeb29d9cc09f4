"""Re-run the summary tables, report every cell and the sensitivity of each mismatch.

    python3 scripts/reproduce_tables.py A1 A3 --out results/tables
"""

import argparse
import time
from pathlib import Path

from xynoise.io import write_csv
from xynoise.tables import TABLES, describe_sensitivity, match_summary, reproduce_table, sensitivity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tables", nargs="*", default=sorted(TABLES))
    ap.add_argument("--out", default="results/tables")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--no-sensitivity", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    t0 = time.perf_counter()
    cells = []
    for tid in args.tables:
        def progress(c):
            mark = "ok" if c.match else ("flagged" if c.hard else "MISMATCH")
            print(f"{c.table} row {c.row:2d} {c.placement:6s} expected {c.expected:25s} got {c.predicted:25s} {mark}"
                  f"  [{time.perf_counter() - t0:.0f}s]", flush=True)

        cells += reproduce_table(tid, threads=args.threads, progress=progress)
    write_csv(out / "report.csv", ["table", "row", "preparation", "placement", "expected", "predicted", "match", "hard"],
              [(c.table, c.row, c.preparation, c.placement, c.expected, c.predicted, c.match, c.hard) for c in cells])
    write_csv(out / "curves.csv", ["table", "row", "placement", "M", "response", "censored"],
              [(c.table, c.row, c.placement, m, r, z) for c in cells
               for m, r, z in zip(c.curve.m_values, c.curve.responses, c.curve.censored)])
    s = match_summary(cells)
    print(f"\nscored {s['scored']} cells, matched {s['matched']} ({s['rate']:.1%}); "
          f"flagged {s['flagged']} (matched {s['flagged_matched']})")
    if args.no_sensitivity:
        return
    lines = []
    for c in s["mismatches"] + [c for c in cells if c.hard and not c.match]:
        lines.append(describe_sensitivity(c, sensitivity(c, threads=args.threads)))
        print(lines[-1], flush=True)
    (out / "sensitivity.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
