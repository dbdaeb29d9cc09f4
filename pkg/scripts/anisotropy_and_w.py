"""Anisotropy trend of the 4-qubit balanced |Phi+> shield, and the two W-state preparations.

    python3 scripts/anisotropy_and_w.py --out results/misc
"""

import argparse
from pathlib import Path

from xynoise.experiments import SweepConfig, classify_effect, paper_spec, run_sweep, sweep_anisotropy
from xynoise.io import write_csv, write_svg_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/misc")
    ap.add_argument("--delta", type=float, nargs="*", default=[0.1, 0.2, 0.4])
    args = ap.parse_args()
    out = Path(args.out)
    fam = sweep_anisotropy(SweepConfig("phi_plus_4q_balanced", paper_spec(4), {3, 4}), args.delta)
    for d, curve, gain in fam:
        print(f"delta={d:<4g} {classify_effect(curve).label:26s} gain = {gain:.2f}")
    write_csv(out / "anisotropy.csv", ["delta", "M", "t_esd", "censored"],
              [(d, m, r, z) for d, c, _ in fam for m, r, z in zip(c.m_values, c.responses, c.censored)])
    write_svg_plot(out / "anisotropy.svg", [(f"delta={d:g}", c.m_values, c.responses) for d, c, _ in fam],
                   "M", "t_ESD", logx=True)
    series, rows = [], []
    for prep in ("w_state", "w_state_dephased"):
        curve = run_sweep(SweepConfig(prep, paper_spec(3), {3}))
        print(f"{prep:18s} {classify_effect(curve).label}")
        series.append((prep, curve.m_values, curve.responses))
        rows += [(prep, m, r, z) for m, r, z in zip(curve.m_values, curve.responses, curve.censored)]
    write_csv(out / "w_state.csv", ["preparation", "M", "t_esd", "censored"], rows)
    write_svg_plot(out / "w_state.svg", series, "M", "t_ESD", logx=True)


if __name__ == "__main__":
    main()
