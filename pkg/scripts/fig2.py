"""Two-qubit ESD time against collective noise for |Psi+> and |Phi+>, at nbar = 0 and 0.5.

    python3 scripts/fig2.py --out results/fig2
"""

import argparse
from pathlib import Path

from xynoise.experiments import SweepConfig, classify_effect, run_sweep, two_qubit_spec
from xynoise.io import write_csv, write_svg_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/fig2")
    ap.add_argument("--nbar", type=float, nargs="*", default=[0.0, 0.5])
    args = ap.parse_args()
    out = Path(args.out)
    rows, series = [], []
    for nbar in args.nbar:
        for prep in ("psi_plus_2q", "phi_plus_2q"):
            curve = run_sweep(SweepConfig(prep, two_qubit_spec(nbar=nbar), {1, 2}))
            label = classify_effect(curve).label
            print(f"{prep:12s} nbar={nbar:<4g} {label}")
            series.append((f"{prep} nbar={nbar:g}", curve.m_values, curve.responses))
            rows += [(prep, nbar, m, r, z) for m, r, z in zip(curve.m_values, curve.responses, curve.censored)]
    write_csv(out / "curve.csv", ["preparation", "nbar", "M", "t_esd", "censored"], rows)
    write_svg_plot(out / "plot.svg", series, "M", "t_ESD", logx=True)


if __name__ == "__main__":
    main()
