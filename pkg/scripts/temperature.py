"""ESD-vs-noise sweeps over the bath temperature for two 4-qubit |Psi+> preparations under M34.

    python3 scripts/temperature.py --out results/temperature
"""

import argparse
from pathlib import Path

from xynoise.experiments import SweepConfig, paper_spec, sweep_temperature
from xynoise.io import write_csv, write_svg_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/temperature")
    ap.add_argument("--nbar", type=float, nargs="*", default=[0, 0.5, 1, 2, 4, 6])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    for prep in ("psi_plus_4q_balanced", "psi_plus_4q_prep5"):
        res = sweep_temperature(SweepConfig(prep, paper_spec(4), {3, 4}), args.nbar, threads=args.threads)
        for nb, lab in zip(res.nbar_values, res.labels):
            print(f"{prep:22s} nbar={nb:<4g} {lab}")
        print(f"{prep:22s} nbar_critical = {res.nbar_critical}")
        write_csv(out / f"{prep}.csv", ["nbar", "M", "t_esd", "censored"],
                  [(nb, m, r, z) for nb, c in zip(res.nbar_values, res.curves)
                   for m, r, z in zip(c.m_values, c.responses, c.censored)])
        write_svg_plot(out / f"{prep}.svg", [(f"nbar={nb:g}", c.m_values, c.responses)
                                             for nb, c in zip(res.nbar_values, res.curves)], "M", "t_ESD", logx=True)


if __name__ == "__main__":
    main()
