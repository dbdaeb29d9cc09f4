"""Balanced 4-qubit |Psi+>: ESD time against noise strength for several noise placements.

    python3 scripts/placements.py --out results/placements
"""

import argparse
from pathlib import Path

from xynoise.experiments import SweepConfig, classify_effect, paper_spec, run_sweep
from xynoise.io import write_csv, write_svg_plot
from xynoise.operators import NoisePlacement


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/placements")
    ap.add_argument("--placements", nargs="*", default=["M34", "M4", "M1", "M2", "M12", "M23", "M234", "M1234"])
    ap.add_argument("--preparation", default="psi_plus_4q_balanced")
    ap.add_argument("--model", default="collective", choices=("collective", "independent"))
    args = ap.parse_args()
    out = Path(args.out)
    rows, series = [], []
    for label in args.placements:
        qubits = NoisePlacement.parse(label).qubits
        curve = run_sweep(SweepConfig(args.preparation, paper_spec(4), qubits, noise_model=args.model))
        print(f"{label:6s} {classify_effect(curve).label:26s} t_ESD(M=10) = {curve.responses[-1]:.2f}")
        series.append((label, curve.m_values, curve.responses))
        rows += [(label, m, r, z) for m, r, z in zip(curve.m_values, curve.responses, curve.censored)]
    write_csv(out / "curve.csv", ["placement", "M", "t_esd", "censored"], rows)
    write_svg_plot(out / "plot.svg", series, "M", "t_ESD", logx=True)


if __name__ == "__main__":
    main()
