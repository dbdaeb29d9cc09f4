"""CSV, manifest and SVG outputs."""

from __future__ import annotations

import configparser
import csv
import io
from pathlib import Path

import numpy as np


class OutputError(OSError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    """Comma-separated, single header row, floats written round-trip exact."""
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def curve_rows(curve):
    return [(m, r, bool(c)) for m, r, c in zip(curve.m_values, curve.responses, curve.censored)]


def write_curve(path, curve):
    return write_csv(path, ["M", "response", "censored"], curve_rows(curve))


def read_curve(path):
    from .experiments import ResponseCurve

    header, rows = read_csv(path)
    if header[:3] != ["M", "response", "censored"]:
        raise ValueError(f"{path}: expected header M,response,censored, got {header}")
    m = [float(r[0]) for r in rows]
    resp = [float(r[1]) for r in rows]
    cens = [r[2] in ("1", "True", "true") for r in rows]
    return ResponseCurve(m, resp, cens)


def write_manifest(path, sections: dict):
    """Write an INI-style manifest; ``sections`` maps section -> {key: value}."""
    cp = configparser.ConfigParser(interpolation=None)
    for name, values in sections.items():
        cp[name] = {k: _manifest_value(v) for k, v in values.items()}
    buf = io.StringIO()
    cp.write(buf)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return Path(path)


def _manifest_value(v):
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, (set, frozenset)):
        return ",".join(str(x) for x in sorted(v))
    if isinstance(v, bool):
        return "true" if v else "false"
    return _fmt(v)


def write_svg_plot(path, series, xlabel, ylabel, title="", logx=False):
    """Static line plot; ``series`` is a list of (label, x, y)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "xynoise"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if logx:
            keep = x > 0
            x, y = x[keep], y[keep]
        ax.plot(x, y, marker=".", label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return Path(path)
