"""Summary tables as data, and their reproduction by sweeps.

Each table row lists the effects reported per noise placement.  A *cell*
is one (row, placement) pair; an empty row carries no effect under the
placements it is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .experiments import (
    DEFAULT_REL_TOL,
    InsufficientData,
    SweepConfig,
    classify_effect,
    default_grid,
    paper_spec,
    run_sweep,
)

NS = "noise_shield"
SAR = "stochastic_antiresonance"
SR = "stochastic_resonance"
MULTI = "multiple_resonances"
NONE = "none"

ACCEPTS = {
    NS: {"noise_shield"},
    SAR: {"stochastic_antiresonance"},
    SR: {"stochastic_resonance"},
    MULTI: {"multiple_resonances"},
    NONE: {"monotone_decreasing", "flat"},
}


@dataclass(frozen=True)
class TableRow:
    number: int
    preparation: str
    cells: tuple  # ((placement label, expected), ...)
    hard: frozenset = frozenset()  # placement labels flagged as known-hard


def _row(number, prep, cells, hard=()):
    return TableRow(number, prep, tuple(cells), frozenset(hard))


def _same(expected, *placements):
    return [(p, expected) for p in placements]


_SUBSYSTEM = ("M1234", "M234", "M12", "M13", "M14", "M1")

TABLES = {
    "A1": [
        _row(1, "eee", _same(NONE, "M3")),
        _row(2, "eeg", _same(NS, "M3")),
        _row(3, "ege", _same(SAR, "M3")),
        _row(4, "egg", _same(MULTI, "M3"), hard=("M3",)),
        _row(5, "gee", _same(SAR, "M3")),
        _row(6, "geg", _same(MULTI, "M3"), hard=("M3",)),
        _row(7, "gge", _same(NS, "M3")),
        _row(8, "ggg", _same(NONE, "M3")),
    ],
    "A2": [_row(k, f"phi_plus_3q_prep{k}", _same(NS, "M3")) for k in range(1, 6)],
    "A3": [
        _row(1, "psi_plus_3q_prep1", _same(NS, "M3")),
        _row(2, "psi_plus_3q_prep2", _same(SR, "M3")),
        _row(3, "psi_plus_3q_prep3", _same(NS, "M3")),
        _row(4, "psi_plus_3q_prep4", _same(NS, "M3")),
        _row(5, "psi_plus_3q_prep5", _same(NS, "M3")),
    ],
    "A4": [
        _row(1, "eeee", _same(NONE, "M34", "M4")),
        _row(2, "eeeg", _same(NS, "M34", "M4")),
        _row(3, "eege", _same(NS, "M34")),
        _row(4, "eegg", _same(NS, "M34", "M4")),
        _row(5, "egee", _same(NS, "M34", "M4")),
        _row(6, "egeg", _same(SAR, "M34", "M4")),
        _row(7, "egge", _same(NS, "M34", "M4")),
        _row(8, "eggg", _same(NS, "M34", "M4")),
        _row(9, "geee", _same(NS, "M34", "M4")),
        _row(10, "geeg", _same(NS, "M34", "M4")),
        _row(11, "gege", [("M4", NS), ("M34", SAR)]),
        _row(12, "gegg", [("M34", NS), ("M4", MULTI)]),
        _row(13, "ggee", _same(NS, "M34", "M4")),
        _row(14, "ggeg", _same(MULTI, *_SUBSYSTEM), hard=_SUBSYSTEM),
        _row(15, "ggge", [("M4", NS)] + _same(MULTI, *_SUBSYSTEM), hard=_SUBSYSTEM),
        _row(16, "gggg", _same(NONE, "M34", "M4")),
    ],
    "A5": [
        _row(1, "phi_plus_4q_prep1", _same(NS, "M34", "M4")),
        _row(2, "phi_plus_4q_prep2", _same(SAR, "M34")),
        _row(3, "phi_plus_4q_prep3", _same(NS, "M34", "M4")),
        _row(4, "phi_plus_4q_prep4", _same(NS, "M34", "M4")),
        _row(5, "phi_plus_4q_prep5", _same(NS, "M34", "M4")),
        _row(6, "phi_plus_4q_prep6", _same(SAR, "M34")),
        _row(7, "phi_plus_4q_prep7", _same(NS, "M34", "M4")),
    ],
    "A6": [
        _row(1, "psi_plus_4q_prep1", _same(NS, "M34", "M4")),
        _row(2, "psi_plus_4q_prep2", _same(NS, "M34", "M4")),
        _row(3, "psi_plus_4q_prep3", _same(NS, "M34", "M4")),
        _row(4, "psi_plus_4q_prep4", _same(NS, "M34", "M4")),
        _row(5, "psi_plus_4q_prep5", _same(SAR, "M34", "M4")),
        _row(6, "psi_plus_4q_prep6", [("M34", SAR), ("M4", MULTI)]),
        _row(7, "psi_plus_4q_prep7", _same(NS, "M34", "M4") + _same(SR, "M234", "M2")),
    ],
}

TABLE_QUBITS = {"A1": 3, "A2": 3, "A3": 3, "A4": 4, "A5": 4, "A6": 4}


@dataclass
class CellResult:
    table: str
    row: int
    preparation: str
    placement: str
    expected: str
    predicted: str
    hard: bool
    curve: object = field(repr=False, default=None)
    classification: object = field(repr=False, default=None)

    @property
    def match(self) -> bool:
        return self.predicted in ACCEPTS[self.expected]


def cell_config(table_id, row: TableRow, placement: str, grid=None, **overrides) -> SweepConfig:
    spec = paper_spec(TABLE_QUBITS[table_id])
    qubits = frozenset(int(c) for c in placement.lstrip("M"))
    return SweepConfig(
        preparation=row.preparation,
        spec=spec,
        placement=qubits,
        grid=tuple(grid if grid is not None else default_grid()),
        **overrides,
    )


def reproduce_table(table_id: str, rel_tol: float = DEFAULT_REL_TOL, grid=None, threads: int = 1, rows=None,
                    progress=None, **overrides) -> list[CellResult]:
    """Run every (row, placement) cell of one table at the default physics."""
    if table_id not in TABLES:
        raise KeyError(f"unknown table {table_id!r}; expected one of {sorted(TABLES)}")
    out = []
    for row in TABLES[table_id]:
        if rows is not None and row.number not in rows:
            continue
        for placement, expected in row.cells:
            config = cell_config(table_id, row, placement, grid, **overrides)
            curve = run_sweep(config, threads)
            try:
                cls = classify_effect(curve, rel_tol)
                label = cls.label
            except InsufficientData:
                # too much of the curve ran past t_max; a mismatch, not an error
                cls, label = None, "insufficient_data"
            res = CellResult(table_id, row.number, row.preparation, placement, expected, label,
                             placement in row.hard, curve, cls)
            out.append(res)
            if progress is not None:
                progress(res)
    return out


def match_summary(cells: list[CellResult]) -> dict:
    """Match rate over cells not flagged as known-hard, plus flagged counts."""
    scored = [c for c in cells if not c.hard]
    flagged = [c for c in cells if c.hard]
    n_match = sum(c.match for c in scored)
    return {
        "cells": len(cells),
        "scored": len(scored),
        "matched": n_match,
        "rate": n_match / len(scored) if scored else 1.0,
        "flagged": len(flagged),
        "flagged_matched": sum(c.match for c in flagged),
        "mismatches": [c for c in scored if not c.match],
    }


def sensitivity(cell: CellResult, rel_tols=(0.02, 0.05, 0.1, 0.2), refined_points: int = 80, threads: int = 1,
                **overrides) -> dict:
    """Re-label one cell at other rel_tol values and on a denser default grid."""
    by_tol = {}
    for tol in rel_tols:
        try:
            by_tol[tol] = classify_effect(cell.curve, tol).label
        except InsufficientData:
            by_tol[tol] = "insufficient_data"
    row = next(r for r in TABLES[cell.table] if r.number == cell.row)
    config = cell_config(cell.table, row, cell.placement, default_grid(refined_points), **overrides)
    dense = run_sweep(config, threads)
    try:
        refined = classify_effect(dense).label
    except InsufficientData:
        refined = "insufficient_data"
    return {"rel_tol": by_tol, "refined_points": refined_points, "refined": refined, "refined_curve": dense}


def describe_sensitivity(cell: CellResult, sens: dict) -> str:
    tols = ", ".join(f"{t:g}:{lab}" for t, lab in sens["rel_tol"].items())
    return (f"{cell.table} row {cell.row} {cell.placement}: expected {cell.expected}, got {cell.predicted}; "
            f"rel_tol [{tols}]; {sens['refined_points']}-point grid: {sens['refined']}")
