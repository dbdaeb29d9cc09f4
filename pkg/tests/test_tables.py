import numpy as np
import pytest

from xynoise.experiments import ResponseCurve, default_grid
from xynoise.states import get_preparation
from xynoise.tables import (
    ACCEPTS,
    MULTI,
    NONE,
    NS,
    SAR,
    SR,
    TABLE_QUBITS,
    TABLES,
    CellResult,
    cell_config,
    match_summary,
    reproduce_table,
)


def test_row_counts():
    assert {k: len(v) for k, v in TABLES.items()} == {"A1": 8, "A2": 5, "A3": 5, "A4": 16, "A5": 7, "A6": 7}


@pytest.mark.parametrize("table_id", sorted(TABLES))
def test_rows_are_valid_cells(table_id):
    for k, row in enumerate(TABLES[table_id], 1):
        assert row.number == k
        prep = get_preparation(row.preparation)
        assert prep.n_qubits == TABLE_QUBITS[table_id]
        assert row.cells
        for placement, expected in row.cells:
            assert expected in ACCEPTS
            cfg = cell_config(table_id, row, placement, grid=(0.0, 0.1))
            assert cfg.placement_label == placement
        assert row.hard <= {p for p, _ in row.cells}


def test_a1_row_order_and_labels():
    assert [r.preparation for r in TABLES["A1"]] == ["eee", "eeg", "ege", "egg", "gee", "geg", "gge", "ggg"]
    assert [r.cells[0][1] for r in TABLES["A1"]] == [NONE, NS, SAR, MULTI, SAR, MULTI, NS, NONE]


def test_spot_labels():
    assert TABLES["A2"][0].cells == (("M3", NS),)
    assert TABLES["A3"][1].cells == (("M3", SR),)
    assert dict(TABLES["A6"][4].cells) == {"M34": SAR, "M4": SAR}
    assert dict(TABLES["A6"][6].cells) == {"M34": NS, "M4": NS, "M234": SR, "M2": SR}
    assert dict(TABLES["A4"][11].cells) == {"M34": NS, "M4": MULTI}


def test_cell_config_uses_paper_physics():
    cfg = cell_config("A5", TABLES["A5"][0], "M34")
    s = cfg.spec
    assert (s.n_qubits, s.omega0, s.J, s.delta, s.gamma, s.nbar) == (4, 4.0, pytest.approx(0.2), pytest.approx(0.1), 0.01, 0.0)
    assert cfg.placement == frozenset({3, 4})
    assert list(cfg.grid) == default_grid()


def _cell(expected, predicted, hard=False):
    return CellResult("A1", 1, "eee", "M3", expected, predicted, hard)


def test_accepts_blank_rows_as_monotone_or_flat():
    assert _cell(NONE, "flat").match and _cell(NONE, "monotone_decreasing").match
    assert not _cell(NONE, "noise_shield").match
    assert _cell(MULTI, "multiple_resonances").match


def test_match_summary_excludes_hard_cells():
    cells = [_cell(NS, "noise_shield"), _cell(NS, "flat"), _cell(MULTI, "flat", hard=True), _cell(SR, "stochastic_resonance", hard=True)]
    s = match_summary(cells)
    assert (s["cells"], s["scored"], s["matched"], s["flagged"], s["flagged_matched"]) == (4, 2, 1, 2, 1)
    assert s["rate"] == 0.5
    assert s["mismatches"] == [cells[1]]


def test_unknown_table():
    with pytest.raises(KeyError):
        reproduce_table("A9")


def test_small_reproduction_run():
    seen = []
    cells = reproduce_table("A2", grid=np.linspace(0, 1, 9), rows=[1], t_max=300.0, progress=seen.append)
    assert len(cells) == 1 and seen == cells
    c = cells[0]
    assert (c.row, c.placement, c.expected) == (1, "M3", NS)
    assert isinstance(c.curve, ResponseCurve) and len(c.curve.m_values) == 9
    assert c.predicted == c.classification.label


def test_heavily_censored_cell_is_reported_not_raised():
    cells = reproduce_table("A2", grid=np.linspace(0, 1, 9), rows=[1], t_max=2.0)
    assert cells[0].predicted == "insufficient_data"
    assert not cells[0].match


def test_sensitivity_report():
    from xynoise.tables import describe_sensitivity, sensitivity

    cell = reproduce_table("A2", grid=np.linspace(0, 1, 9), rows=[1], t_max=300.0)[0]
    sens = sensitivity(cell, rel_tols=(0.05, 0.2), refined_points=14, t_max=300.0)
    assert set(sens["rel_tol"]) == {0.05, 0.2}
    assert sens["rel_tol"][0.05] == cell.predicted
    assert len(sens["refined_curve"].m_values) == 14
    text = describe_sensitivity(cell, sens)
    assert "A2 row 1 M3" in text and "14-point grid" in text


def test_tables_use_collective_noise_unless_overridden():
    row = TABLES["A5"][0]
    assert cell_config("A5", row, "M34").noise_model == "collective"
    assert cell_config("A5", row, "M34", noise_model="independent").noise_model == "independent"
