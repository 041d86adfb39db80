import io
import os

import matplotlib.pyplot as plt
import pytest
from matplotlib.collections import QuadMesh

from core import asymptotic_bounds as ab
from core.errors import OutputError
from core.file_utils import read_file_with_auto_encoding, sibling_path, write_file_with_encoding
from core.rate_functions import ProblemShape
from ui import figures, output


def test_cells_keep_full_float_precision():
    value = 0.1 + 0.2
    assert output.format_cell(value) == "0.30000000000000004"
    assert output.parse_cell(output.format_cell(value)) == value
    assert output.format_cell(None) == ""
    assert output.format_cell(True) == "true"
    assert output.parse_cell("BT") == "BT"
    assert output.parse_cell("12") == 12


def test_csv_has_fixed_column_order_and_blank_missing_values():
    text = output.rows_to_csv([{"rho": 0.5, "l_ratio_max": 1.25}], output.RATIO_COLUMNS)
    assert text == "rho,u_ratio_min,u_ratio_max,l_ratio_min,l_ratio_max\n0.5,,,,1.25\n"
    assert output.csv_to_rows(text)[0]["u_ratio_min"] is None


def test_human_table_uses_three_significant_digits():
    table = output.human_table([{"k": 100, "prob": 0.02913}], ["k", "prob"])
    assert "2.91e-02" in table
    assert output.sci(None) == "-"


def test_emit_to_stream_adds_newline():
    stream = io.StringIO()
    assert output.emit("a,b", stream=stream) is None
    assert stream.getvalue() == "a,b\n"


def test_emit_to_file_and_read_back(tmp_path):
    target = tmp_path / "deep" / "rows.csv"
    path = output.emit("x\n1.5\n", str(target))
    assert os.path.isabs(path)
    assert output.read_csv(path) == [{"x": 1.5}]


def test_unwritable_target_raises_output_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OutputError):
        output.write_text(str(blocker / "child.csv"), "x\n")


def test_reading_missing_file_raises_output_error(tmp_path):
    with pytest.raises(OutputError):
        output.read_csv(str(tmp_path / "nope.csv"))


def test_file_helpers_report_errors_as_values(tmp_path):
    content, error = read_file_with_auto_encoding(str(tmp_path / "missing.txt"))
    assert content is None and error
    ok, error = write_file_with_encoding(str(tmp_path / "a.txt"), "line\n")
    assert ok and error is None
    assert read_file_with_auto_encoding(str(tmp_path / "a.txt")) == ("line\n", None)
    assert sibling_path("out/results.csv", ".svg") == os.path.join("out", "results.svg")


def test_heatmaps_draw_one_mesh_per_defined_quantity(tmp_path, monkeypatch):
    kept = {}

    def keep(fig, file_path):
        kept["fig"] = fig
        return file_path

    monkeypatch.setattr(figures, "_save", keep)
    rows = [ab.ct_bounds(ProblemShape(d, r)).as_row() for d in (0.2, 0.8) for r in (0.2, 0.8)]
    figures.grid_heatmaps(rows, str(tmp_path / "ct.svg"), "CT")
    fig = kept["fig"]
    panels = [ax for ax in fig.axes if ax.get_title()]
    assert [ax.get_title() for ax in panels] == ["U (CT)", "L (CT)"]
    assert all(isinstance(ax.collections[0], QuadMesh) for ax in panels)
    plt.close(fig)
