import pytest

from core.environments import parse_grid_layout
from core.errors import LayoutParseError
from ports.layout_io import load_layout, save_layout
from tests.conftest import TINY_GRID


def test_saved_layout_loads_back(tmp_path):
    layout = parse_grid_layout(TINY_GRID)
    path = save_layout(layout, tmp_path / "nested" / "grid.txt")
    assert load_layout(path) == layout


def test_parse_error_names_the_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("..G\n.x.\n", encoding="utf-8")
    with pytest.raises(LayoutParseError) as err:
        load_layout(path)
    assert "bad.txt" in str(err.value)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_layout(tmp_path / "nope.txt")


def test_parse_error_keeps_the_offending_cell(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("..G\n.x.\n", encoding="utf-8")
    with pytest.raises(LayoutParseError) as err:
        load_layout(path)
    assert (err.value.row, err.value.col) == (1, 1)
    assert str(err.value).count("(row 1, col 1)") == 1


def test_row_only_errors_keep_the_row(tmp_path):
    path = tmp_path / "ragged.txt"
    path.write_text("..G\n....\n", encoding="utf-8")
    with pytest.raises(LayoutParseError) as err:
        load_layout(path)
    assert err.value.row == 1
    assert err.value.col is None
