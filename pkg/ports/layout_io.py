"""
ports/layout_io.py | Grid Layout Files
Purpose: Read and write maze/grid-world layout text files ('#' wall, '.' free, 'G' goal, 'S' start).
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: None
"""
from pathlib import Path

from core.environments import GridLayout, parse_grid_layout, serialize_grid_layout
from core.errors import LayoutParseError
from core.file_utils import ensure_folder, load_text


def load_layout(path) -> GridLayout:
    """
    Purpose: Parse a UTF-8 layout file into a GridLayout.
    Inputs: path (str or Path)
    Outputs: GridLayout
    Role: Parse errors are re-raised with the file name so config mistakes can be found.
    """
    text = load_text(path)
    try:
        return parse_grid_layout(text)
    except LayoutParseError as e:
        raise LayoutParseError(f"{Path(path).name}: {e.detail}", row=e.row, col=e.col) from e


def save_layout(layout: GridLayout, path) -> Path:
    path = Path(path)
    ensure_folder(path.parent)
    path.write_text(serialize_grid_layout(layout), encoding="utf-8")
    return path
