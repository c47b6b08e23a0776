import numpy as np
import pytest

from turnsim.cabin import (
    CellKind,
    gamma,
    manhattan_distance,
    parse_layout,
    serialize_layout,
)
from turnsim.errors import ConnectivityError, ParseError, ValidationError

MINIMAL = "L_H=2.4  L_V=0.5\n1.S\n"

SMALL = """\
# two seat columns, one vertical aisle fed from a top door
L_H=4.0  L_V=3.5
##1#
SS.#
SS.#
SS.#
####
"""


def test_minimal_cabin_parses():
    grid = parse_layout(MINIMAL)
    assert grid.n_H == 3 and grid.n_V == 1
    assert grid.kind(0, 0) is CellKind.DOOR
    assert grid.kind(1, 0) is CellKind.AISLE
    assert grid.kind(2, 0) is CellKind.SEAT
    assert len(grid.doors) == 1 and grid.doors[0].cell == (0, 0)
    (seat,) = grid.seats
    assert seat.id == "1A"
    assert seat.cell == (2, 0)
    assert seat.row_entry_cell == (1, 0)
    assert seat.path == ((2, 0),)
    assert seat.depth == 1


def test_small_cabin_seats_and_entries():
    grid = parse_layout(SMALL)
    assert len(grid.seats) == 6
    labels = sorted(s.id for s in grid.seats)
    assert labels == ["1A", "1B", "1C", "2A", "2B", "2C"]
    s1a = grid.seat_by_id["1A"]
    assert s1a.cell == (0, 1)
    assert s1a.row_entry_cell == (2, 1)
    assert s1a.path == ((1, 1), (0, 1))
    assert s1a.depth == 2
    s2c = grid.seat_by_id["2C"]
    assert s2c.cell == (1, 3) and s2c.depth == 1 and s2c.row == 2


def test_gamma_examples():
    # 0.8 m by 0.5 m cells
    grid = parse_layout(MINIMAL)
    assert grid.u_H == pytest.approx(0.8)
    assert grid.u_V == pytest.approx(0.5)
    assert gamma(grid) == pytest.approx(1.6)
    square = parse_layout("L_H=1.5  L_V=0.5\n1.S\n")
    assert gamma(square) == pytest.approx(1.0)
    wide = parse_layout("L_H=3.0  L_V=0.5\n1.S\n")
    assert gamma(wide) == pytest.approx(2.0)


def test_manhattan_distance_rings():
    assert manhattan_distance((0, 0), (0, 0)) == 0
    for k in range(1, 4):
        ring = [
            (x, y)
            for x in range(-4, 5)
            for y in range(-4, 5)
            if manhattan_distance((0, 0), (x, y)) == k
        ]
        assert len(ring) == 4 * k
    assert manhattan_distance((2, 3), (5, 1)) == 5


def test_comments_only_before_header():
    text = "# a comment\n\n# another\n" + MINIMAL
    grid = parse_layout(text)
    assert len(grid.seats) == 1
    # after the header '#' is a wall, not a comment
    walled = "L_H=2.4  L_V=1.0\n1.S\n###\n"
    grid = parse_layout(walled)
    assert grid.n_V == 2
    assert grid.kind(1, 1) is CellKind.WALL


def test_malformed_header_reports_line():
    with pytest.raises(ParseError) as err:
        parse_layout("# note\nL_H 2.4 L_V 0.5\n1.S\n")
    assert "line 2" in str(err.value)
    with pytest.raises(ParseError):
        parse_layout("")
    with pytest.raises(ParseError):
        parse_layout("# only comments\n")


def test_bad_characters_and_ragged_rows():
    with pytest.raises(ParseError) as err:
        parse_layout("L_H=2.4  L_V=0.5\n1.X\n")
    assert "'X'" in str(err.value)
    with pytest.raises(ParseError) as err:
        parse_layout("L_H=2.4  L_V=1.0\n1.S\n1.SS\n")
    assert "line 3" in str(err.value)
    with pytest.raises(ParseError):
        parse_layout("L_H=2.4  L_V=0.5\n1. S\n")


def test_duplicate_door_id():
    with pytest.raises(ParseError):
        parse_layout("L_H=3.2  L_V=0.5\n1.S1\n")


def test_zero_doors_or_seats():
    with pytest.raises(ValidationError):
        parse_layout("L_H=2.4  L_V=0.5\n..S\n")
    with pytest.raises(ValidationError):
        parse_layout("L_H=2.4  L_V=0.5\n1..\n")
    with pytest.raises(ValidationError):
        parse_layout("L_H=0  L_V=0.5\n1.S\n")


def test_boxed_seat_is_connectivity_error():
    text = "L_H=3.2  L_V=1.5\n1.##\n##S#\n####\n"
    with pytest.raises(ConnectivityError) as err:
        parse_layout(text)
    assert "1A" in str(err.value)


def test_unreachable_seat_names_seat_and_door():
    # aisle exists next to the seat but a wall splits it from the door
    text = "L_H=4.0  L_V=0.5\n1.#.S\n"
    with pytest.raises(ConnectivityError) as err:
        parse_layout(text)
    msg = str(err.value)
    assert "1A" in msg and "door 1" in msg


def test_round_trip_shipped_style():
    for text in (MINIMAL, SMALL):
        grid = parse_layout(text)
        again = parse_layout(serialize_layout(grid))
        assert again == grid


def _random_corridor_layout(rng):
    """Random single-aisle cabin: corridor row with seat stubs above/below."""
    n_H = int(rng.integers(4, 12))
    depth_up = int(rng.integers(0, 3))
    depth_down = int(rng.integers(0, 3))
    corridor_y = depth_up
    n_V = depth_up + 1 + depth_down
    rows = [["#"] * n_H for _ in range(n_V)]
    for x in range(n_H):
        rows[corridor_y][x] = "."
    rows[corridor_y][0] = "1"
    placed = 0
    for x in range(1, n_H):
        up = int(rng.integers(0, depth_up + 1))
        down = int(rng.integers(0, depth_down + 1))
        for k in range(1, up + 1):
            rows[corridor_y - k][x] = "S"
            placed += 1
        for k in range(1, down + 1):
            rows[corridor_y + k][x] = "S"
            placed += 1
    if placed == 0:
        rows[corridor_y][-1] = "S"
    header = f"L_H={n_H * 0.8}  L_V={n_V * 0.5}"
    return header + "\n" + "\n".join("".join(r) for r in rows) + "\n"


def test_round_trip_random_layouts():
    rng = np.random.default_rng(20240817)
    for _ in range(60):
        text = _random_corridor_layout(rng)
        grid = parse_layout(text)
        again = parse_layout(serialize_layout(grid))
        assert again == grid
        # every seat's entry is an aisle cell and depth matches its path
        for seat in grid.seats:
            assert grid.kind(*seat.row_entry_cell) is CellKind.AISLE
            assert seat.path[-1] == seat.cell
            assert seat.depth == len(seat.path)
