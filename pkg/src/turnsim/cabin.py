"""Discretised cabin model: layout parsing, seats, doors and grid geometry.

Layout file format (UTF-8 text)::

    # comment lines are allowed before the header only
    L_H=26.4  L_V=3.5
    1SSSSSS...
    .SSSSSS...
    ...

The header gives the cabin planform length and width in metres. Every line
after the header is one grid row; the first grid row fixes n_H and all rows
must match it. Characters: ``#`` wall, ``S`` seat, ``.`` aisle, ``1``-``9``
door with that id. Spaces are forbidden. Coordinates are (column, row) with
the origin at the top-left character of the first grid row.
"""

import enum
import re
import string
from dataclasses import dataclass

from .errors import ConnectivityError, ParseError, ValidationError

_HEADER_RE = re.compile(
    r"\s*L_H\s*=\s*([0-9]+(?:\.[0-9]+)?)\s+L_V\s*=\s*([0-9]+(?:\.[0-9]+)?)\s*$"
)

# Directions a passenger can leave a seat row through, in tie-break
# preference order: up, then down. Seat rows run across the cabin (along
# y); the x axis is the cabin axis, so sideways exits would walk through
# seat backs and are not considered.
_ROW_EXIT_DIRS = ((0, -1), (0, 1))


class CellKind(enum.Enum):
    """Static nature of a grid cell (occupancy is runtime state, not kind)."""

    WALL = "#"
    SEAT = "S"
    AISLE = "."
    DOOR = "D"


@dataclass(frozen=True)
class SeatRef:
    """One seat: label, grid cell, and how it connects to the aisle.

    ``path`` lists the seat cells walked (in order) from the row entry to the
    seat itself, inclusive; its length is the seat depth used by outside-in
    ordering and interference handling.
    """

    id: str
    cell: tuple
    row_entry_cell: tuple
    row: int
    path: tuple

    @property
    def depth(self):
        return len(self.path)


@dataclass(frozen=True)
class DoorRef:
    """One door cell; the active flag is set per run, walls when inactive."""

    id: int
    cell: tuple
    active: bool = True


class CabinGrid:
    """Immutable discretised cabin. Safe to share across concurrent runs."""

    def __init__(self, n_H, n_V, L_H, L_V, cells, seats, doors):
        self.n_H = n_H
        self.n_V = n_V
        self.L_H = L_H
        self.L_V = L_V
        self.cells = cells  # tuple of n_V row-tuples of CellKind
        self.seats = tuple(seats)
        self.doors = tuple(doors)
        self.seat_by_id = {s.id: s for s in self.seats}
        self.door_by_id = {d.id: d for d in self.doors}

    @property
    def u_H(self):
        return self.L_H / self.n_H

    @property
    def u_V(self):
        return self.L_V / self.n_V

    @property
    def gamma(self):
        return self.u_H / self.u_V

    def in_bounds(self, x, y):
        return 0 <= x < self.n_H and 0 <= y < self.n_V

    def kind(self, x, y):
        return self.cells[y][x]

    def __eq__(self, other):
        if not isinstance(other, CabinGrid):
            return NotImplemented
        return (
            self.n_H == other.n_H
            and self.n_V == other.n_V
            and self.L_H == other.L_H
            and self.L_V == other.L_V
            and self.cells == other.cells
            and self.seats == other.seats
            and self.doors == other.doors
        )

    def __repr__(self):
        return (
            f"CabinGrid({self.n_H}x{self.n_V}, {len(self.seats)} seats, "
            f"{len(self.doors)} doors)"
        )


def gamma(grid):
    """Anisotropy ratio u_H/u_V of a grid."""
    return grid.u_H / grid.u_V


def manhattan_distance(p, q):
    """L1 distance between two (x, y) coordinates."""
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


def parse_layout(text):
    """Parse a layout file into a CabinGrid.

    Raises:
        ParseError: malformed header, unknown character, ragged rows,
            duplicate door ids, spaces.
        ConnectivityError: a seat has no aisle access or is unreachable
            from some door.
        ValidationError: zero seats, zero doors, or non-positive dimensions.
    """
    lines = text.splitlines()

    # Comments and blank lines are only allowed before the header; after it
    # every line is a grid row ('#' is the wall character there).
    idx = 0
    while idx < len(lines) and (not lines[idx].strip() or lines[idx].lstrip().startswith("#")):
        idx += 1
    if idx == len(lines):
        raise ParseError("missing header line 'L_H=<m>  L_V=<m>'")
    m = _HEADER_RE.match(lines[idx])
    if m is None:
        raise ParseError(f"line {idx + 1}: malformed header {lines[idx]!r}")
    L_H, L_V = float(m.group(1)), float(m.group(2))
    if L_H <= 0 or L_V <= 0:
        raise ValidationError(f"line {idx + 1}: cabin dimensions must be positive")

    rows = lines[idx + 1 :]
    while rows and not rows[-1].strip():
        rows.pop()
    if not rows:
        raise ParseError("no grid rows after header")
    first_lineno = idx + 2
    n_H = len(rows[0])
    n_V = len(rows)

    kinds = []
    door_cells = {}
    for y, row in enumerate(rows):
        lineno = first_lineno + y
        if len(row) != n_H:
            raise ParseError(f"line {lineno}: row length {len(row)} != {n_H}")
        krow = []
        for x, ch in enumerate(row):
            if ch == "#":
                krow.append(CellKind.WALL)
            elif ch == "S":
                krow.append(CellKind.SEAT)
            elif ch == ".":
                krow.append(CellKind.AISLE)
            elif ch in "123456789":
                door_id = int(ch)
                if door_id in door_cells:
                    raise ParseError(f"line {lineno}: duplicate door id {door_id}")
                door_cells[door_id] = (x, y)
                krow.append(CellKind.DOOR)
            elif ch == " ":
                raise ParseError(f"line {lineno}: spaces are forbidden (column {x})")
            else:
                raise ParseError(f"line {lineno}: unknown cell character {ch!r}")
        kinds.append(tuple(krow))
    cells = tuple(kinds)

    if not door_cells:
        raise ValidationError("layout has no doors")

    seat_cells = [
        (x, y) for y in range(n_V) for x in range(n_H) if cells[y][x] is CellKind.SEAT
    ]
    if not seat_cells:
        raise ValidationError("layout has no seats")

    # Row numbers count seat-bearing columns left to right; letters run
    # top to bottom within a column.
    seat_columns = sorted({x for x, _ in seat_cells})
    row_of_column = {x: i + 1 for i, x in enumerate(seat_columns)}
    letter_of_cell = {}
    for col in seat_columns:
        ys = sorted(y for x, y in seat_cells if x == col)
        for letter, y in zip(string.ascii_uppercase, ys):
            letter_of_cell[(col, y)] = letter

    seats = []
    for x, y in seat_cells:
        label = f"{row_of_column[x]}{letter_of_cell[(x, y)]}"
        entry = _row_exit(cells, n_H, n_V, x, y)
        if entry is None:
            raise ConnectivityError(f"seat {label} has no straight aisle access")
        entry_cell, path = entry
        seats.append(SeatRef(label, (x, y), entry_cell, row_of_column[x], path))

    doors = [DoorRef(i, door_cells[i]) for i in sorted(door_cells)]

    # Fail fast on unreachable seats: flood fill over aisle/door cells from
    # every door individually.
    for door in doors:
        reach = _flood(cells, n_H, n_V, door.cell)
        for seat in seats:
            if seat.row_entry_cell not in reach:
                raise ConnectivityError(
                    f"seat {seat.id} is unreachable from door {door.id}"
                )

    return CabinGrid(n_H, n_V, L_H, L_V, cells, seats, doors)


def _row_exit(cells, n_H, n_V, x, y):
    """Nearest aisle cell reachable from a seat through seats in a straight line.

    Returns (aisle_cell, walk-in path of seat cells ending at the seat), or
    None when the seat is boxed in.
    """
    best = None
    for dx, dy in _ROW_EXIT_DIRS:
        cx, cy = x + dx, y + dy
        steps = 1
        while 0 <= cx < n_H and 0 <= cy < n_V and cells[cy][cx] is CellKind.SEAT:
            cx, cy = cx + dx, cy + dy
            steps += 1
        if 0 <= cx < n_H and 0 <= cy < n_V and cells[cy][cx] is CellKind.AISLE:
            if best is None or steps < best[0]:
                path = tuple(
                    (cx - dx * k, cy - dy * k) for k in range(1, steps + 1)
                )
                best = (steps, (cx, cy), path)
    if best is None:
        return None
    return best[1], best[2]


def _flood(cells, n_H, n_V, start):
    """Cells reachable from start moving through aisle/door cells."""
    walkable = (CellKind.AISLE, CellKind.DOOR)
    seen = {start}
    stack = [start]
    while stack:
        cx, cy = stack.pop()
        for dx, dy in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            nx, ny = cx + dx, cy + dy
            if 0 <= nx < n_H and 0 <= ny < n_V and (nx, ny) not in seen:
                if cells[ny][nx] in walkable:
                    seen.add((nx, ny))
                    stack.append((nx, ny))
    return seen


def serialize_layout(grid):
    """Render a CabinGrid back to layout-file text (parse round-trips)."""
    door_at = {d.cell: str(d.id) for d in grid.doors}
    out = [f"L_H={grid.L_H!r}  L_V={grid.L_V!r}"]
    for y in range(grid.n_V):
        chars = []
        for x in range(grid.n_H):
            kind = grid.cells[y][x]
            if kind is CellKind.DOOR:
                chars.append(door_at[(x, y)])
            else:
                chars.append(kind.value)
        out.append("".join(chars))
    return "\n".join(out) + "\n"
