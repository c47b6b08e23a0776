"""Boarding strategies: who gets which seat and in what order they queue."""

import enum
import math

import numpy as np

from .errors import ValidationError


class BoardingStrategy(enum.Enum):
    RANDOM = "random"
    OUTSIDE_IN = "outside-in"
    BACK_TO_FRONT = "back-to-front"
    ROTATING_ZONE = "rotating-zone"
    USER_DEFINED = "user-defined"


def pax_count(n_seats, load_factor):
    """Headcount for a load factor; round-half-up, never zero or above capacity."""
    if not 0.0 <= load_factor <= 1.0:
        raise ValidationError(f"load factor {load_factor} outside [0, 1]")
    n = math.floor(load_factor * n_seats + 0.5)
    if n <= 0:
        raise ValidationError("load factor yields zero passengers")
    return n


def assign_seats(grid, lf, rng):
    """Draw round(lf * capacity) distinct seats; element i is passenger i's.

    A zero load factor gives an empty list; values outside [0, 1] raise.
    """
    if not 0.0 <= lf <= 1.0:
        raise ValidationError(f"load factor {lf} outside [0, 1]")
    n = math.floor(lf * len(grid.seats) + 0.5)
    if n == 0:
        return []
    picks = rng.choice(len(grid.seats), size=n, replace=False)
    return [grid.seats[i] for i in picks]


def entry_order(strategy, seats, rng, zone_count=4, user_order=None):
    """Queue order (first element enters first) as a permutation of 0..n-1.

    ``seats`` is the per-passenger seat list from assign_seats. Grouped
    strategies shuffle within each group so repeated runs differ.
    """
    n = len(seats)
    if strategy is BoardingStrategy.RANDOM:
        return [int(i) for i in rng.permutation(n)]
    if strategy is BoardingStrategy.USER_DEFINED:
        if user_order is None or sorted(user_order) != list(range(n)):
            raise ValidationError("user order must be a permutation of 0..n-1")
        return list(user_order)
    if strategy is BoardingStrategy.OUTSIDE_IN:
        # deepest seats (window side) first, aisle seats last
        groups = _group_by(range(n), key=lambda i: -seats[i].depth)
        return _concat_shuffled(groups, rng)
    if strategy in (BoardingStrategy.BACK_TO_FRONT, BoardingStrategy.ROTATING_ZONE):
        zones = _row_zones(seats, zone_count)
        if strategy is BoardingStrategy.BACK_TO_FRONT:
            picked = list(reversed(zones))
        else:
            picked = _rotate(zones)
        return _concat_shuffled([z for z in picked if z], rng)
    raise ValidationError(f"unknown strategy {strategy!r}")


def _group_by(items, key):
    out = {}
    for item in items:
        out.setdefault(key(item), []).append(item)
    return [out[k] for k in sorted(out)]


def _concat_shuffled(groups, rng):
    order = []
    for group in groups:
        order.extend(group[int(i)] for i in rng.permutation(len(group)))
    return order


def _row_zones(seats, zone_count):
    """Split distinct seat rows into contiguous front-to-back zones."""
    if zone_count < 1:
        raise ValidationError(f"zone count must be >= 1, got {zone_count}")
    rows = sorted({s.row for s in seats})
    chunks = np.array_split(np.array(rows), min(zone_count, len(rows)))
    zone_of_row = {}
    for z, chunk in enumerate(chunks):
        for row in chunk:
            zone_of_row[int(row)] = z
    zones = [[] for _ in chunks]
    for i, seat in enumerate(seats):
        zones[zone_of_row[seat.row]].append(i)
    return zones


def _rotate(zones):
    """Alternate ends, rear first: last, first, second-last, second, ..."""
    picked = []
    lo, hi = 0, len(zones) - 1
    while lo <= hi:
        picked.append(zones[hi])
        if lo < hi:
            picked.append(zones[lo])
        lo, hi = lo + 1, hi - 1
    return picked
