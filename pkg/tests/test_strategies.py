import numpy as np
import pytest

from turnsim.cabin import parse_layout
from turnsim.errors import ValidationError
from turnsim.strategies import (
    BoardingStrategy,
    assign_seats,
    entry_order,
    pax_count,
)

# 8 seat columns, 3 seats each side of a horizontal aisle fed from the left
LAYOUT = parse_layout(
    "L_H=7.2  L_V=3.5\n"
    + "#SSSSSSSS\n" * 3
    + "1........\n"
    + "#SSSSSSSS\n" * 3
)


def test_pax_count_rounds_half_up():
    assert pax_count(189, 1.0) == 189
    assert pax_count(189, 0.8) == 151  # 151.2
    assert pax_count(189, 0.5) == 95  # 94.5 rounds up
    assert pax_count(305, 0.8) == 244
    assert pax_count(308, 0.95) == 293  # 292.6
    with pytest.raises(ValidationError):
        pax_count(189, 0.0)
    with pytest.raises(ValidationError):
        pax_count(189, 1.2)


def test_assign_seats_distinct_and_bounded():
    rng = np.random.default_rng(0)
    seats = assign_seats(LAYOUT, 0.5, rng)
    assert len(seats) == 24
    assert len({s.id for s in seats}) == 24
    full = assign_seats(LAYOUT, 1.0, rng)
    assert {s.id for s in full} == {s.id for s in LAYOUT.seats}
    assert assign_seats(LAYOUT, 0.0, rng) == []
    with pytest.raises(ValidationError):
        assign_seats(LAYOUT, 1.2, rng)
    with pytest.raises(ValidationError):
        assign_seats(LAYOUT, -0.1, rng)


@pytest.mark.parametrize(
    "strategy",
    [
        BoardingStrategy.RANDOM,
        BoardingStrategy.OUTSIDE_IN,
        BoardingStrategy.BACK_TO_FRONT,
        BoardingStrategy.ROTATING_ZONE,
    ],
)
def test_orders_are_permutations(strategy):
    rng = np.random.default_rng(5)
    for trial in range(25):
        lf = float(rng.uniform(0.05, 1.0))
        seats = assign_seats(LAYOUT, lf, rng)
        order = entry_order(strategy, seats, rng)
        assert sorted(order) == list(range(len(seats)))


def test_outside_in_depth_never_increases():
    rng = np.random.default_rng(11)
    for trial in range(10):
        seats = assign_seats(LAYOUT, 30 / 48, rng)
        order = entry_order(BoardingStrategy.OUTSIDE_IN, seats, rng)
        depths = [seats[i].depth for i in order]
        assert depths == sorted(depths, reverse=True)


def test_back_to_front_zone_order():
    rng = np.random.default_rng(12)
    seats = list(LAYOUT.seats)  # all 48, rows 1..8
    order = entry_order(BoardingStrategy.BACK_TO_FRONT, seats, rng, zone_count=4)
    # rows split [1,2] [3,4] [5,6] [7,8]; queue walks zones back to front
    zones = [(seats[i].row - 1) // 2 for i in order]
    assert zones == sorted(zones, reverse=True)


def test_rotating_zone_alternates_ends():
    rng = np.random.default_rng(13)
    seats = list(LAYOUT.seats)
    order = entry_order(BoardingStrategy.ROTATING_ZONE, seats, rng, zone_count=4)
    zones = [(seats[i].row - 1) // 2 for i in order]
    # rear, front, inner-rear, inner-front
    expected = [3] * 12 + [0] * 12 + [2] * 12 + [1] * 12
    assert zones == expected


def test_more_zones_than_rows_still_works():
    rng = np.random.default_rng(14)
    seats = [s for s in LAYOUT.seats if s.row <= 2]
    order = entry_order(BoardingStrategy.BACK_TO_FRONT, seats, rng, zone_count=6)
    assert sorted(order) == list(range(len(seats)))
    rows = [seats[i].row for i in order]
    assert rows == sorted(rows, reverse=True)


def test_user_defined_passthrough_and_validation():
    rng = np.random.default_rng(15)
    seats = assign_seats(LAYOUT, 5 / 48, rng)
    order = entry_order(
        BoardingStrategy.USER_DEFINED, seats, rng, user_order=[4, 2, 0, 1, 3]
    )
    assert order == [4, 2, 0, 1, 3]
    for bad in ([0, 1, 2, 3], [0, 1, 2, 3, 3], [1, 2, 3, 4, 5], None):
        with pytest.raises(ValidationError):
            entry_order(BoardingStrategy.USER_DEFINED, seats, rng, user_order=bad)


def test_grouped_orders_shuffle_within_groups():
    seats = list(LAYOUT.seats)
    a = entry_order(
        BoardingStrategy.BACK_TO_FRONT, seats, np.random.default_rng(1)
    )
    b = entry_order(
        BoardingStrategy.BACK_TO_FRONT, seats, np.random.default_rng(2)
    )
    assert a != b
    assert a == entry_order(
        BoardingStrategy.BACK_TO_FRONT, seats, np.random.default_rng(1)
    )
