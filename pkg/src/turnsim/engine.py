"""Passenger movement engine on the discretised cabin grid.

Time advances in fixed ticks (0.1 s by default). Every passenger occupies
exactly one cell; a move is an instantaneous hop that frees the old cell
and takes the new one, and the cost of the hop (how long until the
passenger may act again) depends on what was entered: seat cells take a
fixed 1.8 s shuffle, aisle and door cells take the passenger's corridor
time, divided by the cell anisotropy gamma for sideways steps. Corridor
time and bag time are sampled once per passenger. Stowing and retrieving
luggage hold the passenger on the row-entry cell for the bag time, during
which others may only squeeze past on a parallel lane with probability
1 - IF, decided once per blocked passenger per stowage event.

Two schedulers produce identical runs: an event agenda (default) that only
evaluates passengers when something they wait on changes, and a naive
whole-population sweep per tick used to cross-check the agenda in tests.
Evaluation order within a tick is ascending passenger index in both.
"""

import heapq
import math
from dataclasses import dataclass

from .cabin import CellKind
from .errors import DeadlockError, ValidationError
from .stochastic import (
    PRESETS,
    assignment_stream,
    order_stream,
    pax_stream,
    sample_weibull,
)
from .strategies import BoardingStrategy, assign_seats, entry_order, pax_count

DEFAULT_TICK_S = 0.1
T_DOOR_S = 2.0  # crossing the entry door while boarding
T_SEAT_S = 1.8  # shuffling across one seat cell
T_TURN_S = 2.4  # turning off the aisle into the seat row
EQUIPMENT_DELAY_S = 120.0  # ground equipment before exits open

#: walking-step candidates in fixed tie-break order: N, E, S, W (y grows south)
CANDIDATE_STEPS = ((0, -1), (1, 0), (0, 1), (-1, 0))
STEP_NAMES = {(0, -1): "N", (1, 0): "E", (0, 1): "S", (-1, 0): "W"}

# occupancy snapshot legend
WALL_CODE = -1
SEAT_FREE_CODE = 1
AISLE_FREE_CODE = 0
AISLE_TAKEN_CODE = -2
SEAT_TAKEN_CODE = -3
DOOR_CODE = -5

_M64 = (1 << 64) - 1


class PaxState:
    """Observable passenger states (plain strings keep event logs readable)."""

    QUEUED = "Queued"
    AT_DOOR = "AtDoor"
    WALKING = "Walking"
    STORING = "Storing"
    INTERFERENCE_ACTOR = "InterferenceActor"
    INTERFERENCE_DISPLACED = "InterferenceDisplaced"
    SEATED = "Seated"
    STANDING = "Standing"
    RETRIEVING = "Retrieving"
    EXITED = "Exited"


# internal phases driving the per-passenger automaton
_QUEUE, _AISLE, _STORE_ARM, _STORE, _ROW, _SI_WAIT, _SI_OUT, _SI_PARKED, \
    _SI_BACK, _RISE, _RETRIEVE, _OUT, _EXIT_ARM, _DONE = range(14)


_INACTIVE_DOOR = object()
_DOORS_CLOSED = object()


def _mix64(x):
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _event_roll(seed, pax, storer, serial):
    """Uniform draw in [0, 1) for one obstruction event.

    A keyed integer mix rather than a generator stream so the outcome
    depends only on (seed, who, whom, which stowage), never on how many
    times or in which order blocked passengers were re-evaluated.
    """
    h = _mix64(seed ^ 0x9E3779B97F4A7C15)
    for v in (pax, storer, serial):
        h = _mix64(h ^ ((v * 0x9E3779B97F4A7C15) & _M64))
    return h / 2.0 ** 64


def _lane_continues(grid, x, y):
    """Whether (x, y) is a walkable cell, i.e. a sidestep there has a future."""
    if not (0 <= x < grid.n_H and 0 <= y < grid.n_V):
        return False
    kind = grid.cells[y][x]
    return kind is CellKind.AISLE or kind is CellKind.DOOR


def next_step(grid, pos, target, blocked=frozenset(), came_from=None):
    """One basic walking choice: N/E/S/W step name, or "Stay".

    Candidates are the four neighbours that are inside the grid, aisle or
    door cells, not in ``blocked``, and do not increase the column (x)
    distance to the target; among them the Manhattan-closest to the target
    wins, ties resolving in N, E, S, W order. The step is only taken when
    it gets strictly closer than standing still -- except that while
    column distance remains and the forward cell is unavailable, a
    sideways step is accepted onto an adjacent lane from which walking can
    continue toward the target. That is what lets a passenger slip around
    a stopped one in a wide aisle, while never drifting more than one lane
    off course and never ducking into a dead-end column. ``came_from``
    (the previous cell, if any) is never re-entered sideways, so a walker
    cannot oscillate between two lanes that are both jammed ahead.
    """
    px, py = pos
    tx, ty = target
    base = abs(px - tx)
    cur = base + abs(py - ty)
    best = None
    best_d = None
    for dx, dy in CANDIDATE_STEPS:
        nx, ny = px + dx, py + dy
        if not (0 <= nx < grid.n_H and 0 <= ny < grid.n_V):
            continue
        kind = grid.cells[ny][nx]
        if kind is not CellKind.AISLE and kind is not CellKind.DOOR:
            continue
        if abs(nx - tx) > base:
            continue
        if (nx, ny) in blocked:
            continue
        d = abs(nx - tx) + abs(ny - ty)
        if best_d is None or d < best_d:
            best, best_d, best_y = (dx, dy), d, ny
    if best is None:
        return "Stay"
    if best_d < cur or (
        best_d == cur + 1 and base > 0 and abs(best_y - ty) <= 1
        and (px + best[0], py + best[1]) != came_from
        and _lane_continues(grid, px + (1 if tx > px else -1), best_y)
    ):
        return STEP_NAMES[best]
    return "Stay"


def attempt_overtake(passenger, blocker, interference, rng):
    """Decide whether ``passenger`` may squeeze past a stowing ``blocker``.

    Bernoulli(1 - interference), drawn once per obstruction event — the
    same (blocker, stowage) pair keeps its first answer until the blocker
    finishes, no matter how often the passenger re-asks.
    """
    key = (blocker.index, blocker.store_serial)
    res = passenger.gate_cache.get(key)
    if res is None:
        if interference <= 0.0:
            res = True
        elif interference >= 1.0:
            res = False
        else:
            res = rng.random() < 1.0 - interference
        passenger.gate_cache[key] = res
    return res


@dataclass(frozen=True)
class ManeuverScript:
    """Precomputed seat-interference choreography, in cells.

    ``egress`` routes evict the seated blockers (aisle-nearest first) out
    to the park cells; ``returns`` bring them back in reverse once the
    entering passenger has cleared the row entry. Routes are plain cell
    sequences consumed hop by hop.
    """

    entry_cell: tuple
    parks: tuple  # nearest to the row entry first
    locked_cells: tuple  # entry + parks, plus a spare lane cell when available
    egress: tuple  # (blocker seat id, route)
    returns: tuple  # (blocker seat id, route)


def resolve_seat_interference(grid, seat, blocker_seats, door):
    """Plan the stand-up dance admitting ``seat``'s passenger past blockers.

    ``blocker_seats`` are the seats of seated passengers between the aisle
    and ``seat``. The returned script parks them beside the row entry on
    the side away from ``door`` (falling back to the other side), the
    passenger enters, and they re-seat deepest first. Raises DeadlockError
    when the aisle row has no room to park them at all; transient
    occupancy of the cells is the caller's problem (defer and retry).
    """
    entry = seat.row_entry_cell
    if not blocker_seats:
        return ManeuverScript(entry, (), (), (), ())
    path = seat.path
    index = {cell: j for j, cell in enumerate(path)}
    order = sorted(blocker_seats, key=lambda b: index[b.cell])
    n_b = len(order)
    parks, spare = _parks_beside(grid, entry, n_b, door.cell[0])
    locked = (entry,) + parks + ((spare,) if spare is not None else ())
    egress = []
    returns = []
    for k, b in enumerate(order):
        j = index[b.cell]
        out = [path[jj] for jj in range(j - 1, -1, -1)] + [entry]
        out += list(parks[: n_b - k])
        egress.append((b.id, tuple(out)))
        back = [c for c in reversed(parks[: n_b - 1 - k])] + [entry]
        back += [path[jj] for jj in range(j + 1)]
        returns.append((b.id, tuple(back)))
    return ManeuverScript(entry, parks, locked, tuple(egress), tuple(returns))


def _parks_beside(grid, entry, n_b, door_x):
    """Aisle cells flanking the row entry for evicted blockers to wait on.

    Prefers the side away from the door so the incoming flow is not walked
    against. The spare cell (locked but never stood on) pads the locked
    stretch to three cells when a single blocker leaves room for it.
    """
    ex, ey = entry
    pref = 1 if ex >= door_x else -1
    for d in (pref, -pref):
        cells = []
        for k in range(1, n_b + 1):
            x = ex + d * k
            if 0 <= x < grid.n_H and grid.cells[ey][x] is CellKind.AISLE:
                cells.append((x, ey))
            else:
                cells = None
                break
        if cells is not None:
            spare = None
            if n_b == 1:
                x = ex + d * (n_b + 1)
                if 0 <= x < grid.n_H and grid.cells[ey][x] is CellKind.AISLE:
                    spare = (x, ey)
            return tuple(cells), spare
    raise DeadlockError(
        f"no room beside {entry} to park {n_b} displaced passenger(s)"
    )


@dataclass
class SimConfig:
    """Everything that defines a run, seed included.

    ``lf`` scales crowd size: n_pax = round(lf * seat count). ``t_lug`` is
    a preset name ("A" all trolleys, "B" small economy bags) or constant
    seconds. ``doors`` restricts which door ids are active (None = all).
    ``t_walk`` fixes the per-cell corridor time instead of sampling it.
    ``equipment_delay`` holds deboarding exits shut while stairs arrive.
    """

    grid: object
    lf: float = 1.0
    interference: float = 0.25
    doors: tuple = None
    t_lug: object = "A"
    direction: str = "board"
    strategy: BoardingStrategy = BoardingStrategy.RANDOM
    seed: int = 0
    tick: float = DEFAULT_TICK_S
    equipment_delay: float = EQUIPMENT_DELAY_S
    zone_count: int = 4
    user_order: tuple = None
    door_assignment: str = "balanced"
    t_walk: float = None
    max_ticks: int = 1_000_000

    def __post_init__(self):
        if self.direction not in ("board", "deboard"):
            raise ValidationError(f"direction must be board/deboard, not {self.direction!r}")
        if isinstance(self.strategy, str):
            try:
                self.strategy = BoardingStrategy(self.strategy)
            except ValueError:
                raise ValidationError(f"unknown strategy {self.strategy!r}") from None
        if not 0.0 <= self.interference <= 1.0:
            raise ValidationError(f"interference factor {self.interference} outside [0, 1]")
        pax_count(len(self.grid.seats), self.lf)  # raises on an empty crowd
        if isinstance(self.t_lug, str):
            if self.t_lug not in PRESETS:
                raise ValidationError(f"unknown luggage preset {self.t_lug!r}")
        elif self.t_lug < 0:
            raise ValidationError("constant luggage time must be >= 0")
        if self.door_assignment not in ("balanced", "nearest"):
            raise ValidationError(f"unknown door assignment {self.door_assignment!r}")
        if self.doors is not None:
            self.doors = tuple(self.doors)
            unknown = [d for d in self.doors if d not in self.grid.door_by_id]
            if unknown or not self.doors:
                raise ValidationError(f"bad door selection {self.doors}")
        if self.t_walk is not None and self.t_walk <= 0:
            raise ValidationError("constant walk time must be > 0")
        if self.tick <= 0:
            raise ValidationError("tick must be > 0 seconds")
        if self.equipment_delay < 0:
            raise ValidationError("equipment delay must be >= 0 seconds")

    @property
    def n_pax(self):
        return pax_count(len(self.grid.seats), self.lf)

    def active_doors(self):
        if self.doors is None:
            return list(self.grid.doors)
        return [self.grid.door_by_id[d] for d in self.doors]


@dataclass(frozen=True)
class SimResult:
    """Outcome of one run.

    ``events`` lists every state transition as (tick, passenger, state,
    x, y), with (-1, -1) when off-grid. ``final_occupancy`` is the cell
    grid at completion coded wall -1, free seat 1, free aisle 0, occupied
    aisle -2, occupied seat -3, door -5.
    """

    direction: str
    n_pax: int
    seed: int
    tick: float
    elapsed_ticks: int
    completion_ticks: tuple
    si_events: int
    if_blocks: int
    events: tuple
    final_occupancy: tuple

    @property
    def elapsed_s(self):
        return self.elapsed_ticks * self.tick


class Passenger:
    """Runtime agent: one seat, one door, sampled times, FSM bookkeeping."""

    __slots__ = (
        "index", "seat", "door", "t_lug_s", "t_h_s", "walk_h", "walk_v",
        "store_ticks", "state", "phase", "pos", "last_pos", "ready",
        "last_eval", "wait_token", "route", "route_pos", "gate_cache",
        "store_serial", "si", "done_tick", "entered_tick", "waypoints", "wp",
    )

    def __init__(self, index, seat, door, t_lug_s, t_h_s):
        self.index = index
        self.seat = seat
        self.door = door
        self.t_lug_s = t_lug_s
        self.t_h_s = t_h_s
        self.walk_h = 1
        self.walk_v = 1
        self.store_ticks = 0
        self.state = PaxState.QUEUED
        self.phase = _QUEUE
        self.pos = None
        self.last_pos = None
        self.ready = 0
        self.last_eval = -1
        self.wait_token = 0
        self.route = None
        self.route_pos = 0
        self.gate_cache = {}
        self.store_serial = 0
        self.si = None
        self.done_tick = None
        self.entered_tick = None
        self.waypoints = None  # walk targets, last one is the destination
        self.wp = 0


class _Interference:
    """One live seat-interference episode: evict, enter, re-seat."""

    __slots__ = ("enterer", "blockers", "parks", "cells", "returns",
                 "stage", "parked", "reseated")

    def __init__(self, enterer, blockers, parks, cells, returns):
        self.enterer = enterer
        self.blockers = blockers  # pax indices, aisle-most first
        self.parks = parks
        self.cells = cells  # what we actually locked
        self.returns = returns  # routes back in, same order as blockers
        self.stage = "out"
        self.parked = 0
        self.reseated = 0


def _assign_doors(seats, doors, mode):
    """Map each passenger to a door; balanced mode keeps per-door counts even."""
    n = len(seats)
    if len(doors) == 1:
        return [doors[0]] * n
    dists = []
    for seat in seats:
        ex, ey = seat.row_entry_cell
        row = sorted(
            ((abs(ex - d.cell[0]) + abs(ey - d.cell[1]), d.id, d) for d in doors)
        )
        dists.append(row)
    if mode == "nearest":
        return [row[0][2] for row in dists]
    quota = {d.id: n // len(doors) for d in doors}
    for d in sorted(doors, key=lambda d: d.id)[: n % len(doors)]:
        quota[d.id] += 1
    # place the most door-committed passengers first
    order = sorted(range(n), key=lambda i: dists[i][0][0] - dists[i][1][0])
    chosen = [None] * n
    for i in order:
        for _, did, door in dists[i]:
            if quota[did] > 0:
                quota[did] -= 1
                chosen[i] = door
                break
    return chosen


class Simulation:
    """One seeded run over a cabin grid; see run()."""

    def __init__(self, config, seed=None, scheduler="agenda", move_listener=None):
        if scheduler not in ("agenda", "naive"):
            raise ValidationError(f"unknown scheduler {scheduler!r}")
        self.cfg = config
        self.grid = config.grid
        self.seed = config.seed if seed is None else seed
        self.lazy = scheduler == "agenda"
        self.listener = move_listener
        self.boarding = config.direction == "board"
        self.si_count = 0
        self.if_blocks = 0
        self.events = []
        self._setup()

    # ------------------------------------------------------------- setup

    def _setup(self):
        cfg, grid = self.cfg, self.grid
        tick = cfg.tick
        self.t_door = math.ceil(T_DOOR_S / tick)
        self.t_seat = math.ceil(T_SEAT_S / tick)
        self.t_turn = math.ceil(T_TURN_S / tick)
        self.door_delay = math.ceil(cfg.equipment_delay / tick)

        seats = assign_seats(grid, cfg.lf, assignment_stream(self.seed))
        active = cfg.active_doors()
        doors = _assign_doors(seats, active, cfg.door_assignment)

        # vertical runs of aisle cells: the lanes a stowing passenger blocks
        self.run_of = {}
        self.run_narrow = []
        self.run_rows = []
        for x in range(grid.n_H):
            y = 0
            while y < grid.n_V:
                if grid.cells[y][x] is CellKind.AISLE:
                    y0 = y
                    while y < grid.n_V and grid.cells[y][x] is CellKind.AISLE:
                        y += 1
                    rid = len(self.run_narrow)
                    self.run_narrow.append(y - y0 == 1)
                    self.run_rows.append(range(y0, y))
                    for yy in range(y0, y):
                        self.run_of[(x, yy)] = rid
                else:
                    y += 1
        self.storers = [dict() for _ in self.run_narrow]

        const_lug = None if isinstance(cfg.t_lug, str) else float(cfg.t_lug)
        lug_params = PRESETS[cfg.t_lug] if const_lug is None else None
        walk_params = PRESETS["walk"]
        gamma = grid.gamma
        self.pax = []
        for i, seat in enumerate(seats):
            rng = pax_stream(self.seed, i)
            tlug = const_lug if const_lug is not None else sample_weibull(rng, lug_params)
            th = cfg.t_walk if cfg.t_walk is not None else sample_weibull(rng, walk_params)
            p = Passenger(i, seat, doors[i], tlug, th)
            p.walk_h = math.ceil(th / tick)
            p.walk_v = math.ceil(th / (tick * gamma))
            p.store_ticks = math.ceil(tlug / tick)
            p.waypoints = self._plan(p)
            self.pax.append(p)

        self.occupied = {}
        self.locks = {}
        self.waiters = {}
        self.wake_on_seat = {}
        self.heap = []
        self.finished = 0

        for door in grid.doors:
            if door not in active:
                self.locks[door.cell] = _INACTIVE_DOOR

        self.door_clear = {}
        if self.boarding:
            order = entry_order(
                cfg.strategy,
                seats,
                order_stream(self.seed),
                zone_count=cfg.zone_count,
                user_order=cfg.user_order,
            )
            self.queues = {d.id: [] for d in active}
            for i in order:
                self.queues[doors[i].id].append(i)
            self.queue_pos = {d.id: 0 for d in active}
            for i, _ in enumerate(self.pax):
                self.events.append((0, i, PaxState.QUEUED, -1, -1))
            for q in self.queues.values():
                if q:
                    heapq.heappush(self.heap, (0, q[0]))
        else:
            for p in self.pax:
                p.state = PaxState.SEATED
                p.pos = p.seat.cell
                self.occupied[p.seat.cell] = p.index
                p.phase = _RISE
                p.route = list(reversed(p.seat.path))[1:] + [p.seat.row_entry_cell]
                self.events.append((0, p.index, PaxState.SEATED, p.pos[0], p.pos[1]))
                heapq.heappush(self.heap, (0, p.index))
            for d in active:
                self.locks[d.cell] = _DOORS_CLOSED
            heapq.heappush(self.heap, (self.door_delay, -1))

    def _plan(self, p):
        """Walk targets for the aisle phase.

        Multi-aisle cabins need routing decisions the per-step law cannot
        make: which aisle band to take and, in a two-lane band, which lane.
        Traffic keeps to the lane nearest its own heading -- walking toward
        higher columns rides the southern lane of the band, toward lower
        columns the northern one -- so flows bound for different doors pass
        each other instead of meeting head on. The plan is: down the door's
        column to the riding lane, along it, then the destination itself.
        Intermediate points that fall on non-aisle cells are dropped, which
        collapses the plan to the bare destination on corridor grids.
        """
        entry = p.seat.row_entry_cell
        door = p.door.cell
        rows = self.run_rows[self.run_of[entry]]
        if self.boarding:
            ride = max(rows) if entry[0] >= door[0] else min(rows)
            pts = ((door[0], ride), (entry[0], ride), entry)
        else:
            ride = max(rows) if door[0] >= entry[0] else min(rows)
            pts = ((entry[0], ride), (door[0], ride), door)
        plan = []
        for c in pts[:-1]:
            if self.grid.cells[c[1]][c[0]] is CellKind.AISLE and (not plan or plan[-1] != c):
                plan.append(c)
        if plan and plan[-1] == pts[-1]:
            plan.pop()
        plan.append(pts[-1])
        return tuple(plan)

    # ----------------------------------------------------------- helpers

    def _set_state(self, p, state, tick):
        p.state = state
        x, y = p.pos if p.pos is not None else (-1, -1)
        self.events.append((tick, p.index, state, x, y))

    def _move_cost(self, p, src, dst):
        # sidling into or out of a seat row happens at seat speed; the
        # slow exit hop is what keeps the aisle cell busy while a rising
        # passenger squeezes out of the row
        if self.grid.cells[dst[1]][dst[0]] is CellKind.SEAT or \
                self.grid.cells[src[1]][src[0]] is CellKind.SEAT:
            return self.t_seat
        return p.walk_v if src[0] == dst[0] else p.walk_h

    def _register(self, p, cells):
        if not self.lazy:
            return
        tok = p.wait_token
        for c in cells:
            self.waiters.setdefault(c, []).append((tok, p.index))

    def _wake_cell(self, cell, tick, mover):
        pending = self.waiters.pop(cell, None)
        if not pending:
            return
        for tok, i in pending:
            p = self.pax[i]
            if p.wait_token == tok and p.phase != _DONE:
                heapq.heappush(self.heap, (tick if i > mover else tick + 1, i))

    def _wake_pax(self, i, tick, mover):
        heapq.heappush(self.heap, (tick if i > mover else tick + 1, i))

    def _move(self, p, dst, tick):
        """Execute a hop and return its cost in ticks."""
        src = p.pos
        if src is not None:
            del self.occupied[src]
        self.occupied[dst] = p.index
        p.pos = dst
        p.last_pos = src
        if self.listener is not None:
            self.listener(tick, p.index, src, dst)
        if src is not None:
            self._wake_cell(src, tick, p.index)
            return self._move_cost(p, src, dst)
        return 0

    def _gate_pass(self, p, cell, tick):
        """Squeeze-past decision against every active stower in the cell's lane run."""
        rid = self.run_of.get(cell)
        if rid is None:
            return True
        active = self.storers[rid]
        if not active:
            return True
        ok = True
        iff = self.cfg.interference
        for s_idx in active:
            s = self.pax[s_idx]
            key = (s_idx, s.store_serial)
            res = p.gate_cache.get(key)
            if res is None:
                if iff <= 0.0:
                    res = True
                elif iff >= 1.0:
                    res = False
                else:
                    res = _event_roll(self.seed, p.index, s_idx, s.store_serial) < 1.0 - iff
                p.gate_cache[key] = res
                if not res:
                    self.if_blocks += 1
            if not res:
                ok = False
                if self.lazy:
                    wake = s.ready if p.index > s_idx else s.ready + 1
                    heapq.heappush(self.heap, (wake, p.index))
        return ok

    def _snapshot(self, tick):
        return {
            "tick": tick,
            "passengers": {
                p.index: {"state": p.state, "pos": p.pos, "seat": p.seat.id}
                for p in self.pax
                if p.phase != _DONE
            },
        }

    def _final_occupancy(self):
        rows = []
        for y in range(self.grid.n_V):
            row = []
            for x in range(self.grid.n_H):
                kind = self.grid.cells[y][x]
                taken = (x, y) in self.occupied
                if kind is CellKind.WALL:
                    row.append(WALL_CODE)
                elif kind is CellKind.SEAT:
                    row.append(SEAT_TAKEN_CODE if taken else SEAT_FREE_CODE)
                elif kind is CellKind.DOOR:
                    row.append(AISLE_TAKEN_CODE if taken else DOOR_CODE)
                else:
                    row.append(AISLE_TAKEN_CODE if taken else AISLE_FREE_CODE)
            rows.append(tuple(row))
        return tuple(rows)

    # ------------------------------------------------------ walking step

    def _walk_step(self, p, tick):
        """Pick the admissible neighbour, registering wakes on blockers.

        Returns the chosen cell or None to stay put. Same choice rule as
        next_step(), plus occupancy, maneuver locks, and squeeze gates. A
        squeeze-gate refusal pins the passenger in place (the parallel
        lane leads past the same stower), waking when the stower is done.
        """
        px, py = p.pos
        while p.wp < len(p.waypoints) - 1 and p.pos == p.waypoints[p.wp]:
            p.wp += 1
        tx, ty = p.waypoints[p.wp]
        base = abs(px - tx)
        cur = base + abs(py - ty)
        best = None
        best_d = None
        blocked = None
        gated = False
        for dx, dy in CANDIDATE_STEPS:
            nx, ny = px + dx, py + dy
            if not (0 <= nx < self.grid.n_H and 0 <= ny < self.grid.n_V):
                continue
            kind = self.grid.cells[ny][nx]
            if kind is not CellKind.AISLE and kind is not CellKind.DOOR:
                continue
            if abs(nx - tx) > base:
                continue
            cell = (nx, ny)
            if cell in self.occupied:
                blocked = [cell] if blocked is None else blocked + [cell]
                continue
            lock = self.locks.get(cell)
            if lock is not None and lock is not p.si:
                blocked = [cell] if blocked is None else blocked + [cell]
                continue
            if dx != 0 and not self._gate_pass(p, cell, tick):
                gated = True
                continue
            d = abs(nx - tx) + abs(ny - ty)
            if best_d is None or d < best_d:
                best, best_d = cell, d
        if best is not None:
            if best_d < cur or (
                best_d == cur + 1 and base > 0 and not gated
                and best != p.last_pos
                and abs(best[1] - ty) <= 1
                and _lane_continues(self.grid, px + (1 if tx > px else -1), best[1])
            ):
                return best
        if base == 0 and abs(py - ty) == 1:
            # head-on interlock: the one cell we need holds a walker that
            # needs ours. Step aside (even backward) so it can pass. When
            # every aside cell is taken too, watch them all: the interlock
            # outlives any single wake, so the next free neighbour must
            # re-trigger this evaluation.
            occ = self.occupied.get((tx, ty))
            if occ is not None:
                q = self.pax[occ]
                if q.phase == _AISLE or q.phase == _OUT:
                    tq = q.waypoints[q.wp]
                    if tq[0] == px and abs(py - tq[1]) < abs(ty - tq[1]):
                        for dx, dy in CANDIDATE_STEPS:
                            nx, ny = px + dx, py + dy
                            if not (0 <= nx < self.grid.n_H and 0 <= ny < self.grid.n_V):
                                continue
                            kind = self.grid.cells[ny][nx]
                            if kind is not CellKind.AISLE and kind is not CellKind.DOOR:
                                continue
                            cell = (nx, ny)
                            if cell not in self.occupied and cell not in self.locks:
                                return cell
                            if cell != (tx, ty):
                                blocked = [cell] if blocked is None else blocked + [cell]
        if blocked:
            # the rotation and yield probes run only on the arrival
            # evaluation (the one both schedulers perform at the same
            # tick) so that lazy and per-tick runs stay step-for-step
            # identical
            if tick == p.ready:
                if self._try_rotate(p, tick):
                    return None
                aside = self._yield_step(p, tick)
                if aside is not None:
                    return aside
            self._register(p, blocked)
        return None

    def _yield_step(self, p, tick):
        """Anywhere-free step when a finishing walker needs this very cell.

        A walker whose journey ends on our cell has no other cell it can
        ever use, and if we in turn are waiting on it (or on cells only it
        can free) no rotation applies: the ring passes through a row. The
        only crowd-like resolution is for us to step out of the doorway,
        whichever free neighbour that takes, and re-approach after.
        """
        px, py = p.pos
        for dx, dy in CANDIDATE_STEPS:
            occ = self.occupied.get((px + dx, py + dy))
            if occ is None:
                continue
            q = self.pax[occ]
            if (q.phase == _AISLE or q.phase == _OUT) \
                    and q.wp == len(q.waypoints) - 1 \
                    and q.waypoints[-1] == p.pos:
                break
        else:
            return None
        tx, ty = p.waypoints[p.wp]
        best = None
        best_d = None
        for dx, dy in CANDIDATE_STEPS:
            nx, ny = px + dx, py + dy
            if not (0 <= nx < self.grid.n_H and 0 <= ny < self.grid.n_V):
                continue
            kind = self.grid.cells[ny][nx]
            if kind is not CellKind.AISLE and kind is not CellKind.DOOR:
                continue
            cell = (nx, ny)
            if cell in self.occupied or cell in self.locks:
                continue
            if dx != 0 and not self._gate_pass(p, cell, tick):
                continue
            d = abs(nx - tx) + abs(ny - ty)
            if best_d is None or d < best_d:
                best, best_d = cell, d
        return best

    def _wanted(self, q, tick):
        """The occupied cell blocking q's best move, or None.

        None means q is not a candidate for a gridlock rotation: it is mid
        stride, not in a walking phase, has a free improving cell (it will
        move by itself), or the cell it needs is a journey's final cell
        whose entry is conditional (a row needing an interference
        manoeuvre first), which a rotation must not bypass.
        """
        if q.ready > tick or q.phase != _AISLE and q.phase != _OUT:
            return None
        px, py = q.pos
        while q.wp < len(q.waypoints) - 1 and q.pos == q.waypoints[q.wp]:
            q.wp += 1
        tx, ty = q.waypoints[q.wp]
        base = abs(px - tx)
        cur = base + abs(py - ty)
        want = None
        want_d = None
        for dx, dy in CANDIDATE_STEPS:
            nx, ny = px + dx, py + dy
            if not (0 <= nx < self.grid.n_H and 0 <= ny < self.grid.n_V):
                continue
            kind = self.grid.cells[ny][nx]
            if kind is not CellKind.AISLE and kind is not CellKind.DOOR:
                continue
            if abs(nx - tx) > base:
                continue
            d = abs(nx - tx) + abs(ny - ty)
            if d >= cur:
                continue
            cell = (nx, ny)
            if cell in self.occupied:
                if cell == q.waypoints[-1] and q.wp == len(q.waypoints) - 1:
                    # the journey's final cell: a rotation may finish the
                    # journey only when arrival is unconditional (a clean
                    # row entry or the exit door), never when entering
                    # would trigger an interference manoeuvre
                    if self.boarding:
                        if cell != q.seat.row_entry_cell or \
                                self.locks.get(cell) is not None:
                            continue
                        blockers, hold = self._si_scan(q)
                        if blockers or hold is not None:
                            continue
                    elif cell != q.door.cell:
                        continue
                if dx != 0 and not self._gate_pass(q, cell, tick):
                    continue
                if want_d is None or d < want_d:
                    want, want_d = cell, d
                continue
            lock = self.locks.get(cell)
            if lock is not None and lock is not q.si:
                continue
            if dx != 0 and not self._gate_pass(q, cell, tick):
                continue
            return None
        return want

    def _try_rotate(self, p, tick):
        """Break a gridlock ring: mutually blocked walkers shuffle one step.

        Opposing flows in a packed cabin can close a cycle in which each
        walker's next cell is held by the next walker round the ring, a
        state no pairwise courtesy can untangle. Real crowds resolve it by
        everybody sliding along at once, so when the chain of needed cells
        loops back on itself every passenger on the loop takes its step
        simultaneously. Steps on the loop are ordinary improving steps, so
        total remaining distance strictly drops and the shuffle cannot
        recur forever. Returns True when p itself was moved.
        """
        want = self._wanted(p, tick)
        if want is None:
            return False
        chain = [p]
        wants = [want]
        at = {p.pos: 0}
        cur = want
        for _ in range(12):
            j = at.get(cur)
            if j is not None:
                members = chain[j:]
                moves = wants[j:]
                break
            q = self.pax[self.occupied[cur]]
            w = self._wanted(q, tick)
            if w is None:
                return False
            at[cur] = len(chain)
            chain.append(q)
            wants.append(w)
            cur = w
        else:
            return False
        for q in members:
            del self.occupied[q.pos]
        for q, w in zip(members, moves):
            src = q.pos
            arriving = q.wp == len(q.waypoints) - 1
            self.occupied[w] = q.index
            q.pos = w
            q.last_pos = src
            if self.listener is not None:
                self.listener(tick, q.index, src, w)
            leaving_door = False
            if q.state == PaxState.AT_DOOR:
                self._set_state(q, PaxState.WALKING, tick)
                leaving_door = self.boarding
            cost = self._move_cost(q, src, w)
            if leaving_door:
                self.door_clear[src] = q.ready + cost + q.walk_v
            q.ready = tick + cost
            while q.wp < len(q.waypoints) - 1 and q.pos == q.waypoints[q.wp]:
                q.wp += 1
            if self.boarding and arriving and w == q.seat.row_entry_cell:
                q.phase = _STORE_ARM
            elif not self.boarding and w == q.door.cell:
                q.phase = _EXIT_ARM
            heapq.heappush(self.heap, (q.ready, q.index))
        return members[0] is p

    # --------------------------------------------------- state handlers

    def _eval(self, p, tick):
        phase = p.phase
        if phase == _QUEUE:
            self._try_enter(p, tick)
        elif phase == _AISLE:
            self._aisle_step(p, tick)
        elif phase == _STORE_ARM:
            self._start_store(p, tick)
        elif phase == _STORE:
            self._finish_store(p, tick)
        elif phase == _ROW:
            self._scripted_step(p, tick)
        elif phase == _SI_WAIT:
            self._si_actor_step(p, tick)
        elif phase in (_SI_OUT, _SI_BACK):
            self._scripted_step(p, tick)
        elif phase == _RISE:
            if p.state == PaxState.SEATED:
                self._set_state(p, PaxState.STANDING, tick)
            self._scripted_step(p, tick)
        elif phase == _RETRIEVE:
            self._finish_retrieve(p, tick)
        elif phase == _OUT:
            self._aisle_step(p, tick)
        elif phase == _EXIT_ARM:
            self._exit(p, tick)

    def _try_enter(self, p, tick):
        queue = self.queues[p.door.id]
        pos = self.queue_pos[p.door.id]
        if pos >= len(queue) or queue[pos] != p.index:
            return
        cell = p.door.cell
        if cell in self.occupied or cell in self.locks:
            self._register(p, [cell])
            return
        clear = self.door_clear.get(cell, 0)
        if tick < clear:
            # the previous passenger is still crossing the vestibule: the
            # doorway is single file, so the next one waits it out
            heapq.heappush(self.heap, (clear, p.index))
            return
        self.queue_pos[p.door.id] = pos + 1
        self._move(p, cell, tick)
        self._set_state(p, PaxState.AT_DOOR, tick)
        p.phase = _AISLE
        p.entered_tick = tick
        p.ready = tick + self.t_door
        heapq.heappush(self.heap, (p.ready, p.index))
        if pos + 1 < len(queue):
            self._wake_pax(queue[pos + 1], tick, p.index)

    def _aisle_step(self, p, tick):
        if self.boarding and p.pos == p.waypoints[-1] \
                and p.pos == p.seat.row_entry_cell:
            # congestion sidesteps can drop a passenger straight onto its
            # own row entry while its plan still routes the long way
            # round; if the row is clear there is nothing left to walk
            blockers, hold = self._si_scan(p)
            if not blockers and hold is None:
                p.wp = len(p.waypoints) - 1
                self._start_store(p, tick)
                return
        dest = self._walk_step(p, tick)
        if dest is None:
            return
        leaving_door = False
        if p.state == PaxState.AT_DOOR:
            self._set_state(p, PaxState.WALKING, tick)
            leaving_door = self.boarding
        # the row entry only counts as arrival on the last route leg; a
        # passenger sent past its own row crosses the entry as plain aisle
        arriving = p.wp == len(p.waypoints) - 1
        if self.boarding and arriving and dest == p.seat.row_entry_cell:
            res = self._si_check(p, tick)
            if res == "si":
                return
            if res == "redirect":
                dest = self._walk_step(p, tick)
                if dest is None:
                    return
                arriving = False
        src = p.pos
        cost = self._move(p, dest, tick)
        if leaving_door:
            # the doorway is single file past the galley: it reopens once
            # this passenger has had time to cross the next cell over too.
            # The clock runs from the doorway dwell itself (p.ready still
            # holds entry + door time here), so when congestion delays the
            # step-off past that, cell occupancy alone governs and the
            # allowance never stacks on top of a jam wait.
            self.door_clear[src] = p.ready + cost + p.walk_v
        p.ready = tick + cost
        while p.wp < len(p.waypoints) - 1 and p.pos == p.waypoints[p.wp]:
            p.wp += 1
        if self.boarding and arriving and dest == p.seat.row_entry_cell:
            p.phase = _STORE_ARM
        elif not self.boarding and dest == p.door.cell:
            p.phase = _EXIT_ARM
        heapq.heappush(self.heap, (p.ready, p.index))

    def _si_scan(self, p):
        """Who stands between p and its seat: (seated blockers, walking hold)."""
        path = p.seat.path
        blockers = []
        hold = None
        for cell in path[:-1]:
            occ = self.occupied.get(cell)
            if occ is None:
                continue
            q = self.pax[occ]
            if q.state == PaxState.SEATED:
                blockers.append(occ)
            elif q.seat.depth < p.seat.depth and q.seat.path[0] == path[0]:
                hold = occ  # shallower neighbour still walking its row
        return blockers, hold

    def _si_check(self, p, tick):
        """About to take the row entry: evict seated blockers first if any."""
        blockers, hold = self._si_scan(p)
        if hold is not None:
            if self.lazy:
                self.wake_on_seat.setdefault(hold, []).append((p.wait_token, p.index))
            return "si"
        if not blockers:
            return "go"
        try:
            script = resolve_seat_interference(
                self.grid, p.seat, [self.pax[b].seat for b in blockers], p.door
            )
        except DeadlockError as exc:
            raise DeadlockError(str(exc), snapshot=self._snapshot(tick)) from None
        entry = script.entry_cell
        for c in (entry,) + script.parks:
            if c == p.pos:
                # the dance needs the cell we stand on: walk past the row
                # and come back in from the far side, leaving this side of
                # the aisle free for the displaced to park on
                bx = 2 * entry[0] - p.pos[0]
                if 0 <= bx < self.grid.n_H and \
                        self.grid.cells[entry[1]][bx] is CellKind.AISLE:
                    p.waypoints = ((bx, entry[1]), entry)
                    p.wp = 0
                    return "redirect"
                raise DeadlockError(
                    f"interference at {entry} needs the enterer's own cell",
                    snapshot=self._snapshot(tick),
                )
            if c in self.occupied or c in self.locks:
                self._register(p, [c])
                return "si"
        cells = [c for c in script.locked_cells if c not in self.locks]
        ev = _Interference(p.index, blockers, script.parks, cells,
                           [route for _, route in script.returns])
        for c in cells:
            self.locks[c] = ev
        self.si_count += 1
        p.si = ev
        p.phase = _SI_WAIT
        self._set_state(p, PaxState.INTERFERENCE_ACTOR, tick)
        for b_idx, (_, route) in zip(blockers, script.egress):
            b = self.pax[b_idx]
            b.si = ev
            self._set_state(b, PaxState.INTERFERENCE_DISPLACED, tick)
            b.phase = _SI_OUT
            b.route = list(route)
            b.route_pos = 0
            b.ready = tick
            self.finished -= 1  # they were seated; they will be again
            self._wake_pax(b_idx, tick, p.index)
        return "si"

    def _si_actor_step(self, p, tick):
        ev = p.si
        if ev.stage != "enter":
            return  # blockers still on their way out; stale wake
        entry = p.seat.row_entry_cell
        if entry in self.occupied:
            self._register(p, [entry])
            return
        cost = self._move(p, entry, tick)
        p.ready = tick + cost
        p.phase = _STORE_ARM
        heapq.heappush(self.heap, (p.ready, p.index))

    def _start_store(self, p, tick):
        if p.store_ticks > 0:
            self._set_state(p, PaxState.STORING, tick)
            p.phase = _STORE
            p.store_serial += 1
            rid = self.run_of.get(p.pos)
            if rid is not None:
                self.storers[rid][p.index] = None
            p.ready = tick + p.store_ticks
            heapq.heappush(self.heap, (p.ready, p.index))
        else:
            self._begin_row(p, tick)

    def _finish_store(self, p, tick):
        rid = self.run_of.get(p.pos)
        if rid is not None:
            self.storers[rid].pop(p.index, None)
        self._begin_row(p, tick)

    def _begin_row(self, p, tick):
        # turning off the aisle is a manoeuvre of its own: the passenger
        # keeps standing on the row-entry cell while squeezing in
        self._set_state(p, PaxState.WALKING, tick)
        p.phase = _ROW
        p.route = list(p.seat.path)
        p.route_pos = 0
        p.ready = tick + self.t_turn
        heapq.heappush(self.heap, (p.ready, p.index))

    def _scripted_step(self, p, tick):
        dest = p.route[p.route_pos]
        if dest in self.occupied:
            self._register(p, [dest])
            return
        lock = self.locks.get(dest)
        if lock is not None and lock is not p.si:
            self._register(p, [dest])
            return
        leaving_entry = p.phase == _ROW and p.route_pos == 0 and p.si is not None
        cost = self._move(p, dest, tick)
        p.route_pos += 1
        p.ready = tick + cost
        if leaving_entry and p.si.stage == "enter":
            self._si_release_blockers(p, tick)
        if p.route_pos >= len(p.route):
            self._script_done(p, tick)
        else:
            heapq.heappush(self.heap, (p.ready, p.index))

    def _script_done(self, p, tick):
        if p.phase == _ROW:
            self._seat(p, tick)
        elif p.phase == _SI_OUT:
            p.phase = _SI_PARKED
            ev = p.si
            ev.parked += 1
            if ev.parked == len(ev.blockers):
                ev.stage = "enter"
                self._wake_pax(ev.enterer, tick, p.index)
        elif p.phase == _SI_BACK:
            ev = p.si
            self._seat(p, tick)
            ev.reseated += 1
            if ev.reseated == len(ev.blockers):
                self._close_si(ev, tick, p.index)
        elif p.phase == _RISE:
            self._arrive_row_entry(p, tick)

    def _seat(self, p, tick):
        self._set_state(p, PaxState.SEATED, tick)
        p.phase = _DONE
        p.done_tick = tick
        p.si = None
        self.finished += 1
        for tok, i in self.wake_on_seat.pop(p.index, ()):
            q = self.pax[i]
            if q.wait_token == tok and q.phase != _DONE:
                self._wake_pax(i, tick, p.index)

    def _close_si(self, ev, tick, mover):
        for c in ev.cells:
            if self.locks.get(c) is ev:
                del self.locks[c]
        enterer = self.pax[ev.enterer]
        if enterer.si is ev:
            enterer.si = None
        for c in ev.cells:
            self._wake_cell(c, tick, mover)

    def _si_release_blockers(self, p, tick):
        ev = p.si
        ev.stage = "back"
        for b_idx, route in zip(ev.blockers, ev.returns):
            b = self.pax[b_idx]
            b.route = list(route)
            b.route_pos = 0
            b.phase = _SI_BACK
            b.ready = tick
            self._wake_pax(b_idx, tick, p.index)

    # ------------------------------------------------------- deboarding

    def _arrive_row_entry(self, p, tick):
        narrow = self.run_narrow[self.run_of[p.pos]]
        factor = 0.5 if narrow else 1.0
        retr = math.ceil(p.t_lug_s * factor / self.cfg.tick)
        if retr > 0:
            self._set_state(p, PaxState.RETRIEVING, tick)
            p.phase = _RETRIEVE
            p.store_serial += 1
            self.storers[self.run_of[p.pos]][p.index] = None
            # the bag comes down only after the passenger has fully
            # squeezed out of the row, so the two dwells are sequential
            p.ready = p.ready + retr
            heapq.heappush(self.heap, (p.ready, p.index))
        else:
            self._set_state(p, PaxState.WALKING, tick)
            p.phase = _OUT
            heapq.heappush(self.heap, (p.ready, p.index))

    def _finish_retrieve(self, p, tick):
        self.storers[self.run_of[p.pos]].pop(p.index, None)
        self._set_state(p, PaxState.WALKING, tick)
        p.phase = _OUT
        self._aisle_step(p, tick)

    def _exit(self, p, tick):
        cell = p.pos
        self._set_state(p, PaxState.EXITED, tick)
        del self.occupied[cell]
        p.pos = None
        p.phase = _DONE
        p.done_tick = tick
        self.finished += 1
        if self.listener is not None:
            self.listener(tick, p.index, cell, None)
        self._wake_cell(cell, tick, p.index)

    # -------------------------------------------------------------- run

    def run(self):
        if self.lazy:
            self._run_agenda()
        else:
            self._run_naive()
        ticks = [p.done_tick for p in self.pax]
        if self.boarding:
            elapsed = max(ticks)
        else:
            elapsed = max(ticks) - min(ticks)
        return SimResult(
            direction=self.cfg.direction,
            n_pax=len(self.pax),
            seed=self.seed,
            tick=self.cfg.tick,
            elapsed_ticks=elapsed,
            completion_ticks=tuple(ticks),
            si_events=self.si_count,
            if_blocks=self.if_blocks,
            events=tuple(self.events),
            final_occupancy=self._final_occupancy(),
        )

    def _open_doors(self, tick):
        opened = [c for c, tag in self.locks.items() if tag is _DOORS_CLOSED]
        for c in opened:
            del self.locks[c]
            self._wake_cell(c, tick, -1)

    def _run_agenda(self):
        heap = self.heap
        n = len(self.pax)
        max_ticks = self.cfg.max_ticks
        while heap and self.finished < n:
            tick, i = heapq.heappop(heap)
            if tick > max_ticks:
                raise DeadlockError(
                    f"no progress by tick {max_ticks}", snapshot=self._snapshot(tick)
                )
            if i < 0:
                self._open_doors(tick)
                continue
            p = self.pax[i]
            if p.phase == _DONE or p.last_eval == tick or tick < p.ready:
                continue
            p.last_eval = tick
            p.wait_token += 1
            self._eval(p, tick)
        if self.finished < n:
            raise DeadlockError(
                "simulation stalled with passengers still active",
                snapshot=self._snapshot(-1),
            )

    def _run_naive(self):
        n = len(self.pax)
        tick = 0
        last_progress = 0
        while self.finished < n:
            if not self.boarding and tick == self.door_delay:
                self._open_doors(tick)
                last_progress = tick
            before = (self.finished, len(self.occupied), tuple(sorted(self.occupied)))
            for p in self.pax:
                if p.phase != _DONE and p.ready <= tick:
                    p.last_eval = tick
                    self._eval(p, tick)
            after = (self.finished, len(self.occupied), tuple(sorted(self.occupied)))
            if before != after:
                last_progress = tick
            if tick - last_progress > 10_000:
                raise DeadlockError(
                    f"no progress since tick {last_progress}",
                    snapshot=self._snapshot(tick),
                )
            if tick > self.cfg.max_ticks:
                raise DeadlockError(
                    f"no progress by tick {self.cfg.max_ticks}",
                    snapshot=self._snapshot(tick),
                )
            tick += 1


def run(config):
    """Run one simulation with the config's own seed."""
    return Simulation(config).run()


def run_sim(config, seed=None, scheduler="agenda", move_listener=None):
    """Like run(), with an optional seed override and scheduler choice."""
    return Simulation(config, seed, scheduler=scheduler, move_listener=move_listener).run()
