"""Grid-based boarding/deboarding simulator and turnaround-time estimator."""

from .cabin import CabinGrid, CellKind, DoorRef, SeatRef, parse_layout, serialize_layout
from .engine import (
    ManeuverScript,
    PaxState,
    SimConfig,
    SimResult,
    Simulation,
    attempt_overtake,
    next_step,
    resolve_seat_interference,
    run,
    run_sim,
)
from .errors import (
    ConnectivityError,
    CycleError,
    DeadlockError,
    DivisionError,
    ParseError,
    ValidationError,
)
from .strategies import BoardingStrategy, assign_seats, entry_order, pax_count

__version__ = "0.1.0"

__all__ = [
    "CabinGrid",
    "CellKind",
    "DoorRef",
    "SeatRef",
    "parse_layout",
    "serialize_layout",
    "BoardingStrategy",
    "assign_seats",
    "entry_order",
    "pax_count",
    "PaxState",
    "SimConfig",
    "SimResult",
    "Simulation",
    "ManeuverScript",
    "next_step",
    "attempt_overtake",
    "resolve_seat_interference",
    "run",
    "run_sim",
    "ParseError",
    "ConnectivityError",
    "ValidationError",
    "DeadlockError",
    "CycleError",
    "DivisionError",
    "__version__",
]
