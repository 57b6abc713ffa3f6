"""Every default grid, tolerance and budget in one table."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = "1.0"
WORKERS_ENV = "EDGEINDEX_WORKERS"
SWEEP_CSV_COLUMNS = ("mu", "z", "det", "op_norm", "trace_err")


@dataclass(frozen=True)
class Grid1D:
    start: float
    stop: float
    n: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.n)
        return np.linspace(self.start, self.stop, self.n)


@dataclass(frozen=True)
class SuiteConfig:
    wronskian_nu: Grid1D = Grid1D(0.0, 20.0, 200)
    wronskian_z: Grid1D = Grid1D(1e-3, 50.0, 200, "log")
    wronskian_tol: float = 1e-10
    det_mu: Grid1D = Grid1D(0.5, 10.0, 50)
    det_z: Grid1D = Grid1D(1e-3, 100.0, 500, "log")
    det_margin: float = 1e-3
    det_route_tol: float = 1e-10
    det_spot: tuple = (0.5, 1.0, 0.007713, 1e-5)
    calderon_idempotency_tol: float = 1e-9
    calderon_trace_tol: float = 1e-10
    aps_idempotency_tol: float = 1e-13
    homotopy_mu: Grid1D = Grid1D(0.5, 10.0, 10)
    homotopy_z: Grid1D = Grid1D(1e-3, 100.0, 10, "log")
    homotopy_times: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    homotopy_endpoint_tol: float = 1e-10
    homotopy_idempotency_tol: float = 1e-8
    greens_triples: tuple = ((1.5, 1.0, 1), (0.5, 2.0, 1), (5.0, 3.0, 2))
    greens_grid: tuple = (1e-3, 10.0, 1e-3)  # start, stop, step
    greens_window: tuple = (0.1, 5.0)
    greens_tol: float = 1e-4
    calderon_sigma: tuple = (0.99, 0.999, 0.9999, 0.99999, 1 - 1e-6)
    calderon_tol: float = 1e-4
    witt_n_beta: int = 1000
    witt_n_random: int = 1000
    seed: int = 20240611
    transgression_betas: tuple = (Fraction(1, 3), Fraction(1, 2), Fraction(1))
    transgression_q: tuple = tuple(range(-5, 6))
    transgression_numeric_betas: tuple = tuple(Fraction(k, 20) for k in range(1, 21))
    transgression_tol: float = 1e-12
    index_random: int = 100
    quick: bool = False


# Wall-clock budgets, kept apart from the deterministic payload.
BUDGETS_S = {"wronskian": 5.0, "det_bound": 30.0, "greens_inverse": 60.0}

VERIFY_GREENS_DEFAULTS = {"grid_min": 1e-4, "grid_max": 20.0, "grid_n": 20000, "spacing": "geometric"}


def quick_config() -> SuiteConfig:
    """Reduced grids for smoke runs."""
    return replace(
        SuiteConfig(),
        wronskian_nu=Grid1D(0.0, 20.0, 40),
        wronskian_z=Grid1D(1e-3, 50.0, 40, "log"),
        det_mu=Grid1D(0.5, 10.0, 10),
        det_z=Grid1D(1e-3, 100.0, 100, "log"),
        homotopy_mu=Grid1D(0.5, 10.0, 4),
        homotopy_z=Grid1D(1e-3, 100.0, 5, "log"),
        greens_grid=(1e-3, 10.0, 2e-3),
        witt_n_beta=200,
        witt_n_random=100,
        transgression_numeric_betas=(Fraction(1, 4), Fraction(2, 3), Fraction(1)),
        index_random=20,
        quick=True,
    )


def resolve_workers(flag_value) -> int:
    """``EDGEINDEX_WORKERS`` wins over the command-line value; default 1."""
    raw = os.environ.get(WORKERS_ENV)
    value = raw if raw not in (None, "") else flag_value
    if value is None:
        return 1
    try:
        n = int(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"worker count must be an integer, got {value!r}") from exc
    if n < 1:
        raise ValueError("worker count must be >= 1")
    return n
