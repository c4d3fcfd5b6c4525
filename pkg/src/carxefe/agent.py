"""Scalar ARX agent that picks controls by minimizing one-step expected free energy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .belief import (
    NormalGammaBelief,
    log_pdf_gaussian,
    log_pdf_student_t,
    posterior_predictive,
    update,
)
from .errors import NumericalError


def _shift(buf: np.ndarray, value: float) -> None:
    buf[1:] = buf[:-1]
    buf[0] = value


@dataclass
class AgentMemory:
    """Fixed-length history buffers, most recent value first."""

    outputs: np.ndarray
    inputs: np.ndarray
    peer_outputs: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros(cls, output_len: int, input_len: int, n_peers: int = 0) -> "AgentMemory":
        if output_len < 1 or input_len < 1:
            raise ValueError("buffer lengths must be positive")
        if n_peers < 0:
            raise ValueError("n_peers must be non-negative")
        return cls(
            np.zeros(output_len),
            np.zeros(input_len),
            [np.zeros(output_len) for _ in range(n_peers)],
        )

    @property
    def output_len(self) -> int:
        return self.outputs.shape[0]

    @property
    def input_len(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        """Regressor length including the current control."""
        return 1 + self.input_len + self.output_len * (1 + len(self.peer_outputs))

    def push_output(self, y: float) -> None:
        _shift(self.outputs, y)

    def push_input(self, u: float) -> None:
        _shift(self.inputs, u)

    def push_peer(self, slot: int, y: float) -> None:
        _shift(self.peer_outputs[slot], y)


def assemble_regressor(memory: AgentMemory, u: float) -> np.ndarray:
    """``[u, inputs, outputs, peer_outputs...]``, each buffer most recent first."""
    if not math.isfinite(u):
        raise ValueError(f"control must be finite, got {u}")
    return np.concatenate([[float(u)], memory.inputs, memory.outputs, *memory.peer_outputs])


@dataclass(frozen=True)
class GoalPrior:
    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise ValueError(f"goal variance must be positive, got {self.var}")


@dataclass(frozen=True)
class ControlGrid:
    """``n`` evenly spaced controls on ``[u_min, u_max]``, endpoints included."""

    u_min: float = -1.0
    u_max: float = 1.0
    n: int = 999

    def __post_init__(self):
        if not self.u_min < self.u_max:
            raise ValueError(f"u_min ({self.u_min}) must be below u_max ({self.u_max})")
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n}")

    def points(self) -> np.ndarray:
        k = np.arange(self.n, dtype=np.float64)
        return self.u_min + k * (self.u_max - self.u_min) / (self.n - 1)


class ArxEfeAgent:
    """One input, one output. Learns an ARX model online and acts on it.

    ``observe`` mutates the agent; peer buffers in ``memory`` are written by
    the owning ensemble, never by the agent itself.
    """

    def __init__(self, belief: NormalGammaBelief, memory: AgentMemory, goal: GoalPrior,
                 eta: float = 1e-3, grid: ControlGrid | None = None):
        if belief.dim != memory.dim:
            raise ValueError(f"belief dimension {belief.dim} != regressor length {memory.dim}")
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta}")
        self.belief = belief
        self.memory = memory
        self.goal = goal
        self.eta = float(eta)
        self.grid = grid if grid is not None else ControlGrid()

    @property
    def grid(self) -> ControlGrid:
        return self._grid

    @grid.setter
    def grid(self, grid: ControlGrid):
        self._grid = grid
        self._grid_points = grid.points()

    def _require_shape_above_one(self):
        if not self.belief.shape > 1:
            raise NumericalError(f"belief shape {self.belief.shape} <= 1; EFE undefined")

    def efe(self, u: float) -> float:
        """Expected free energy of control ``u``, up to a constant independent of ``u``."""
        self._require_shape_above_one()
        b = self.belief
        x = assemble_regressor(self.memory, u)
        q = float(x @ b.solve(x))
        d = float(b.mean @ x) - self.goal.mean
        return (d * d + b.rate / (b.shape - 1.0) * (q + 1.0)) / (2.0 * self.goal.var) - 0.5 * math.log(q + 1.0)

    def select_control(self) -> tuple[float, np.ndarray]:
        """MAP control on the grid and the objective ``efe(u) + eta*u^2/2`` at every grid point."""
        self._require_shape_above_one()
        b = self.belief
        base = assemble_regressor(self.memory, 0.0)
        # x(u) = base + u*e0, so x^T P x is quadratic in u
        e0 = np.zeros(b.dim)
        e0[0] = 1.0
        sol = b.solve(np.column_stack([e0, base]))
        q2 = float(sol[0, 0])
        q1 = float(sol[0, 1])
        q0 = float(base @ sol[:, 1])
        values = np.empty_like(self._grid_points)
        idx = _backend.efe_grid(
            self._grid_points, values,
            float(b.mean @ base), float(b.mean[0]),
            q0, q1, q2,
            b.rate / (b.shape - 1.0), self.goal.mean, self.goal.var, self.eta,
        )
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite objective on the control grid")
        return float(self._grid_points[idx]), values

    def predictive(self, u: float):
        return posterior_predictive(self.belief, assemble_regressor(self.memory, u))

    def predict(self, u: float) -> tuple[float, float]:
        """Mean and standard deviation of the next output under control ``u``."""
        p = self.predictive(u)
        if p.dof <= 2:
            raise ValueError(f"predictive variance undefined for dof={p.dof}")
        return p.location, math.sqrt(p.variance)

    def surprise(self, u: float, y: float) -> float:
        """Negative log predictive density of ``y``; call before ``observe``."""
        return -log_pdf_student_t(y, self.predictive(u))

    def goal_alignment(self, y: float) -> float:
        return -log_pdf_gaussian(y, self.goal.mean, self.goal.var)

    def observe(self, u: float, y: float) -> "ArxEfeAgent":
        """Filter on ``(u, y)`` then shift own input and output buffers."""
        if not (math.isfinite(u) and math.isfinite(y)):
            raise ValueError("control and observation must be finite")
        x = assemble_regressor(self.memory, u)
        self.belief = update(self.belief, x, y)
        self.memory.push_output(y)
        self.memory.push_input(u)
        return self
