"""Double mass-spring-damper with Verlet integration and noisy position sensors.

Mass 1 hangs off a fixed wall through (k1, c1); mass 2 hangs off mass 1
through (k2, c2). Each mass receives its own external force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import NumericalError


@dataclass(frozen=True)
class MsdParams:
    m1: float = 1.0
    m2: float = 1.0
    c1: float = 0.1
    c2: float = 0.1
    k1: float = 1.0
    k2: float = 1.0

    def __post_init__(self):
        if not (self.m1 > 0 and self.m2 > 0):
            raise ValueError("masses must be positive")
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError("spring stiffnesses must be positive")
        if not (self.c1 >= 0 and self.c2 >= 0):
            raise ValueError("damping coefficients must be non-negative")

    def astuple(self):
        return self.m1, self.m2, self.c1, self.c2, self.k1, self.k2


@dataclass(frozen=True)
class PlantState:
    z: tuple[float, float] = (0.0, 0.0)
    zdot: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        z = tuple(float(v) for v in self.z)
        zdot = tuple(float(v) for v in self.zdot)
        if len(z) != 2 or len(zdot) != 2:
            raise ValueError("state needs two positions and two velocities")
        if not all(math.isfinite(v) for v in z + zdot):
            raise NumericalError(f"non-finite plant state z={z}, zdot={zdot}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "zdot", zdot)


def energy(params: MsdParams, state: PlantState) -> float:
    """Kinetic plus spring potential energy."""
    (z1, z2), (v1, v2) = state.z, state.zdot
    return 0.5 * (params.m1 * v1 * v1 + params.m2 * v2 * v2
                  + params.k1 * z1 * z1 + params.k2 * (z2 - z1) ** 2)


def acceleration(params: MsdParams, state: PlantState, u) -> np.ndarray:
    (z1, z2), (v1, v2) = state.z, state.zdot
    u1, u2 = (float(v) for v in u)
    p = params
    return np.array([
        (-(p.c1 + p.c2) * v1 + p.c2 * v2 - (p.k1 + p.k2) * z1 + p.k2 * z2 + u1) / p.m1,
        (p.c2 * v1 - p.c2 * v2 + p.k2 * z1 - p.k2 * z2 + u2) / p.m2,
    ])


def advance(params: MsdParams, state: PlantState, u, dt: float, n_iter: int) -> PlantState:
    """``n_iter`` Verlet substeps of size ``dt`` with ``u`` held constant.

    The position update is the usual second-order Taylor step. Velocities use
    the velocity-Verlet average of old and new acceleration; the new
    acceleration sees a forward-Euler velocity guess, because damping makes
    it depend on the velocity being solved for.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_iter < 1:
        raise ValueError(f"n_iter must be positive, got {n_iter}")
    u1, u2 = (float(v) for v in u)
    z1, z2, v1, v2 = _backend.msd_advance(
        *params.astuple(), *state.z, *state.zdot, u1, u2, float(dt), int(n_iter)
    )
    return PlantState((z1, z2), (v1, v2))


def verlet_step(params: MsdParams, state: PlantState, u, dt: float) -> PlantState:
    return advance(params, state, u, dt, 1)


@dataclass
class Sensor:
    """Position sensor with i.i.d. Gaussian noise from its own seeded generator."""

    noise_var: float = 1e-5
    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not self.noise_var >= 0:
            raise ValueError(f"noise variance must be non-negative, got {self.noise_var}")
        self.rng = np.random.default_rng(self.seed)


def measure(state: PlantState, sensor: Sensor) -> np.ndarray:
    z = np.array(state.z)
    if sensor.noise_var == 0:
        return z
    return z + math.sqrt(sensor.noise_var) * sensor.rng.standard_normal(2)
