"""Trials, Monte Carlo repetitions and the coupled-versus-uncoupled comparison."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .agent import AgentMemory, ArxEfeAgent, ControlGrid, GoalPrior
from .belief import NormalGammaBelief
from .ensemble import CouplingTopology, Ensemble
from .errors import TrialError
from .plant import MsdParams, PlantState, Sensor, advance, measure

log = logging.getLogger(__name__)

N_AGENTS = 2


def _f(default, section, help, **kw):
    return field(default=default, metadata={"section": section, "help": help, **kw})


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a trial. Defaults give the standard two-agent setup."""

    m1: float = _f(1.0, "plant", "mass of block 1")
    m2: float = _f(1.0, "plant", "mass of block 2")
    c1: float = _f(0.1, "plant", "damping between wall and block 1")
    c2: float = _f(0.1, "plant", "damping between blocks")
    k1: float = _f(1.0, "plant", "stiffness between wall and block 1")
    k2: float = _f(1.0, "plant", "stiffness between blocks")
    dt: float = _f(0.01, "plant", "integrator substep")
    n_iter: int = _f(120, "plant", "substeps per decision step")
    noise_var: float = _f(1e-5, "plant", "measurement noise variance")
    initial_state: tuple[float, float, float, float] = _f(
        (0.0, 0.0, 0.0, 0.0), "plant", "initial z1,z2,zdot1,zdot2")

    mu0: float = _f(0.0, "agent", "prior mean, filled into every coefficient")
    lambda0: float = _f(1.0, "agent", "prior precision, multiple of the identity")
    alpha0: float = _f(2.0, "agent", "prior Gamma shape")
    beta0: float = _f(3.0, "agent", "prior Gamma rate")
    eta: float = _f(1e-3, "agent", "control prior precision")
    output_memory: int = _f(2, "agent", "length of each output buffer")
    input_memory: int = _f(2, "agent", "length of the input buffer")
    u_min: float = _f(-1.0, "agent", "lowest control on the grid")
    u_max: float = _f(1.0, "agent", "highest control on the grid")
    n_grid: int = _f(999, "agent", "number of grid controls")
    goal_means: tuple[float, float] = _f((1.0, 2.0), "agent", "goal mean per agent")
    goal_vars: tuple[float, float] = _f((1.0, 1.0), "agent", "goal variance per agent")

    coupled: bool = _f(True, "experiment", "share output buffers between agents")
    horizon: int = _f(100, "experiment", "number of decision steps")
    seed: int = _f(0, "experiment", "measurement noise seed")

    def __post_init__(self):
        positive = ("m1", "m2", "k1", "k2", "dt", "alpha0", "beta0", "eta", "lambda0")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("c1", "c2", "noise_var"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("n_iter", "output_memory", "input_memory", "horizon"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.n_grid < 2:
            raise ValueError(f"n_grid must be at least 2, got {self.n_grid}")
        if not self.u_min < self.u_max:
            raise ValueError(f"u_min must be below u_max, got [{self.u_min}, {self.u_max}]")
        if len(self.initial_state) != 4:
            raise ValueError("initial_state needs 4 entries")
        if len(self.goal_means) != N_AGENTS or len(self.goal_vars) != N_AGENTS:
            raise ValueError(f"need {N_AGENTS} goal means and variances")
        if not all(v > 0 for v in self.goal_vars):
            raise ValueError("goal variances must be positive")
        # tuples keep the config hashable and JSON round-trips give lists back
        for name in ("initial_state", "goal_means", "goal_vars"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @property
    def plant_params(self) -> MsdParams:
        return MsdParams(self.m1, self.m2, self.c1, self.c2, self.k1, self.k2)


def build_ensemble(config: ExperimentConfig) -> Ensemble:
    if config.coupled:
        topology = CouplingTopology.fully_coupled(N_AGENTS)
    else:
        topology = CouplingTopology.uncoupled(N_AGENTS)
    grid = ControlGrid(config.u_min, config.u_max, config.n_grid)
    agents = []
    for i, peers in enumerate(topology.peers):
        memory = AgentMemory.zeros(config.output_memory, config.input_memory, len(peers))
        belief = NormalGammaBelief.isotropic(
            memory.dim, config.mu0, config.lambda0, config.alpha0, config.beta0
        )
        goal = GoalPrior(config.goal_means[i], config.goal_vars[i])
        agents.append(ArxEfeAgent(belief, memory, goal, config.eta, grid))
    return Ensemble(agents, topology)


@dataclass(frozen=True)
class StepRecord:
    step: int
    controls: tuple[float, ...]
    observations: tuple[float, ...]
    pred_means: tuple[float, ...]
    pred_stds: tuple[float, ...]
    surprises: tuple[float, ...]
    goal_alignments: tuple[float, ...]


@dataclass(frozen=True)
class TrialLog:
    config: ExperimentConfig
    records: tuple[StepRecord, ...]
    final_shapes: tuple[float, ...]

    @property
    def cum_surprise(self) -> tuple[float, ...]:
        return tuple(float(sum(r.surprises[i] for r in self.records)) for i in range(N_AGENTS))

    @property
    def cum_goal_alignment(self) -> tuple[float, ...]:
        return tuple(float(sum(r.goal_alignments[i] for r in self.records)) for i in range(N_AGENTS))

    def column(self, name: str, agent: int) -> np.ndarray:
        """One per-step quantity for one agent, e.g. ``column("pred_stds", 0)``."""
        return np.array([getattr(r, name)[agent] for r in self.records])

    def summary(self) -> dict:
        return {
            "seed": self.config.seed,
            "cum_surprise": list(self.cum_surprise),
            "cum_goal_alignment": list(self.cum_goal_alignment),
            "final_shape": list(self.final_shapes),
        }


def run_trial(config: ExperimentConfig) -> TrialLog:
    """decide -> advance plant -> measure -> absorb, ``config.horizon`` times."""
    ensemble = build_ensemble(config)
    params = config.plant_params
    z1, z2, v1, v2 = config.initial_state
    state = PlantState((z1, z2), (v1, v2))
    sensor = Sensor(config.noise_var, config.seed)
    records = []
    for k in range(config.horizon):
        try:
            controls = ensemble.decide()
            state = advance(params, state, controls, config.dt, config.n_iter)
            y = measure(state, sensor)
            metrics = ensemble.absorb(controls, y)
        except (ArithmeticError, ValueError) as exc:
            raise TrialError(k, exc) from exc
        records.append(StepRecord(
            step=k,
            controls=tuple(float(u) for u in controls),
            observations=tuple(float(v) for v in y),
            pred_means=tuple(m.pred_mean for m in metrics),
            pred_stds=tuple(m.pred_std for m in metrics),
            surprises=tuple(m.surprise for m in metrics),
            goal_alignments=tuple(m.goal_alignment for m in metrics),
        ))
    return TrialLog(config, tuple(records), tuple(a.belief.shape for a in ensemble.agents))


@dataclass(frozen=True)
class MonteCarloResult:
    config: ExperimentConfig
    seeds: tuple[int, ...]
    trials: tuple[dict, ...]
    failures: tuple[tuple[int, str], ...]
    median_surprise: tuple[float, ...]
    iqr_surprise: tuple[float, ...]
    median_goal_alignment: tuple[float, ...]
    iqr_goal_alignment: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seeds": list(self.seeds),
            "n_failed": len(self.failures),
            "failures": [{"seed": s, "error": e} for s, e in self.failures],
            "median_surprise": list(self.median_surprise),
            "iqr_surprise": list(self.iqr_surprise),
            "median_goal_alignment": list(self.median_goal_alignment),
            "iqr_goal_alignment": list(self.iqr_goal_alignment),
            "trials": list(self.trials),
        }


def _trial_summary(config: ExperimentConfig):
    try:
        return run_trial(config).summary()
    except TrialError as exc:
        return str(exc)


def _median_iqr(values: np.ndarray):
    if values.shape[0] == 0:
        nan = (float("nan"),) * N_AGENTS
        return nan, nan
    q25, q50, q75 = np.percentile(values, [25, 50, 75], axis=0)
    return tuple(float(v) for v in q50), tuple(float(v) for v in q75 - q25)


def run_monte_carlo(config: ExperimentConfig, n_seeds: int, jobs: int = 1) -> MonteCarloResult:
    """Repeat ``run_trial`` for seeds ``config.seed .. config.seed + n_seeds - 1``.

    Failed trials are dropped from the medians and listed in ``failures``.
    """
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be at least 1, got {n_seeds}")
    configs = [config.replace(seed=config.seed + i) for i in range(n_seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_trial_summary, configs))
    else:
        outcomes = [_trial_summary(c) for c in configs]
    return aggregate(config, [c.seed for c in configs], outcomes)


def aggregate(config: ExperimentConfig, seeds, outcomes) -> MonteCarloResult:
    """Reduce per-seed outcomes (summary dicts, or error strings for failures)."""
    trials, failures = [], []
    for seed, out in zip(seeds, outcomes):
        if isinstance(out, str):
            log.warning("seed %d failed: %s", seed, out)
            failures.append((seed, out))
        else:
            trials.append(out)
    surprise = np.array([t["cum_surprise"] for t in trials]).reshape(-1, N_AGENTS)
    goal = np.array([t["cum_goal_alignment"] for t in trials]).reshape(-1, N_AGENTS)
    med_s, iqr_s = _median_iqr(surprise)
    med_g, iqr_g = _median_iqr(goal)
    return MonteCarloResult(
        config=config,
        seeds=tuple(seeds),
        trials=tuple(trials),
        failures=tuple(failures),
        median_surprise=med_s,
        iqr_surprise=iqr_s,
        median_goal_alignment=med_g,
        iqr_goal_alignment=iqr_g,
    )


@dataclass(frozen=True)
class ComparisonReport:
    delta_surprise: tuple[float, ...]
    delta_goal_alignment: tuple[float, ...]
    surprise_wins: tuple[int, ...]
    goal_alignment_wins: tuple[int, ...]
    n_paired: int
    coupled_dominates: bool

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}


def compare(coupled: MonteCarloResult, uncoupled: MonteCarloResult) -> ComparisonReport:
    """Deltas are coupled minus uncoupled medians, so negative favours coupling.

    Wins count seeds, present in both runs, where the coupled cumulative cost
    is strictly lower.
    """
    a = coupled.config.to_dict()
    b = uncoupled.config.to_dict()
    a.pop("coupled")
    b.pop("coupled")
    if a != b:
        diff = sorted(k for k in a if a[k] != b[k])
        raise ValueError(f"configs differ beyond coupling mode: {diff}")

    d_s = tuple(c - u for c, u in zip(coupled.median_surprise, uncoupled.median_surprise))
    d_g = tuple(c - u for c, u in zip(coupled.median_goal_alignment, uncoupled.median_goal_alignment))
    by_seed = {t["seed"]: t for t in uncoupled.trials}
    pairs = [(t, by_seed[t["seed"]]) for t in coupled.trials if t["seed"] in by_seed]
    s_wins = tuple(sum(c["cum_surprise"][i] < u["cum_surprise"][i] for c, u in pairs) for i in range(N_AGENTS))
    g_wins = tuple(
        sum(c["cum_goal_alignment"][i] < u["cum_goal_alignment"][i] for c, u in pairs) for i in range(N_AGENTS)
    )
    return ComparisonReport(
        delta_surprise=d_s,
        delta_goal_alignment=d_g,
        surprise_wins=s_wins,
        goal_alignment_wins=g_wins,
        n_paired=len(pairs),
        coupled_dominates=all(d < 0 for d in d_s + d_g),
    )
