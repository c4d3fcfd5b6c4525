"""Groups of scalar agents, optionally coupled through shared output buffers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent import ArxEfeAgent


@dataclass(frozen=True)
class CouplingTopology:
    """``peers[i]`` lists the agents whose outputs agent ``i`` reads, in regressor order."""

    peers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.peers)
        peers = tuple(tuple(int(j) for j in p) for p in self.peers)
        for i, p in enumerate(peers):
            if i in p:
                raise ValueError(f"agent {i} cannot be its own peer")
            if any(not 0 <= j < n for j in p):
                raise ValueError(f"peer index out of range for agent {i}: {p}")
            if len(set(p)) != len(p):
                raise ValueError(f"duplicate peer for agent {i}: {p}")
        object.__setattr__(self, "peers", peers)

    @property
    def n_agents(self) -> int:
        return len(self.peers)

    @classmethod
    def uncoupled(cls, n_agents: int) -> "CouplingTopology":
        return cls(tuple(() for _ in range(n_agents)))

    @classmethod
    def fully_coupled(cls, n_agents: int) -> "CouplingTopology":
        return cls(tuple(tuple(j for j in range(n_agents) if j != i) for i in range(n_agents)))


@dataclass(frozen=True)
class AgentStepMetrics:
    """Per-agent quantities computed from the belief held before the step's update."""

    pred_mean: float
    pred_std: float
    surprise: float
    goal_alignment: float


class Ensemble:
    """Synchronous stepping: every agent decides from time k-1 data, then all absorb.

    Only output buffers are shared between agents.
    """

    def __init__(self, agents: list[ArxEfeAgent], topology: CouplingTopology):
        if len(agents) != topology.n_agents:
            raise ValueError(f"{len(agents)} agents but topology has {topology.n_agents}")
        for i, (agent, peers) in enumerate(zip(agents, topology.peers)):
            if len(agent.memory.peer_outputs) != len(peers):
                raise ValueError(
                    f"agent {i} has {len(agent.memory.peer_outputs)} peer buffers, topology lists {len(peers)}"
                )
            for j in peers:
                if agents[j].memory.output_len != agent.memory.output_len:
                    raise ValueError(f"agent {i} and peer {j} have different output buffer lengths")
        self.agents = agents
        self.topology = topology
        self.step_index = 0

    def __len__(self):
        return len(self.agents)

    def decide(self) -> np.ndarray:
        return np.array([agent.select_control()[0] for agent in self.agents])

    def absorb(self, controls, observations) -> list[AgentStepMetrics]:
        controls = np.asarray(controls, dtype=np.float64)
        observations = np.asarray(observations, dtype=np.float64)
        n = len(self.agents)
        if controls.shape != (n,) or observations.shape != (n,):
            raise ValueError(f"expected {n} controls and {n} observations")
        metrics = []
        for agent, u, y in zip(self.agents, controls.tolist(), observations.tolist()):
            mean, std = agent.predict(u)
            metrics.append(AgentStepMetrics(mean, std, agent.surprise(u, y), agent.goal_alignment(y)))
        for agent, u, y in zip(self.agents, controls.tolist(), observations.tolist()):
            agent.observe(u, y)
        for agent, peers in zip(self.agents, self.topology.peers):
            for slot, j in enumerate(peers):
                agent.memory.push_peer(slot, float(observations[j]))
        self.step_index += 1
        return metrics
