"""The doubling broadcast framework and its two compositions.

Without collision detection the framework multiplexes Shallow- and
General-Broadcast. With collision detection it multiplexes all four protocols
and runs a beep-wave on odd global rounds so that every node learns its hop
distance before Deep-Broadcast needs it; framework steps use even rounds.

"Informed" means first-ever reception. Iteration resets deactivate nodes but
never clear ``first_informed``; the harness, not the protocol, decides when
every node has been reached.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import TextIO

import numpy as np

from .coins import (
    CD_PROTOCOLS,
    NO_CD_PROTOCOLS,
    Constants,
    IterationRandomness,
    Protocol,
    draw_iteration,
    transmit_prob,
)
from .radio import ModelError, ModelVariant, Reception, step, write_trace
from .topology import Network

NEVER = -1


class InvariantError(RuntimeError):
    """A protocol invariant was violated during simulation."""


@dataclass
class NodeStates:
    """Per-node protocol state, one array entry per node.

    ``-1`` marks unset integer fields.
    """

    active: np.ndarray
    first_informed: np.ndarray
    distance: np.ndarray
    distance_round: np.ndarray
    beeping: np.ndarray

    @classmethod
    def initial(cls, network: Network) -> "NodeStates":
        n, s = network.node_count, network.source
        states = cls(
            active=np.zeros(n, dtype=bool),
            first_informed=np.full(n, NEVER, dtype=np.int64),
            distance=np.full(n, NEVER, dtype=np.int64),
            distance_round=np.full(n, NEVER, dtype=np.int64),
            beeping=np.zeros(n, dtype=bool),
        )
        states.active[s] = True
        states.first_informed[s] = 0
        states.distance[s] = 0
        states.distance_round[s] = 0
        return states

    def reset(self, source: int) -> None:
        self.active[:] = False
        self.active[source] = True

    @property
    def informed_count(self) -> int:
        return int(np.count_nonzero(self.first_informed >= 0))


@dataclass(frozen=True)
class RunConfig:
    collision_detection: bool = False
    constants: Constants = field(default_factory=Constants)
    max_global_rounds: int = 10_000_000
    seed: int = 0
    trial: int = 0
    trace: bool = False
    trace_stream: TextIO | None = None

    def __post_init__(self) -> None:
        if self.max_global_rounds < 1:
            raise ValueError("max_global_rounds must be >= 1")


@dataclass
class TrialRecord:
    graph: str
    n: int
    collision_detection: bool
    seed: int
    trial: int
    constants: dict
    first_informed_round: list
    completion_round: int | None
    iterations_executed: int
    framework_steps: int
    global_rounds: int
    beep_distances: list | None = None
    distance_rounds: list | None = None

    @property
    def completed(self) -> bool:
        return self.completion_round is not None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "TrialRecord":
        return cls(**json.loads(line))


def trial_streams(seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (source coins, local coins) generators for one trial."""
    coins_seq, local_seq = np.random.SeedSequence([seed, trial]).spawn(2)
    return np.random.default_rng(coins_seq), np.random.default_rng(local_seq)


class _Simulation:
    def __init__(self, network: Network, variant: ModelVariant, constants: Constants,
                 local_rng: np.random.Generator, trace: TextIO | None = None,
                 states: NodeStates | None = None, round_offset: int = 0):
        self.network = network
        self.variant = variant
        self.constants = constants
        self.rng = local_rng
        self.trace = trace
        self.states = states if states is not None else NodeStates.initial(network)
        self.round = round_offset
        self.framework_steps = 0
        self.beep_round = 0
        self.informed = self.states.informed_count
        self.beeps_done = not variant.collision_detection

    @property
    def complete(self) -> bool:
        return self.informed == self.network.node_count

    def beep_step(self) -> None:
        """One odd round of the beep-wave."""
        if not self.variant.collision_detection:
            raise ModelError("beep-waves require collision detection")
        self.round += 1
        self.beep_round += 1
        st = self.states
        if self.beeps_done:
            return
        if self.beep_round == 1:
            beepers = np.zeros(self.network.node_count, dtype=bool)
            beepers[self.network.source] = True
        else:
            beepers = st.beeping
        outcome = step(self.network, self.variant, beepers, self.round, payload="beep")
        write_trace(self.trace, outcome)
        heard = (outcome.kind == Reception.MESSAGE) | (outcome.kind == Reception.COLLISION)
        fresh = heard & (st.distance == NEVER)
        st.distance[fresh] = self.beep_round
        st.distance_round[fresh] = self.round
        st.beeping = heard
        # Later beeps cannot change any distance.
        if not heard.any() or np.all(st.distance != NEVER):
            self.beeps_done = True

    def framework_step(self, protocol: int, x: int, T: int) -> None:
        self.round += 1
        self.framework_steps += 1
        st = self.states
        act = np.flatnonzero(st.active)
        if protocol == Protocol.DEEP:
            d = st.distance[act]
            if np.any(d == NEVER):
                raise InvariantError("active node without a known distance")
            p = transmit_prob(Protocol.DEEP, T, int(x), d, self.constants)
        else:
            p = 2.0 ** -int(x)
        fire = act[self.rng.random(act.size) < p]
        if not fire.size and self.trace is None:
            return
        outcome = step(self.network, self.variant, fire, self.round)
        write_trace(self.trace, outcome)
        got = outcome.kind == Reception.MESSAGE
        if not got.any():
            return
        fresh = got & (st.first_informed == NEVER)
        if self.variant.collision_detection and np.any(st.distance[got] == NEVER):
            raise InvariantError(f"node informed before its distance was known (round {self.round})")
        st.active |= got
        if fresh.any():
            st.first_informed[fresh] = self.round
            self.informed += int(np.count_nonzero(fresh))

    def run_iteration(self, randomness: IterationRandomness, budget: int | None = None,
                      stop_when_complete: bool = False) -> bool:
        """Run one iteration; return False if the round budget ran out inside it."""
        T = randomness.T
        if self.trace is not None:
            self.trace.write(f"iter t={randomness.t} T={T}\n")
        per_step = 2 if self.variant.collision_detection else 1
        S = randomness.S.tolist()
        x = randomness.x.tolist()
        for j in range(T):
            if budget is not None and self.round + per_step > budget:
                return False
            if self.variant.collision_detection:
                self.beep_step()
            self.framework_step(S[j], x[j], T)
            if stop_when_complete and self.complete:
                return True
        self.states.reset(self.network.source)
        if self.trace is not None:
            self.trace.write(f"reset round={self.round}\n")
        return True


def run_iteration(
    network: Network,
    randomness: IterationRandomness,
    states: NodeStates,
    variant: ModelVariant,
    constants: Constants,
    rng: np.random.Generator,
    round_offset: int = 0,
) -> NodeStates:
    """Execute all ``T`` steps of one iteration from ``states``, then reset.

    Under collision detection each framework step is preceded by a beep round;
    the beep-wave restarts from the source at the first round of this call.
    """
    sim = _Simulation(network, variant, constants, rng, states=states, round_offset=round_offset)
    sim.run_iteration(randomness)
    return sim.states


def _run(network: Network, config: RunConfig, collision_detection: bool) -> TrialRecord:
    protocols = CD_PROTOCOLS if collision_detection else NO_CD_PROTOCOLS
    constants = replace(config.constants, C=len(protocols))
    variant = ModelVariant.for_network(network, collision_detection)
    coins_rng, local_rng = trial_streams(config.seed, config.trial)
    trace = (config.trace_stream or sys.stderr) if config.trace else None
    sim = _Simulation(network, variant, constants, local_rng, trace=trace)
    t = 0
    while not sim.complete and sim.round < config.max_global_rounds:
        t += 1
        randomness = draw_iteration(t, protocols, constants, coins_rng)
        if not sim.run_iteration(randomness, config.max_global_rounds, stop_when_complete=True):
            break
    st = sim.states
    informed = [int(r) if r >= 0 else None for r in st.first_informed.tolist()]
    record = TrialRecord(
        graph=network.name,
        n=network.node_count,
        collision_detection=collision_detection,
        seed=config.seed,
        trial=config.trial,
        constants=constants.as_dict(),
        first_informed_round=informed,
        completion_round=int(st.first_informed.max()) if sim.complete else None,
        iterations_executed=t,
        framework_steps=sim.framework_steps,
        global_rounds=sim.round,
    )
    if collision_detection:
        record.beep_distances = [int(d) if d >= 0 else None for d in st.distance.tolist()]
        record.distance_rounds = [int(r) if r >= 0 else None for r in st.distance_round.tolist()]
    return record


def run_broadcast_no_cd(network: Network, config: RunConfig) -> TrialRecord:
    """Shallow + General broadcast (two protocols) until all nodes are informed."""
    return _run(network, config, collision_detection=False)


def run_broadcast_cd_directed(network: Network, config: RunConfig) -> TrialRecord:
    """All four protocols with beep-waves on odd rounds. Accepts undirected networks too."""
    return _run(network, config, collision_detection=True)


def run_broadcast(network: Network, config: RunConfig) -> TrialRecord:
    return _run(network, config, config.collision_detection)


def beep_wave_step(network: Network, states: NodeStates, beep_round: int,
                   collision_detection: bool = True) -> NodeStates:
    """Advance the beep-wave by one of its own rounds (1-based).

    Round 1: the source beeps. Later rounds: every node that heard energy in
    the previous beep round beeps. ``states.distance`` is set on first energy.
    """
    variant = ModelVariant.for_network(network, collision_detection)
    sim = _Simulation(network, variant, Constants(), np.random.default_rng(0), states=states,
                      round_offset=2 * beep_round - 2)
    sim.beep_round = beep_round - 1
    sim.beep_step()
    return sim.states


def run_beep_wave(network: Network) -> np.ndarray:
    """Run the beep-wave alone until it dies out or reaches every node."""
    states = NodeStates.initial(network)
    r = 0
    while np.any(states.distance == NEVER) and r <= network.node_count:
        r += 1
        beep_wave_step(network, states, r)
    return states.distance.copy()
