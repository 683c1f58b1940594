"""One synchronous step of the radio model.

A listening node hears a message iff exactly one in-neighbor transmits. With
collision detection it can tell two-or-more transmitters apart from none;
without it both cases are silence. Transmitters do not listen.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, TextIO

import numpy as np

from .topology import Network


class ModelError(RuntimeError):
    """An operation was invoked under a model variant that does not support it."""


class Reception(IntEnum):
    TRANSMITTING = -1
    SILENCE = 0
    MESSAGE = 1
    COLLISION = 2


class Message(NamedTuple):
    sender: int
    payload: str


@dataclass(frozen=True)
class ModelVariant:
    collision_detection: bool
    directed: bool

    @classmethod
    def for_network(cls, network: Network, collision_detection: bool) -> "ModelVariant":
        return cls(collision_detection=collision_detection, directed=network.directed)


@dataclass(frozen=True)
class RoundOutcome:
    """Per-node reception for one step.

    ``kind[v]`` is a :class:`Reception` code; ``sender[v]`` is the unique
    transmitting in-neighbor when ``kind[v] == MESSAGE`` and -1 otherwise.
    The sender id is for traces only.
    """

    round_number: int
    kind: np.ndarray
    sender: np.ndarray
    collision_detection: bool
    payload: str = "msg"

    def reception(self, node: int) -> Message | Reception | None:
        """``Message``, ``Reception.COLLISION`` or ``Reception.SILENCE``; None for a transmitter."""
        k = Reception(int(self.kind[node]))
        if k is Reception.TRANSMITTING:
            return None
        if k is Reception.MESSAGE:
            return Message(int(self.sender[node]), self.payload)
        return k

    @property
    def received(self) -> np.ndarray:
        return self.kind == Reception.MESSAGE


def as_mask(n: int, transmitters: Iterable[int] | np.ndarray) -> np.ndarray:
    if isinstance(transmitters, np.ndarray) and transmitters.dtype == bool:
        if transmitters.shape != (n,):
            raise ValueError(f"transmitter mask must have shape ({n},)")
        return transmitters
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter(transmitters, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("transmitter id out of range")
    mask[idx] = True
    return mask


def transmitter_counts(network: Network, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Number of transmitting in-neighbors per node, and the sum of their ids."""
    firing = mask[network.edge_src]
    dst = network.edge_dst[firing]
    n = network.node_count
    counts = np.bincount(dst, minlength=n)
    id_sums = np.bincount(dst, weights=network.edge_src[firing], minlength=n).astype(np.int64)
    return counts, id_sums


def step(
    network: Network,
    variant: ModelVariant,
    transmitters: Iterable[int] | np.ndarray,
    round_number: int,
    payload: str = "msg",
) -> RoundOutcome:
    if variant.directed != network.directed:
        raise ValueError("model variant directedness does not match the network")
    mask = as_mask(network.node_count, transmitters)
    counts, id_sums = transmitter_counts(network, mask)
    kind = np.full(network.node_count, Reception.SILENCE, dtype=np.int8)
    single = counts == 1
    kind[single] = Reception.MESSAGE
    if variant.collision_detection:
        kind[counts >= 2] = Reception.COLLISION
    kind[mask] = Reception.TRANSMITTING
    sender = np.where(kind == Reception.MESSAGE, id_sums, -1)
    return RoundOutcome(
        round_number=round_number,
        kind=kind,
        sender=sender,
        collision_detection=variant.collision_detection,
        payload=payload,
    )


def hears_energy(outcome: RoundOutcome, node: int) -> bool:
    """True iff the node heard a message or a collision (CD only)."""
    if not outcome.collision_detection:
        raise ModelError("energy sensing requires collision detection")
    return int(outcome.kind[node]) in (Reception.MESSAGE, Reception.COLLISION)


_CODES = {Reception.SILENCE: "S", Reception.MESSAGE: "M", Reception.COLLISION: "C"}


def format_trace(outcome: RoundOutcome) -> str:
    """``round <t> tx=<ids> rx=<node>:<M|C|S>...`` for one step."""
    tx = np.flatnonzero(outcome.kind == Reception.TRANSMITTING)
    rx = ",".join(
        f"{v}:{_CODES[Reception(int(k))]}"
        for v, k in enumerate(outcome.kind.tolist())
        if k != Reception.TRANSMITTING
    )
    return f"round {outcome.round_number} tx={','.join(map(str, tx.tolist()))} rx={rx}"


def write_trace(stream: TextIO | None, outcome: RoundOutcome) -> None:
    if stream is not None:
        stream.write(format_trace(outcome) + "\n")
