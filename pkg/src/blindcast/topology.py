"""Network construction, benchmark generators and the BFS distance oracle.

Node ids are always ``0..n-1``. Generators put the source at node 0. Edges are
stored sorted by ``(dst, src)``, so the edge arrays double as in-neighbor
adjacency lists (CSR by destination), which is what reception iterates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class TopologyError(ValueError):
    """Base class for invalid network descriptions."""


class MalformedEdgeListError(TopologyError):
    pass


class NodeIdError(TopologyError):
    pass


class SelfLoopError(TopologyError):
    pass


class UnreachableNodeError(TopologyError):
    pass


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable directed (or symmetric) graph with a designated source.

    ``edges`` holds ordered pairs ``(u, v)``: u reaches v by direct
    transmission. For undirected networks both orientations are present.
    """

    node_count: int
    directed: bool
    edges: tuple[tuple[int, int], ...]
    source: int = 0
    name: str = ""
    edge_src: np.ndarray = field(init=False, repr=False)
    edge_dst: np.ndarray = field(init=False, repr=False)
    in_indptr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 1:
            raise TopologyError("network needs at least one node")
        if not 0 <= self.source < n:
            raise NodeIdError(f"source {self.source} out of range for n={n}")
        pairs = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise NodeIdError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise SelfLoopError(f"self-loop at node {u}")
            pairs.add((int(u), int(v)))
        if not self.directed:
            missing = [(u, v) for u, v in pairs if (v, u) not in pairs]
            if missing:
                raise TopologyError(f"undirected network missing reverse of {missing[0]}")
        ordered = tuple(sorted(pairs, key=lambda e: (e[1], e[0])))
        object.__setattr__(self, "edges", ordered)
        src = np.fromiter((u for u, _ in ordered), dtype=np.int64, count=len(ordered))
        dst = np.fromiter((v for _, v in ordered), dtype=np.int64, count=len(ordered))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=indptr[1:])
        for arr in (src, dst, indptr):
            arr.setflags(write=False)
        object.__setattr__(self, "edge_src", src)
        object.__setattr__(self, "edge_dst", dst)
        object.__setattr__(self, "in_indptr", indptr)

        unreachable = np.flatnonzero(_bfs_dist(self) < 0)
        if unreachable.size:
            raise UnreachableNodeError(
                f"{unreachable.size} node(s) unreachable from source, e.g. {int(unreachable[0])}"
            )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.edge_src[self.in_indptr[v] : self.in_indptr[v + 1]]

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.edge_dst[self.edge_src == u]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.directed == other.directed
            and self.source == other.source
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.node_count, self.directed, self.source, self.edges))


@dataclass(frozen=True)
class DistanceMap:
    dist: np.ndarray
    eccentricity: int


def _bfs_dist(network: Network) -> np.ndarray:
    n = network.node_count
    out: list[list[int]] = [[] for _ in range(n)]
    for u, v in network.edges:
        out[u].append(v)
    dist = np.full(n, -1, dtype=np.int64)
    dist[network.source] = 0
    queue = deque([network.source])
    while queue:
        u = queue.popleft()
        for v in out[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def bfs(network: Network) -> DistanceMap:
    """Exact hop distances from the source along edge direction."""
    dist = _bfs_dist(network)
    dist.setflags(write=False)
    return DistanceMap(dist=dist, eccentricity=int(dist.max()))


def _symmetric(pairs: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    out = []
    for u, v in pairs:
        out.append((u, v))
        out.append((v, u))
    return out


def _build(n: int, pairs: Iterable[tuple[int, int]], directed: bool, name: str) -> Network:
    edges = list(pairs) if directed else _symmetric(pairs)
    return Network(node_count=n, directed=directed, edges=tuple(edges), source=0, name=name)


def _check_positive(**kwargs: int) -> None:
    for key, value in kwargs.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{key} must be a positive integer, got {value!r}")


def make_path(n: int, directed: bool = True) -> Network:
    """Path 0 -> 1 -> ... -> n-1 with the source at node 0."""
    _check_positive(n=n)
    return _build(n, ((i, i + 1) for i in range(n - 1)), directed, f"path:{n}")


def make_star(n: int, directed: bool = False) -> Network:
    """Source at the center, ``n - 1`` leaves."""
    _check_positive(n=n)
    return _build(n, ((0, k) for k in range(1, n)), directed, f"star:{n}")


def make_clique(n: int, directed: bool = False) -> Network:
    _check_positive(n=n)
    pairs = ((u, v) for u in range(n) for v in range(u + 1, n))
    if directed:
        pairs = ((u, v) for u in range(n) for v in range(n) if u != v)
    return _build(n, pairs, directed, f"clique:{n}")


def make_layered(depth: int, widths: list[int] | int, directed: bool = True) -> Network:
    """Source followed by ``depth`` layers; layer i is complete to layer i+1.

    ``widths`` may be a single int, meaning the same width for every layer.
    """
    _check_positive(depth=depth)
    if isinstance(widths, int):
        widths = [widths] * depth
    widths = list(widths)
    if len(widths) != depth:
        raise ValueError(f"expected {depth} layer widths, got {len(widths)}")
    for w in widths:
        _check_positive(width=w)
    layers = [[0]]
    nxt = 1
    for w in widths:
        layers.append(list(range(nxt, nxt + w)))
        nxt += w
    pairs = [(u, v) for a, b in zip(layers, layers[1:]) for u in a for v in b]
    name = f"layered:{depth}:{widths[0]}" if len(set(widths)) == 1 else f"layered:{depth}:{widths}"
    return _build(nxt, pairs, directed, name)


def make_grid(rows: int, cols: int, directed: bool = False) -> Network:
    """4-neighbor lattice, node ``r * cols + c``, source at the (0, 0) corner.

    The directed variant keeps only right/down edges away from the source.
    """
    _check_positive(rows=rows, cols=cols)
    pairs = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                pairs.append((v, v + 1))
            if r + 1 < rows:
                pairs.append((v, v + cols))
    return _build(rows * cols, pairs, directed, f"grid:{rows}x{cols}")


def make_gnp(n: int, p: float, seed: int, directed: bool = False) -> Network:
    """Erdős–Rényi G(n, p) on top of a random spanning arborescence from node 0.

    The arborescence guarantees reachability without rejection sampling: nodes
    1..n-1 are visited in random order and each attaches to a uniformly chosen
    earlier node.
    """
    _check_positive(n=n)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    order = np.concatenate(([0], rng.permutation(np.arange(1, n))))
    parents = rng.integers(0, np.arange(1, n)) if n > 1 else np.empty(0, dtype=np.int64)
    pairs = {(int(order[k]), int(order[i + 1])) for i, k in enumerate(parents)}
    if not directed:
        pairs = {(min(a, b), max(a, b)) for a, b in pairs}
    u, v = np.nonzero(rng.random((n, n)) < p)
    keep = u != v if directed else u < v
    pairs.update(zip(u[keep].tolist(), v[keep].tolist()))
    return _build(n, sorted(pairs), directed, f"gnp:{n}:{p}")


def parse_graph(shorthand: str, seed: int = 0, directed: bool | None = None) -> Network:
    """Build a network from a shorthand such as ``grid:10x10`` or ``gnp:256:0.02``.

    ``directed`` overrides the family default when given.
    """
    parts = shorthand.strip().split(":")
    family, args = parts[0], parts[1:]
    kw = {} if directed is None else {"directed": directed}
    try:
        if family == "path" and len(args) == 1:
            return make_path(int(args[0]), **kw)
        if family == "star" and len(args) == 1:
            return make_star(int(args[0]), **kw)
        if family == "clique" and len(args) == 1:
            return make_clique(int(args[0]), **kw)
        if family == "layered" and len(args) == 2:
            return make_layered(int(args[0]), int(args[1]), **kw)
        if family == "grid" and len(args) == 1:
            rows, cols = args[0].lower().split("x")
            return make_grid(int(rows), int(cols), **kw)
        if family == "gnp" and len(args) == 2:
            return make_gnp(int(args[0]), float(args[1]), seed=seed, **kw)
    except ValueError as exc:
        if isinstance(exc, TopologyError):
            raise
        raise ValueError(f"bad graph shorthand {shorthand!r}: {exc}") from None
    raise ValueError(f"unknown graph shorthand {shorthand!r}")


def save_edge_list(network: Network) -> str:
    """Serialize as ``directed|undirected n m source`` followed by ``u v`` lines.

    Undirected edges are written once, as ``u v`` with ``u < v``. Lines are
    sorted ascending.
    """
    if network.directed:
        pairs = sorted(network.edges)
    else:
        pairs = sorted((u, v) for u, v in network.edges if u < v)
    kind = "directed" if network.directed else "undirected"
    lines = [f"{kind} {network.node_count} {len(pairs)} {network.source}"]
    lines += [f"{u} {v}" for u, v in pairs]
    return "\n".join(lines) + "\n"


def _ints(line: str, count: int, lineno: int) -> list[int]:
    fields = line.split()
    if len(fields) != count:
        raise MalformedEdgeListError(f"line {lineno}: expected {count} fields, got {line!r}")
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise MalformedEdgeListError(f"line {lineno}: non-integer field in {line!r}") from None


def load_edge_list(text: str) -> Network:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedEdgeListError("empty edge list")
    header = lines[0].split()
    if len(header) != 4 or header[0] not in ("directed", "undirected"):
        raise MalformedEdgeListError(f"bad header {lines[0]!r}")
    directed = header[0] == "directed"
    n, m, source = _ints(" ".join(header[1:]), 3, 1)
    if n < 1 or m < 0:
        raise MalformedEdgeListError(f"bad header counts {lines[0]!r}")
    if not 0 <= source < n:
        raise NodeIdError(f"source {source} out of range for n={n}")
    if len(lines) - 1 != m:
        raise MalformedEdgeListError(f"header declares {m} edges, found {len(lines) - 1}")
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        u, v = _ints(line, 2, lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise NodeIdError(f"line {lineno}: node id out of range in {line!r}")
        if u == v:
            raise SelfLoopError(f"line {lineno}: self-loop at node {u}")
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise MalformedEdgeListError(f"line {lineno}: duplicate edge {line!r}")
        seen.add(key)
        pairs.append((u, v))
    edges = pairs if directed else _symmetric(pairs)
    return Network(node_count=n, directed=directed, edges=tuple(edges), source=source)
