import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import settings
from modules.errors import (
    DuplicateEdgeError,
    GenerationFailedError,
    InfeasibleGraphError,
    InstanceTooLargeError,
    LengthMismatchError,
    MalformedLineError,
    SelfLoopError,
    VertexRangeError,
)

logger = logging.getLogger(__name__)


class Graph(BaseModel):
    """Simple undirected base graph on vertices 0..n-1."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    edges: tuple[tuple[int, int], ...] = ()

    @field_validator("edges", mode="before")
    def canonical_edges(cls, value):
        return tuple(sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in value))

    @model_validator(mode="after")
    def check_simple(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if u < 0 or v >= self.n:
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("parallel edges are not allowed")
        return self

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.edges else 0

    def is_regular(self, d: int) -> bool:
        return bool(np.all(self.degrees() == d))

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        return a

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    def relabel(self, perm) -> "Graph":
        perm = list(perm)
        return Graph(n=self.n, edges=[(perm[u], perm[v]) for u, v in self.edges])


class CutAssignment(BaseModel):
    """Side label per vertex, -1 or +1. Serialized as a string of '-' and '+'."""

    model_config = ConfigDict(frozen=True)

    side: tuple[int, ...]

    @field_validator("side")
    def sides_are_signs(cls, value):
        if any(s not in (-1, 1) for s in value):
            raise ValueError("every side must be -1 or +1")
        return value

    @classmethod
    def from_string(cls, text: str) -> "CutAssignment":
        text = text.strip()
        if any(ch not in "+-" for ch in text):
            raise MalformedLineError(f"sign string may only contain '+' and '-': {text!r}")
        return cls(side=tuple(1 if ch == "+" else -1 for ch in text))

    def to_string(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.side)

    def flipped(self) -> "CutAssignment":
        return CutAssignment(side=tuple(-s for s in self.side))

    def __len__(self) -> int:
        return len(self.side)


# ============================================
# Edge-list I/O
# ============================================

def parse_graph(text: str) -> Graph:
    lines = [line.strip() for line in text.strip().splitlines()]
    if not lines or not lines[0]:
        raise MalformedLineError("empty graph document")

    header = lines[0].split()
    if len(header) != 2 or not all(tok.lstrip("-").isdigit() for tok in header):
        raise MalformedLineError(f"line 1: expected 'n m', got {lines[0]!r}")
    n, m = int(header[0]), int(header[1])
    if n < 1 or m < 0:
        raise MalformedLineError(f"line 1: invalid counts n={n}, m={m}")

    body = lines[1:]
    if len(body) != m:
        raise MalformedLineError(f"header announces {m} edges but {len(body)} edge lines follow")

    seen = set()
    for lineno, line in enumerate(body, start=2):
        tokens = line.split()
        if len(tokens) != 2 or not all(tok.lstrip("-").isdigit() for tok in tokens):
            raise MalformedLineError(f"line {lineno}: expected 'u v', got {line!r}")
        u, v = int(tokens[0]), int(tokens[1])
        if not (0 <= u < n and 0 <= v < n):
            raise VertexRangeError(f"line {lineno}: vertex id out of range [0, {n})")
        if u == v:
            raise SelfLoopError(f"line {lineno}: loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"line {lineno}: duplicate edge {key}")
        if u > v:
            raise MalformedLineError(f"line {lineno}: edges are written with u < v, got {u} {v}")
        seen.add(key)

    return Graph(n=n, edges=seen)


def format_graph(g: Graph) -> str:
    return "\n".join([f"{g.n} {g.num_edges}"] + [f"{u} {v}" for u, v in g.edges]) + "\n"


# ============================================
# Generators
# ============================================

def complete_graph(n: int) -> Graph:
    return Graph(n=n, edges=[(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph(n=n, edges=[(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph(n=n, edges=[(i, i + 1) for i in range(n - 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(n=a + b, edges=[(u, a + v) for u in range(a) for v in range(b)])


def random_regular(n: int, d: int, seed: int = 0) -> Graph:
    """Pairing model: shuffle n*d stubs, pair them up, restart on a loop or a parallel edge."""
    if n <= d or d < 0 or (n * d) % 2:
        raise InfeasibleGraphError(f"no simple {d}-regular graph on {n} vertices")

    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    retries = settings.numerics.regular_graph_retries
    for attempt in range(retries):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        low, high = pairs.min(axis=1), pairs.max(axis=1)
        if np.any(low == high):
            continue
        edges = set(zip(low.tolist(), high.tolist()))
        if len(edges) < len(pairs):
            continue
        logger.debug(f"random_regular(n={n}, d={d}, seed={seed}) accepted after {attempt + 1} attempts")
        return Graph(n=n, edges=edges)

    raise GenerationFailedError(f"pairing model failed {retries} times for n={n}, d={d}")


# ============================================
# Cuts
# ============================================

def cut_size(g: Graph, cut: CutAssignment) -> int:
    if len(cut) != g.n:
        raise LengthMismatchError(f"cut has {len(cut)} labels, graph has {g.n} vertices")
    return sum(1 for u, v in g.edges if cut.side[u] != cut.side[v])


def _assignment_bits(index: np.ndarray, n: int, v: int) -> np.ndarray:
    # vertex 0 is pinned to '-'; vertex 1 is the most significant bit so that
    # index order equals lexicographic order of the side vector
    if v == 0:
        return np.zeros_like(index)
    return (index >> (n - 1 - v)) & 1


def _best_in_range(g: Graph, start: int, stop: int) -> tuple[int, int]:
    index = np.arange(start, stop, dtype=np.int64)
    cut = np.zeros(len(index), dtype=np.int64)
    bits = {}
    for u, v in g.edges:
        for w in (u, v):
            if w not in bits:
                bits[w] = _assignment_bits(index, g.n, w)
        cut += bits[u] ^ bits[v]
    pos = int(np.argmax(cut))
    return int(cut[pos]), start + pos


def max_cut_exact(g: Graph, threads: int | None = None) -> tuple[int, CutAssignment]:
    """Exact MAX-CUT by enumerating the 2^(n-1) bipartitions with vertex 0 fixed.

    Ties go to the lexicographically smallest side vector (with - before +).
    """
    cap = settings.limits.max_cut_vertex_cap
    if g.n > cap:
        raise InstanceTooLargeError(f"max_cut_exact enumerates 2^(n-1) cuts; n={g.n} exceeds {cap}")

    total = 1 << (g.n - 1)
    chunk = settings.limits.enumeration_chunk
    ranges = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    workers = threads or settings.runtime.threads
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda r: _best_in_range(g, *r), ranges))

    best_value = max(value for value, _ in results)
    best_index = next(index for value, index in results if value == best_value)
    witness = CutAssignment(
        side=tuple(-1 if v == 0 else (1 if (best_index >> (g.n - 1 - v)) & 1 else -1) for v in range(g.n))
    )
    logger.debug(f"max_cut_exact: n={g.n}, |E|={g.num_edges}, size={best_value}")
    return best_value, witness
