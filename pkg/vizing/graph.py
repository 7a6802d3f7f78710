"""
Graph representation, generators, and parsing.

Vertices and edges are dense 0-based integers. A ``Graph`` is immutable once
built and is shared freely between colorings and workers.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
from pydantic import BaseModel, Field
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from utils.constants import SCHEMA_VERSION
from utils.error_handlers import (
    DuplicateEdge,
    InfeasibleParameters,
    MalformedLine,
    SelfLoop,
)
from utils.rng import substream

Edge = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """
    Simple undirected graph.

    ``ends[e]`` holds the endpoints of edge ``e``; ``adj[v]`` lists
    ``(neighbor, edge id)`` pairs in edge-id order.
    """

    n: int
    ends: Tuple[Edge, ...]
    adj: Tuple[Tuple[Tuple[int, int], ...], ...] = field(repr=False)
    max_degree: int
    seed: Optional[int] = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], seed: Optional[int] = None) -> "Graph":
        ends: List[Edge] = []
        adj: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise SelfLoop(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise DuplicateEdge(f"duplicate edge {key}")
            if not (0 <= u < n and 0 <= v < n):
                raise MalformedLine(f"endpoint out of range for n={n}: {u} {v}")
            seen.add(key)
            e = len(ends)
            ends.append((u, v))
            adj[u].append((v, e))
            adj[v].append((u, e))
        max_degree = max((len(a) for a in adj), default=0)
        return cls(
            n=n,
            ends=tuple(ends),
            adj=tuple(tuple(a) for a in adj),
            max_degree=max_degree,
            seed=seed,
        )

    @property
    def m(self) -> int:
        return len(self.ends)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self.ends

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def other(self, e: int, v: int) -> int:
        """Endpoint of ``e`` that is not ``v``."""
        a, b = self.ends[e]
        return b if a == v else a

    def shared_vertex(self, e: int, f: int) -> Optional[int]:
        a, b = self.ends[e]
        c, d = self.ends[f]
        if a == c or a == d:
            return a
        if b == c or b == d:
            return b
        return None

    def edge_between(self, u: int, v: int) -> Optional[int]:
        small = u if self.degree(u) <= self.degree(v) else v
        target = v if small == u else u
        for w, e in self.adj[small]:
            if w == target:
                return e
        return None

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        for e, (u, v) in enumerate(self.ends):
            g.add_edge(u, v, id=e)
        return g


def degree(g: Graph, v: int) -> int:
    """Number of edges incident to ``v``."""
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for n={g.n}")
    return g.degree(v)


# ==========================================
# PARSING AND SERIALIZATION
# ==========================================

class GraphDocument(BaseModel):
    """JSON form of a graph with its generator header."""

    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    n: int
    delta: int
    seed: Optional[int] = None
    edges: List[Tuple[int, int]]

    model_config = {"populate_by_name": True}


def _parse_header(line: str) -> Dict[str, str]:
    fields = {}
    for token in line.lstrip("#").split():
        if "=" in token:
            key, _, value = token.partition("=")
            fields[key.strip()] = value.strip()
    return fields


def parse_edge_list(text: Union[bytes, str]) -> Graph:
    """
    Parse whitespace-separated "u v" lines into a Graph.

    Comment lines start with '#'. A comment of the form ``# n=<count>`` fixes
    the vertex count so trailing isolated vertices survive a round trip.

    Raises:
        MalformedLine, DuplicateEdge, SelfLoop: naming the offending line.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    declared_n: Optional[int] = None
    seed: Optional[int] = None
    edges: List[Edge] = []
    seen: Dict[Edge, int] = {}
    max_vertex = -1

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = _parse_header(line)
            try:
                if "n" in header:
                    declared_n = int(header["n"])
                if "seed" in header and header["seed"] not in ("", "None"):
                    seed = int(header["seed"])
            except ValueError:
                raise MalformedLine(f"bad header: {line!r}", line_no=line_no)
            continue

        parts = line.split()
        if len(parts) != 2:
            raise MalformedLine(f"expected two endpoints, got {line!r}", line_no=line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLine(f"non-integer endpoint in {line!r}", line_no=line_no)
        if u < 0 or v < 0:
            raise MalformedLine(f"negative endpoint in {line!r}", line_no=line_no)
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}", line_no=line_no)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdge(
                f"edge {key} already given on line {seen[key]}", line_no=line_no
            )
        seen[key] = line_no
        edges.append((u, v))
        max_vertex = max(max_vertex, u, v)

    n = max_vertex + 1
    if declared_n is not None:
        if declared_n < n:
            raise MalformedLine(f"header n={declared_n} but vertex {max_vertex} used")
        n = declared_n
    return Graph.from_edges(n, edges, seed=seed)


def format_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n} delta={g.max_degree} seed={g.seed}"]
    lines.extend(f"{u} {v}" for u, v in g.ends)
    return "\n".join(lines) + "\n"


def graph_to_json(g: Graph) -> str:
    doc = GraphDocument(n=g.n, delta=g.max_degree, seed=g.seed, edges=list(g.ends))
    return doc.model_dump_json(by_alias=True)


def graph_from_json(text: Union[bytes, str]) -> Graph:
    doc = GraphDocument.model_validate(json.loads(text))
    return Graph.from_edges(doc.n, doc.edges, seed=doc.seed)


def load_graph(text: Union[bytes, str]) -> Graph:
    """Parse either serialization, sniffing JSON by its leading brace."""
    head = text.lstrip()[:1]
    if head in ("{", b"{"):
        return graph_from_json(text)
    return parse_edge_list(text)


# ==========================================
# GENERATORS
# ==========================================

class _PairingStuck(Exception):
    """Remaining stubs cannot be paired into new simple edges."""


def _pairable(edges: set, leftover: Dict[int, int]) -> bool:
    if not leftover:
        return True
    nodes = list(leftover)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[:i]:
            key = (s1, s2) if s1 < s2 else (s2, s1)
            if key not in edges:
                return True
    return False


def _pair_stubs(n: int, delta: int, rng, exact: bool, max_rounds: int = 100) -> set:
    edges: set = set()
    stubs = [v for v in range(n) for _ in range(delta)]

    for _ in range(max_rounds):
        if len(stubs) < 2:
            break
        leftover: Dict[int, int] = defaultdict(int)
        order = rng.permutation(len(stubs))
        shuffled = [stubs[i] for i in order]
        it = iter(shuffled)
        for s1, s2 in zip(it, it):
            key = (s1, s2) if s1 < s2 else (s2, s1)
            if s1 != s2 and key not in edges:
                edges.add(key)
            else:
                leftover[s1] += 1
                leftover[s2] += 1
        if len(shuffled) % 2:
            leftover[shuffled[-1]] += 1

        if not _pairable(edges, leftover):
            if exact:
                raise _PairingStuck()
            break
        stubs = [v for v, count in leftover.items() for _ in range(count)]
    else:
        if exact and len(stubs) >= 2:
            raise _PairingStuck()

    return edges


def gen_random_max_degree(
    n: int,
    delta: int,
    seed: int,
    regular: bool = False,
    max_attempts: int = 50,
) -> Graph:
    """
    Random simple graph with maximum degree at most ``delta``.

    Stubs (``delta`` per vertex) are shuffled and paired; loops and repeated
    pairs go back into the pool for another round. With ``regular=True`` every
    vertex gets degree exactly ``delta`` and stuck attempts are retried.

    Raises:
        InfeasibleParameters: n < 2, delta < 2, or exact regularity impossible.
    """
    if n < 2 or delta < 2:
        raise InfeasibleParameters(f"need n >= 2 and delta >= 2, got n={n} delta={delta}")
    if regular and (n * delta) % 2:
        raise InfeasibleParameters(f"n*delta = {n * delta} is odd; no {delta}-regular graph on {n} vertices")
    if regular and delta >= n:
        raise InfeasibleParameters(f"delta={delta} must be below n={n} for a regular graph")

    rng = substream(seed, "gen", n, delta)

    if regular:
        retrying = Retrying(
            stop=stop_after_attempt(max_attempts),
            retry=retry_if_exception_type(_PairingStuck),
            reraise=True,
        )
        try:
            edges = retrying(_pair_stubs, n, delta, rng, True)
        except _PairingStuck:
            raise InfeasibleParameters(f"no {delta}-regular pairing found in {max_attempts} attempts")
    else:
        edges = _pair_stubs(n, delta, rng, False)

    return Graph.from_edges(n, sorted(edges), seed=seed)


def complete_graph(k: int) -> Graph:
    return Graph.from_edges(k, [(u, v) for u in range(k) for v in range(u + 1, k)])


def cycle_graph(k: int) -> Graph:
    return Graph.from_edges(k, [(i, (i + 1) % k) for i in range(k)])


def path_graph(k: int) -> Graph:
    return Graph.from_edges(k, [(i, i + 1) for i in range(k - 1)])


def star_graph(leaves: int) -> Graph:
    """K_{1,leaves} with center 0."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> Graph:
    g = nx.petersen_graph()
    return Graph.from_edges(g.number_of_nodes(), sorted(g.edges()))


def from_networkx(g: nx.Graph) -> Graph:
    mapping = {v: i for i, v in enumerate(sorted(g.nodes()))}
    return Graph.from_edges(len(mapping), [(mapping[u], mapping[v]) for u, v in g.edges()])
