"""Undirected simple graphs: CSR storage, random generators, edge-list ingestion.

All generators return the same immutable :class:`Graph`, with neighbor lists
sorted ascending and node ids 0..n-1. Graphs are safe to share read-only
across concurrent simulation workers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np


def _rng(seed) -> np.random.Generator:
    """Seed may be an int, a sequence of ints, or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph in CSR form.

    indptr[i]:indptr[i+1] slices ``indices`` into the sorted neighbor list
    of node i. Symmetry and absence of self-loops are enforced by the
    constructors, not re-checked per access.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def edge_count(self) -> int:
        return self.indices.size // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        nbrs = self.neighbors(i)
        k = np.searchsorted(nbrs, j)
        return k < nbrs.size and nbrs[k] == j

    def edges(self) -> np.ndarray:
        """All edges as an (E, 2) array of pairs i < j, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        mask = src < self.indices
        return np.column_stack((src[mask], self.indices[mask]))

    def to_edge_list_text(self) -> str:
        """Canonical serialization: one 'i j' line per edge, i < j, sorted."""
        return "".join(f"{i} {j}\n" for i, j in self.edges())

    def save_edge_list(self, path) -> None:
        Path(path).write_text(self.to_edge_list_text())

    def check_invariants(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        assert self.indptr.shape == (self.n + 1,)
        assert self.indptr[0] == 0 and self.indptr[-1] == self.indices.size
        for i in range(self.n):
            nbrs = self.neighbors(i)
            assert np.all(nbrs[1:] > nbrs[:-1]), f"node {i}: neighbors not sorted/unique"
            assert i not in nbrs, f"node {i}: self-loop"
            for j in nbrs:
                assert self.has_edge(int(j), i), f"edge ({i},{j}) not symmetric"
        assert int(self.degrees.sum()) == 2 * self.edge_count


def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a Graph from an iterable of (i, j) pairs.

    Self-loops are dropped and duplicates collapsed; both orientations are
    stored so the result is symmetric.
    """
    pairs = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            continue
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        pairs.add((min(i, j), max(i, j)))
    deg = np.zeros(n, dtype=np.int64)
    for i, j in pairs:
        deg[i] += 1
        deg[j] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int32)
    cursor = indptr[:-1].copy()
    for i, j in sorted(pairs):
        indices[cursor[i]] = j
        cursor[i] += 1
        indices[cursor[j]] = i
        cursor[j] += 1
    for i in range(n):
        seg = indices[indptr[i]:indptr[i + 1]]
        seg.sort()
    return Graph(n=n, indptr=indptr, indices=indices)


def generate_er(n: int, avg_degree: float, seed) -> Graph:
    """Erdős–Rényi G(n, p) with p = avg_degree / (n - 1).

    avg_degree may equal n-1 (p = 1, the complete graph); anything mapping
    to p outside (0, 1] is rejected.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    p = avg_degree / (n - 1)
    if not (0.0 < p <= 1.0):
        raise ValueError(f"avg_degree={avg_degree} gives edge probability {p} outside (0, 1]")
    rng = _rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    return from_edges(n, zip(iu[mask].tolist(), ju[mask].tolist()))


def generate_pa(n: int, m: int, seed) -> Graph:
    """Preferential-attachment growth seeded with the complete graph on m+1 nodes.

    Each node beyond the seed attaches m edges to distinct existing nodes,
    chosen proportionally to current degree. Total edge count is
    m(m+1)/2 + (n-m-1)m.
    """
    if not (1 <= m < n):
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = _rng(seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # one entry per endpoint; sampling uniformly from it is degree-proportional
    repeated = [i for e in edges for i in e]
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(0, len(repeated)))])
        for t in sorted(targets):
            edges.append((t, v))
            repeated.append(t)
            repeated.append(v)
    return from_edges(n, edges)


def generate_sw(n: int, k: int, p_rewire: float, seed) -> Graph:
    """Watts–Strogatz ring lattice with rewiring; edge count stays n*k/2.

    Each forward ring edge is rewired with probability p_rewire to a uniform
    non-neighbor; if none exists the edge is kept in place.
    """
    if k % 2 != 0:
        raise ValueError("k must be even")
    if not (0 <= k < n):
        raise ValueError("need 0 <= k < n")
    if not (0.0 <= p_rewire <= 1.0):
        raise ValueError("p_rewire must be in [0, 1]")
    rng = _rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for step in range(1, k // 2 + 1):
            j = (i + step) % n
            adj[i].add(j)
            adj[j].add(i)
    for i in range(n):
        for step in range(1, k // 2 + 1):
            j = (i + step) % n
            if j not in adj[i]:
                continue  # already rewired away
            if rng.random() >= p_rewire:
                continue
            candidates = [v for v in range(n) if v != i and v not in adj[i]]
            if not candidates:
                continue
            new_j = candidates[int(rng.integers(0, len(candidates)))]
            adj[i].discard(j)
            adj[j].discard(i)
            adj[i].add(new_j)
            adj[new_j].add(i)
    return from_edges(n, ((i, j) for i in range(n) for j in adj[i] if i < j))


def load_edge_list(source, treat_as_undirected: bool = True) -> Graph:
    """Parse a whitespace-separated edge list (SNAP style) into a Graph.

    Lines starting with '#' are comments. Node ids are compacted to 0..N-1
    preserving numeric order; self-loops and duplicate edges are dropped.
    With ``treat_as_undirected`` each pair is symmetrized; otherwise the
    input must already contain both orientations of every edge.
    """
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
    elif isinstance(source, bytes):
        text = source.decode()
    elif isinstance(source, str):
        text = source
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        raw = source.read()
        text = raw.decode() if isinstance(raw, bytes) else raw
    else:
        raise TypeError(f"unsupported source type {type(source)!r}")

    directed_pairs: set[tuple[int, int]] = set()
    ids: set[int] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise ValueError(f"line {lineno}: expected two tokens, got {len(tokens)}")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer token in {stripped!r}") from None
        ids.add(a)
        ids.add(b)
        if a != b:
            directed_pairs.add((a, b))
    if not ids:
        raise ValueError("empty edge list input")

    compact = {orig: new for new, orig in enumerate(sorted(ids))}
    if not treat_as_undirected:
        missing = [(a, b) for a, b in directed_pairs if (b, a) not in directed_pairs]
        if missing:
            raise ValueError(
                f"input not symmetric ({len(missing)} one-way edges, e.g. {missing[0]}) "
                "and treat_as_undirected is off"
            )
    return from_edges(
        len(compact),
        ((compact[a], compact[b]) for a, b in directed_pairs),
    )


def graph_fingerprint(g: Graph) -> str:
    """Stable hash of the canonical edge list plus node count."""
    import hashlib

    h = hashlib.sha256()
    h.update(f"n={g.n}\n".encode())
    h.update(g.to_edge_list_text().encode())
    return h.hexdigest()[:16]
