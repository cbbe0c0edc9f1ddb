"""Canonical signatures of rooted subgraphs.

A signature is a text key that two rooted subgraphs share exactly when they
are isomorphic under a mapping that preserves node labels, edge orders and
the root.  Keys are produced by iterative neighborhood color refinement with
exhaustive tie-breaking, so they are exact (not merely hash-based) for the
small neighborhoods this library extracts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graph import AtomNode, MolecularGraph

#: Hard cap on canonicalizable subgraph size.
MAX_SUBGRAPH_NODES = 64


class SubgraphTooLargeError(ValueError):
    """Raised for subgraphs beyond :data:`MAX_SUBGRAPH_NODES` nodes."""


def node_token(atom: AtomNode) -> str:
    """Stable text label of one node as it appears inside signature keys.

    Element symbol (lowercased when aromatic), hydrogen count when nonzero,
    explicit signed charge when nonzero.  Residue nodes are wrapped in angle
    brackets so they never collide with element symbols.
    """
    if atom.residue:
        return f"<{atom.label}>"
    token = atom.label.lower() if atom.aromatic else atom.label
    if atom.hydrogens:
        token += f"H{atom.hydrogens}"
    if atom.charge:
        token += f"{atom.charge:+d}"
    return token


@dataclass(frozen=True)
class RootedSubgraph:
    """An induced subgraph with a distinguished root node.

    ``nodes`` are the member atoms, ``edges`` are local-index triples
    ``(i, j, order)``, ``root`` is the local index of the root, and
    ``height`` is the neighborhood radius that produced the subgraph.
    """

    nodes: tuple[AtomNode, ...]
    edges: tuple[tuple[int, int, int], ...]
    root: int
    height: int


@dataclass(frozen=True)
class Signature:
    """Canonical identity of a rooted subgraph."""

    key: str
    height: int
    mass: float


def subgraph_mass(sig: Signature) -> float:
    """Total mass recorded on a signature."""
    return sig.mass


def _refine(
    colors: list,
    adjacency: list[list[tuple[int, int]]],
) -> list[int]:
    """Rank-compressed stable coloring; classes only ever split."""
    ranks = {c: r for r, c in enumerate(sorted(set(colors)))}
    colors = [ranks[c] for c in colors]
    classes = len(ranks)
    while True:
        sigs = [
            (colors[v], tuple(sorted((o, colors[u]) for o, u in adjacency[v])))
            for v in range(len(colors))
        ]
        ranks = {s: r for r, s in enumerate(sorted(set(sigs)))}
        if len(ranks) == classes:
            return colors
        colors = [ranks[s] for s in sigs]
        classes = len(ranks)


def canonical_key(
    labels: Sequence[str],
    edges: Sequence[tuple[int, int, int]],
    root: int,
) -> str:
    """Canonical text form of a rooted labeled graph.

    The key serializes the graph under a canonical node ordering, so equal
    keys reconstruct equal graphs: two rooted graphs get the same key if and
    only if some isomorphism maps one onto the other carrying root to root
    and preserving node labels and edge orders.
    """
    n = len(labels)
    if n > MAX_SUBGRAPH_NODES:
        raise SubgraphTooLargeError(
            f"subgraph has {n} nodes, more than the {MAX_SUBGRAPH_NODES} allowed"
        )
    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for i, j, order in edges:
        adjacency[i].append((order, j))
        adjacency[j].append((order, i))

    initial = [(v == root, labels[v]) for v in range(n)]
    best: str | None = None

    def serialize(order: list[int]) -> str:
        pos = [0] * n
        for p, v in enumerate(order):
            pos[v] = p
        node_part = ",".join(labels[v] for v in order)
        edge_part = ",".join(
            f"{a}-{b}:{o}"
            for a, b, o in sorted(
                (min(pos[i], pos[j]), max(pos[i], pos[j]), o) for i, j, o in edges
            )
        )
        return f"@{pos[root]};{node_part};{edge_part}"

    def search(colors: list[int]) -> None:
        nonlocal best
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        ambiguous = [c for c, members in cells.items() if len(members) > 1]
        if not ambiguous:
            order = sorted(range(n), key=lambda v: colors[v])
            candidate = serialize(order)
            if best is None or candidate < best:
                best = candidate
            return
        target = min(ambiguous)
        for v in cells[target]:
            branched = list(colors)
            branched[v] = -1  # individualize: -1 sorts ahead of every rank
            search(_refine(branched, adjacency))

    search(_refine(list(initial), adjacency))
    assert best is not None
    return best


def neighborhood_subgraph(
    graph: MolecularGraph, root: int, height: int
) -> RootedSubgraph:
    """Induced subgraph of every node within ``height`` hops of ``root``."""
    if not 0 <= root < len(graph):
        raise ValueError(f"root {root} is not a node of the graph")
    if height < 0:
        raise ValueError("height must be nonnegative")
    dist = graph.distances()[root]
    members = [v for v in range(len(graph)) if dist[v] <= height]
    local = {v: k for k, v in enumerate(members)}
    edges = tuple(
        (local[i], local[j], o)
        for i, j, o in graph.edges
        if i in local and j in local
    )
    nodes = tuple(graph.nodes[v] for v in members)
    return RootedSubgraph(nodes, edges, local[root], height)


def canonical_signature(sub: RootedSubgraph) -> Signature:
    """Signature (canonical key, height, mass) of a rooted subgraph."""
    labels = [node_token(a) for a in sub.nodes]
    key = canonical_key(labels, sub.edges, sub.root)
    # summing in sorted order makes the float total a function of the node
    # multiset alone, so equal keys always carry bit-equal masses
    mass = sum(sorted(a.mass() for a in sub.nodes))
    return Signature(key, sub.height, mass)
