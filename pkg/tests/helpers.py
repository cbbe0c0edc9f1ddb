"""Shared generators and brute-force oracles for the test suite.

Everything here is deliberately independent of the library's own algorithms:
molecule strings are emitted from a simple valence-tracking grammar, graph
isomorphism is decided by exhaustive permutation, and ranking metrics are
recomputed by explicit pair counting, so library results can be checked
against a second route.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from submol.graph import AtomNode, MolecularGraph

#: Bonding capacity used by the molecule generator.
BUDGETS = {"C": 4, "N": 3, "O": 2, "P": 3, "S": 2, "F": 1, "Cl": 1, "Br": 1}
_HEAVY = ["C"] * 8 + ["N", "O", "S", "P"]
_LEAF = ["F", "Cl", "Br"]


def random_molecule_smiles(
    rnd: random.Random,
    max_atoms: int = 10,
    carbon_only: bool = False,
    root_reserve: int = 0,
) -> str:
    """A random valence-respecting SMILES string (tree plus optional rings).

    ``root_reserve`` keeps that many bonds of the first atom unused, so a
    substituent can later be attached to the front of the string safely.
    """
    n = rnd.randint(1, max_atoms)
    symbols: list[str] = []
    remaining: list[int] = []
    children: dict[int, list[tuple[int, int]]] = {}
    for i in range(n):
        if carbon_only:
            sym = "C"
        elif i == 0:
            sym = rnd.choice(_HEAVY)
        else:
            pool = _HEAVY + (_LEAF if rnd.random() < 0.3 else [])
            sym = rnd.choice(pool)
        if i == 0:
            symbols.append(sym)
            remaining.append(BUDGETS[sym] - root_reserve)
            children[0] = []
            continue
        parents = [p for p in range(len(symbols)) if remaining[p] >= 1]
        if not parents:
            break
        p = rnd.choice(parents)
        max_order = min(remaining[p], BUDGETS[sym], 3)
        order = 1
        if max_order >= 2 and rnd.random() < 0.15:
            order = 2
            if max_order >= 3 and rnd.random() < 0.25:
                order = 3
        idx = len(symbols)
        symbols.append(sym)
        remaining.append(BUDGETS[sym] - order)
        remaining[p] -= order
        children[p].append((idx, order))
        children[idx] = []
    n = len(symbols)

    ring_edges: list[tuple[int, int]] = []
    if n >= 3 and rnd.random() < 0.5:
        adjacent = {
            (min(p, c), max(p, c)) for p in children for c, _ in children[p]
        }
        for _ in range(rnd.randint(1, 2)):
            candidates = [
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if remaining[u] >= 1 and remaining[v] >= 1 and (u, v) not in adjacent
            ]
            if not candidates:
                break
            u, v = rnd.choice(candidates)
            ring_edges.append((u, v))
            adjacent.add((u, v))
            remaining[u] -= 1
            remaining[v] -= 1

    ring_digits: dict[int, list[int]] = {}
    for digit, (u, v) in enumerate(ring_edges, start=1):
        ring_digits.setdefault(u, []).append(digit)
        ring_digits.setdefault(v, []).append(digit)
    bond_text = {1: "", 2: "=", 3: "#"}

    def emit(node: int) -> str:
        out = symbols[node] + "".join(str(d) for d in ring_digits.get(node, []))
        kids = children[node]
        for k, (child, order) in enumerate(kids):
            sub = bond_text[order] + emit(child)
            out += sub if k == len(kids) - 1 else f"({sub})"
        return out

    return emit(0)


def random_labeled_graph(
    rnd: random.Random,
    max_nodes: int = 8,
    labels: tuple[str, ...] = ("C", "N", "O"),
) -> MolecularGraph:
    """A random connected node-labeled graph with mixed bond orders."""
    n = rnd.randint(1, max_nodes)
    nodes = [
        AtomNode(
            rnd.choice(labels),
            hydrogens=rnd.randint(0, 2),
            charge=rnd.choice((0, 0, 0, 1, -1)),
        )
        for _ in range(n)
    ]
    edges: list[tuple[int, int, int]] = []
    present: set[tuple[int, int]] = set()
    for v in range(1, n):
        u = rnd.randrange(v)
        edges.append((u, v, rnd.choice((1, 1, 2, 4))))
        present.add((u, v))
    for _ in range(rnd.randint(0, max(0, n - 2))):
        u, v = rnd.randrange(n), rnd.randrange(n)
        if u == v:
            continue
        a, b = min(u, v), max(u, v)
        if (a, b) in present:
            continue
        present.add((a, b))
        edges.append((a, b, rnd.choice((1, 2, 4))))
    return MolecularGraph(nodes, edges)


def permuted_graph(graph: MolecularGraph, perm: list[int]) -> MolecularGraph:
    """The same graph with node ``i`` renumbered to ``perm[i]``."""
    nodes: list[AtomNode | None] = [None] * len(graph)
    for i, node in enumerate(graph.nodes):
        nodes[perm[i]] = node
    edges = [(perm[i], perm[j], o) for i, j, o in graph.edges]
    return MolecularGraph(nodes, edges)  # type: ignore[arg-type]


def root_preserving_isomorphic(
    labels_a, edges_a, root_a, labels_b, edges_b, root_b
) -> bool:
    """Exhaustive-permutation oracle for rooted labeled-graph isomorphism."""
    n = len(labels_a)
    if n != len(labels_b) or len(edges_a) != len(edges_b):
        return False
    target = {(min(i, j), max(i, j), o) for i, j, o in edges_b}
    for perm in itertools.permutations(range(n)):
        if perm[root_a] != root_b:
            continue
        if any(labels_a[v] != labels_b[perm[v]] for v in range(n)):
            continue
        mapped = {
            (min(perm[i], perm[j]), max(perm[i], perm[j]), o) for i, j, o in edges_a
        }
        if mapped == target:
            return True
    return False


def auroc_by_pair_counting(scores, labels) -> float:
    """Mann-Whitney AUROC by explicit pair enumeration (ties count half)."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == -1]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def nitro_smiles_dataset(
    rnd: random.Random, n_each: int = 30
) -> tuple[list[str], list[int]]:
    """Carbon skeletons where a nitro group marks the positive class."""
    smiles: list[str] = []
    labels: list[int] = []
    for _ in range(n_each):
        backbone = random_molecule_smiles(
            rnd, max_atoms=8, carbon_only=True, root_reserve=1
        )
        smiles.append("O=N(=O)" + backbone)
        labels.append(1)
        smiles.append(random_molecule_smiles(rnd, max_atoms=9, carbon_only=True))
        labels.append(-1)
    return smiles, labels


def perceptron_separable(X, y, epochs: int = 500) -> bool:
    """Whether a plain perceptron finds a separating hyperplane."""
    X = np.asarray(X, dtype=float)
    Xb = np.hstack([X, np.ones((len(X), 1))])
    w = np.zeros(Xb.shape[1])
    for _ in range(epochs):
        mistakes = 0
        for i in range(len(Xb)):
            if y[i] * (w @ Xb[i]) <= 0:
                w += y[i] * Xb[i]
                mistakes += 1
        if mistakes == 0:
            return True
    return False
