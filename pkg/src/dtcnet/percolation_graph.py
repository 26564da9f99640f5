"""Percolation rule, cluster analysis, and graph export.

An undirected edge {i, j} is active iff |E_j - E_i| < |K_ij| with E the
diagonal and K the off-diagonal of an effective Hamiltonian. The
comparison is a strict floating-point inequality with no tolerance
band; per-edge margins |K| - |dE| are kept so near-threshold edges can
be audited after the fact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .floquet_core import EffectiveHamiltonian
from .spin_hilbert import domain_wall_counts

__all__ = [
    "PercolationGraph",
    "ClusterDecomposition",
    "TwoLevelResult",
    "percolation_graph",
    "clusters",
    "degree_sequence",
    "two_level_analysis",
    "export_graph",
    "export_nodes_csv",
]

HERMITICITY_PRE_TOL = 1e-8
EXPORT_FORMATS = ("dot", "graphml", "edge-csv")


@dataclass(frozen=True, eq=False)
class PercolationGraph:
    """Graph over the 2^n configurations under the percolation rule.

    edges holds unordered pairs as (i, j) tuples with i < j; margins
    maps each active edge to |K_ij| - |E_i - E_j| > 0.
    """

    num_nodes: int
    edges: frozenset[tuple[int, int]]
    domain_walls: np.ndarray
    degrees: np.ndarray
    margins: dict[tuple[int, int], float]

    @property
    def node_annotations(self) -> tuple[tuple[int, int], ...]:
        """Per-node (domain_walls, degree) pairs in index order."""
        return tuple(
            (int(w), int(d)) for w, d in zip(self.domain_walls, self.degrees)
        )

    def margin(self, i: int, j: int) -> float:
        """Percolation margin of an active edge; KeyError if inactive."""
        return self.margins[(min(i, j), max(i, j))]


@dataclass(frozen=True)
class ClusterDecomposition:
    """Connected components; sizes sorted descending."""

    components: tuple[frozenset[int], ...]
    sizes: tuple[int, ...]


@dataclass(frozen=True)
class TwoLevelResult:
    """Gap and mixing angles of an isolated configuration pair."""

    gap: float
    cos_theta: float
    sin_theta: float
    active: bool


def percolation_graph(H: EffectiveHamiltonian) -> PercolationGraph:
    """Apply the percolation rule to every configuration pair.

    Parameters
    ----------
    H : EffectiveHamiltonian
        Hermitian within HERMITICITY_PRE_TOL; dimension must be a power
        of two so nodes can carry domain-wall annotations.

    Returns
    -------
    PercolationGraph
        Edge {i, j} present iff |E_j - E_i| < |K_ij|, strictly.
    """
    matrix = H.matrix
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    defect = np.abs(matrix - matrix.conj().T).max()
    if defect >= HERMITICITY_PRE_TOL:
        raise ValueError(f"effective Hamiltonian not Hermitian: defect {defect:.3e}")

    energies = np.real(np.diag(matrix))
    # evaluate on the upper triangle only so roundoff asymmetry in
    # |K_ij| vs |K_ji| cannot desymmetrize the edge set
    abs_k = np.abs(np.triu(matrix, k=1))
    gap = np.abs(energies[:, None] - energies[None, :])
    active = abs_k > np.triu(gap, k=1)
    np.fill_diagonal(active, False)
    rows, cols = np.nonzero(active)

    edges = frozenset((int(i), int(j)) for i, j in zip(rows, cols))
    margins = {
        (int(i), int(j)): float(abs_k[i, j] - gap[i, j]) for i, j in zip(rows, cols)
    }
    degrees = np.zeros(dim, dtype=int)
    np.add.at(degrees, rows, 1)
    np.add.at(degrees, cols, 1)
    return PercolationGraph(
        num_nodes=dim,
        edges=edges,
        domain_walls=domain_wall_counts(n),
        degrees=degrees,
        margins=margins,
    )


def clusters(g: PercolationGraph) -> ClusterDecomposition:
    """Connected components by union-find; sizes sorted descending."""
    parent = list(range(g.num_nodes))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in g.edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for node in range(g.num_nodes):
        groups.setdefault(find(node), []).append(node)
    components = sorted(groups.values(), key=lambda c: (-len(c), c[0]))
    return ClusterDecomposition(
        components=tuple(frozenset(c) for c in components),
        sizes=tuple(len(c) for c in components),
    )


def degree_sequence(g: PercolationGraph) -> tuple[np.ndarray, np.ndarray]:
    """(degrees, domain_walls) vectors in node-index order."""
    return g.degrees.copy(), g.domain_walls.copy()


def two_level_analysis(E_i: float, E_j: float, K_ij: complex) -> TwoLevelResult:
    """Gap and mixing of the pair Hamiltonian [[E_i, K], [K*, E_j]].

    The gap is delta = sqrt((E_i - E_j)^2 + |K|^2); cos_theta and
    sin_theta are |dE|/delta and |K|/delta. The edge is active iff
    |K| > |dE|, which coincides with sin_theta > cos_theta.
    """
    de = abs(E_i - E_j)
    k = abs(K_ij)
    if de == 0.0 and k == 0.0:
        raise ValueError("degenerate two-level input: zero gap and zero coupling")
    gap = math.hypot(de, k)
    return TwoLevelResult(
        gap=gap, cos_theta=de / gap, sin_theta=k / gap, active=k > de
    )


def _sorted_edges(g: PercolationGraph) -> list[tuple[int, int]]:
    return sorted(g.edges)


def export_graph(g: PercolationGraph, format: str) -> bytes:
    """Serialize the graph; nodes in index order, edges sorted.

    Supported formats: 'dot', 'graphml', 'edge-csv'. The edge CSV holds
    src,dst rows only; node attributes travel in a companion file (see
    export_nodes_csv).
    """
    if format == "dot":
        return _to_dot(g)
    if format == "graphml":
        return _to_graphml(g)
    if format == "edge-csv":
        lines = ["src,dst"]
        lines += [f"{i},{j}" for i, j in _sorted_edges(g)]
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unsupported format {format!r}; expected one of {EXPORT_FORMATS}")


def export_nodes_csv(g: PercolationGraph) -> bytes:
    """Companion node table: id,label,domain_walls,degree."""
    width = g.num_nodes.bit_length() - 1
    lines = ["id,label,domain_walls,degree"]
    lines += [
        f"{i},{format(i, f'0{width}b')},{int(g.domain_walls[i])},{int(g.degrees[i])}"
        for i in range(g.num_nodes)
    ]
    return ("\n".join(lines) + "\n").encode()


def _to_dot(g: PercolationGraph) -> bytes:
    width = g.num_nodes.bit_length() - 1
    out = ["graph configuration_space {"]
    for i in range(g.num_nodes):
        out.append(
            f'  {i} [label="{format(i, f"0{width}b")}" domain_walls={int(g.domain_walls[i])}'
            f" degree={int(g.degrees[i])}];"
        )
    for i, j in _sorted_edges(g):
        out.append(f"  {i} -- {j};")
    out.append("}")
    return ("\n".join(out) + "\n").encode()


def _to_graphml(g: PercolationGraph) -> bytes:
    width = g.num_nodes.bit_length() - 1
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="label" for="node" attr.name="label" attr.type="string"/>',
        '  <key id="domain_walls" for="node" attr.name="domain_walls" attr.type="int"/>',
        '  <key id="degree" for="node" attr.name="degree" attr.type="int"/>',
        '  <graph id="configuration_space" edgedefault="undirected">',
    ]
    for i in range(g.num_nodes):
        out.append(f'    <node id="n{i}">')
        out.append(f'      <data key="label">{escape(format(i, f"0{width}b"))}</data>')
        out.append(f'      <data key="domain_walls">{int(g.domain_walls[i])}</data>')
        out.append(f'      <data key="degree">{int(g.degrees[i])}</data>')
        out.append("    </node>")
    for i, j in _sorted_edges(g):
        out.append(f'    <edge source="n{i}" target="n{j}"/>')
    out += ["  </graph>", "</graphml>"]
    return ("\n".join(out) + "\n").encode()
