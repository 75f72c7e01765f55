"""Reflecting cuts of psi-graphs and the properties built on them."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterator

from .graph import GraphError, PsiGraph, require_valid

DEFAULT_SEARCH_CAP = 64


class SearchTooLarge(GraphError):
    pass


# -- isomorphism search -------------------------------------------------------------


def _signature(graph: PsiGraph) -> list[tuple]:
    table = graph.neighbor_table()
    return [tuple(sorted((a, len(vs)) for a, vs in row.items())) for row in table]


def _multiplicity(graph: PsiGraph) -> dict[tuple[int, int, int], int]:
    mult: dict[tuple[int, int, int], int] = {}
    for u, v, a in graph.edges:
        for key in ((u, v, a), (v, u, a)):
            mult[key] = mult.get(key, 0) + 1
    return mult


def iter_isomorphisms(
    g1: PsiGraph, g2: PsiGraph, parity: str = "preserve", first_image: int | None = None
) -> Iterator[tuple[int, ...]]:
    """Yield every label-preserving isomorphism ``g1 -> g2`` as a vertex map.

    ``parity`` is ``"preserve"``, ``"flip"`` or ``"ignore"``.  Vertices are
    assigned in breadth-first order; a vertex reached along a labelled edge
    may only go to a same-label neighbour of its parent's image, and every
    candidate is checked against the labelled adjacency of already mapped
    vertices.
    """
    if parity not in ("preserve", "flip", "ignore"):
        raise ValueError(f"unknown parity mode {parity!r}")
    n = g1.num_vertices
    if n != g2.num_vertices or len(g1.edges) != len(g2.edges):
        return
    if g1.party_count != g2.party_count:
        return
    sig1, sig2 = _signature(g1), _signature(g2)
    nbr1, nbr2 = g1.neighbor_table(), g2.neighbor_table()
    mult1, mult2 = _multiplicity(g1), _multiplicity(g2)

    # breadth-first order per component, remembering how each vertex was reached
    order: list[int] = []
    parent: dict[int, tuple[int, int] | None] = {}
    for root in range(n):
        if root in parent:
            continue
        parent[root] = None
        queue = deque([root])
        while queue:
            x = queue.popleft()
            order.append(x)
            for a in sorted(nbr1[x]):
                for y in nbr1[x][a]:
                    if y not in parent:
                        parent[y] = (x, a)
                        queue.append(y)
    earlier_nbrs = []
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        seen = {}
        for a, ys in nbr1[v].items():
            for y in ys:
                if pos[y] < pos[v]:
                    seen[(y, a)] = mult1[(v, y, a)]
        earlier_nbrs.append(seen)

    def parity_ok(v, w):
        if parity == "ignore":
            return True
        same = g1.parity[v] == g2.parity[w]
        return same if parity == "preserve" else not same

    phi = [-1] * n
    used = [False] * n

    def candidates(i):
        v = order[i]
        par = parent[v]
        if par is None:
            if i == 0 and first_image is not None:
                return [first_image]
            return range(n)
        x, a = par
        return sorted(set(nbr2[phi[x]].get(a, ())))

    def search(i):
        if i == n:
            yield tuple(phi)
            return
        v = order[i]
        for w in candidates(i):
            if used[w] or sig2[w] != sig1[v] or not parity_ok(v, w):
                continue
            if any(mult2.get((w, phi[y], a), 0) != k for (y, a), k in earlier_nbrs[i].items()):
                continue
            phi[v] = w
            used[w] = True
            yield from search(i + 1)
            used[w] = False
            phi[v] = -1

    yield from search(0)


def find_isomorphism(g1: PsiGraph, g2: PsiGraph, parity: str = "preserve"):
    """First label-preserving isomorphism, or ``None``."""
    return next(iter_isomorphisms(g1, g2, parity), None)


def are_isomorphic(g1: PsiGraph, g2: PsiGraph, parity: str = "preserve") -> bool:
    return find_isomorphism(g1, g2, parity) is not None


@lru_cache(maxsize=256)
def is_parity_symmetric(graph: PsiGraph) -> bool:
    """True when the graph is isomorphic to itself with parities flipped.

    Such a graph encodes a real invariant.
    """
    return find_isomorphism(graph, graph, parity="flip") is not None


# -- reflecting cuts ------------------------------------------------------------------


@dataclass(frozen=True)
class ReflectingCut:
    """A parity-flipping involutive automorphism and the edges it cuts.

    ``sides`` holds the two vertex sets left after deleting ``cut_edges``;
    ``sides[0]`` is the one containing the smallest vertex id.
    """

    involution: tuple[int, ...]
    cut_edges: tuple[int, ...]
    sides: tuple[tuple[int, ...], tuple[int, ...]] = field(compare=False)

    def side_of(self, v: int) -> int:
        return 0 if v in self.sides[0] else 1

    def separates(self, u: int, v: int) -> bool:
        return (u in self.sides[0]) != (v in self.sides[0])

    def edge_side(self, graph: PsiGraph, edge: int) -> int | None:
        """Side holding ``edge``, or ``None`` for a cut edge."""
        if edge in self.cut_edges:
            return None
        return self.side_of(graph.edges[edge][0])

    def map_edge(self, graph: PsiGraph, edge: int) -> int:
        u, v, a = graph.edges[edge]
        x, y = self.involution[u], self.involution[v]
        return graph.edge_index()[(min(x, y), max(x, y), a)]


class CutError(GraphError):
    pass


def make_cut(graph: PsiGraph, involution) -> ReflectingCut:
    """Build the cut defined by ``involution``; raise :class:`CutError` if it is not reflecting."""
    k = tuple(int(x) for x in involution)
    problems = cut_problems(graph, k)
    if problems:
        raise CutError("; ".join(problems))
    cut_edges = tuple(i for i, (u, v, _) in enumerate(graph.edges) if k[u] == v)
    comps = graph.components(cut_edges)
    return ReflectingCut(k, cut_edges, (tuple(comps[0]), tuple(comps[1])))


def cut_problems(graph: PsiGraph, k: tuple[int, ...]) -> list[str]:
    """List every way ``k`` fails to define a reflecting cut (empty if it does)."""
    n = graph.num_vertices
    if len(k) != n or sorted(k) != list(range(n)):
        return ["involution is not a permutation of the vertices"]
    out = []
    if any(k[k[v]] != v for v in range(n)):
        out.append("map does not square to the identity")
    if any(graph.parity[k[v]] == graph.parity[v] for v in range(n)):
        out.append("map does not flip parity")
    index = graph.edge_index()
    for u, v, a in graph.edges:
        x, y = k[u], k[v]
        if (min(x, y), max(x, y), a) not in index:
            out.append(f"edge {(u, v, a)} has no labelled image")
            break
    if out:
        return out
    cut_edges = [i for i, (u, v, _) in enumerate(graph.edges) if k[u] == v]
    comps = graph.components(cut_edges)
    if len(comps) != 2:
        return [f"removing the mirror edges leaves {len(comps)} components"]
    if sorted(k[v] for v in comps[0]) != comps[1]:
        return ["map does not exchange the two components"]
    return []


@lru_cache(maxsize=128)
def _cuts_cached(graph: PsiGraph, cap: int) -> tuple[ReflectingCut, ...]:
    if graph.num_vertices > cap:
        raise SearchTooLarge(
            f"graph too large: {graph.num_vertices} vertices exceeds search cap {cap}"
        )
    require_valid(graph)
    found: dict[tuple[int, ...], ReflectingCut] = {}
    for k in iter_isomorphisms(graph, graph, parity="flip"):
        if any(k[k[v]] != v for v in range(len(k))):
            continue
        if cut_problems(graph, k):
            continue
        cut = make_cut(graph, k)
        found.setdefault(cut.cut_edges, cut)
    return tuple(found[key] for key in sorted(found))


def enumerate_reflecting_cuts(graph: PsiGraph, cap: int = DEFAULT_SEARCH_CAP) -> list[ReflectingCut]:
    """All reflecting cuts, ordered by their sorted cut-edge tuple."""
    return list(_cuts_cached(graph, cap))


@dataclass
class Decision:
    holds: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.holds


def is_edge_reflecting(graph: PsiGraph, label: int, cap: int = DEFAULT_SEARCH_CAP) -> Decision:
    """Whether every pair of ``label`` edges is separated by some reflecting cut.

    On failure the witness is an unseparated pair of edge positions.
    """
    cuts = enumerate_reflecting_cuts(graph, cap)
    edges = graph.label_edges(label)
    for e, f in combinations(edges, 2):
        if not any(_separates_edges(graph, c, e, f) for c in cuts):
            return Decision(False, (e, f))
    return Decision(True)


def _separates_edges(graph, cut, e, f) -> bool:
    se, sf = cut.edge_side(graph, e), cut.edge_side(graph, f)
    return se is not None and sf is not None and se != sf


def is_vertex_reflecting(graph: PsiGraph, cap: int = DEFAULT_SEARCH_CAP) -> Decision:
    cuts = enumerate_reflecting_cuts(graph, cap)
    for u, v in combinations(range(graph.num_vertices), 2):
        if not any(c.separates(u, v) for c in cuts):
            return Decision(False, (u, v))
    return Decision(True)


def is_fully_edge_reflecting(graph: PsiGraph, cap: int = DEFAULT_SEARCH_CAP) -> Decision:
    for a in graph.labels:
        d = is_edge_reflecting(graph, a, cap)
        if not d:
            return Decision(False, (a,) + d.witness)
    return Decision(True)


@dataclass
class CutCountReport:
    pairs_checked: int
    distance_violations: list = field(default_factory=list)
    crossing_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.distance_violations and not self.crossing_violations


def _shortest_path(graph: PsiGraph, u: int, v: int) -> list[int]:
    nbrs = graph.neighbor_table()
    prev = {u: None}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == v:
            break
        for a in sorted(nbrs[x]):
            for y in nbrs[x][a]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
    path = [v]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def cut_count_equals_distance(graph: PsiGraph, cap: int = DEFAULT_SEARCH_CAP) -> CutCountReport:
    """Compare the number of separating cuts with graph distance for every vertex pair.

    Also checks that each separating cut crosses one fixed shortest path
    exactly once.
    """
    cuts = enumerate_reflecting_cuts(graph, cap)
    dist = graph.distances()
    report = CutCountReport(0)
    for u, v in combinations(range(graph.num_vertices), 2):
        report.pairs_checked += 1
        separating = [c for c in cuts if c.separates(u, v)]
        if len(separating) != dist[u, v]:
            report.distance_violations.append((u, v, len(separating), int(dist[u, v])))
        path = _shortest_path(graph, u, v)
        for i, c in enumerate(separating):
            crossings = sum(c.separates(a, b) for a, b in zip(path, path[1:]))
            if crossings != 1:
                report.crossing_violations.append((u, v, i, crossings))
    return report


def separating_cut_count(graph: PsiGraph, u: int, v: int) -> int:
    return sum(c.separates(u, v) for c in enumerate_reflecting_cuts(graph))
