"""Edge-labelled bipartite graphs encoding local-unitary invariants.

A :class:`PsiGraph` has one vertex per copy of the state (``ket``) or of its
complex conjugate (``bra``) and one edge per contracted index.  The label of
an edge is the party whose index it contracts.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

KET = 0
BRA = 1
PARITY_NAMES = ("ket", "bra")

DEFAULT_MAX_ELEMENTS = 10000
COXETER_TOL = 1e-9


@dataclass(frozen=True)
class PsiGraph:
    """Immutable edge-labelled multigraph.

    ``parity[v]`` is ``KET`` or ``BRA``; ``edges`` holds ``(u, v, label)``
    triples with labels in ``range(party_count)``.  Vertex ids are the
    positions ``0..len(parity)-1``.  Parallel edges are allowed.
    """

    party_count: int
    parity: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "parity", tuple(int(p) for p in self.parity))
        object.__setattr__(
            self, "edges", tuple((int(u), int(v), int(a)) for u, v, a in self.edges)
        )

    @property
    def num_vertices(self) -> int:
        return len(self.parity)

    @property
    def labels(self) -> range:
        return range(self.party_count)

    @property
    def ket_vertices(self) -> list[int]:
        return [v for v, p in enumerate(self.parity) if p == KET]

    @property
    def bra_vertices(self) -> list[int]:
        return [v for v, p in enumerate(self.parity) if p == BRA]

    @property
    def degree(self) -> int:
        """Homogeneity degree: the number of ket vertices."""
        return len(self.ket_vertices)

    def label_edges(self, label: int) -> list[int]:
        return [i for i, (_, _, a) in enumerate(self.edges) if a == label]

    def neighbor_table(self) -> list[dict[int, list[int]]]:
        """``table[v][label]`` lists the neighbours of ``v`` along ``label``."""
        table: list[dict[int, list[int]]] = [{} for _ in self.parity]
        for u, v, a in self.edges:
            table[u].setdefault(a, []).append(v)
            table[v].setdefault(a, []).append(u)
        return table

    def incident_edge(self) -> list[dict[int, int]]:
        """``table[v][label]`` is the index of the ``label`` edge at ``v``.

        Only meaningful for colour-regular graphs.
        """
        table: list[dict[int, int]] = [{} for _ in self.parity]
        for i, (u, v, a) in enumerate(self.edges):
            table[u][a] = i
            table[v][a] = i
        return table

    def edge_index(self) -> dict[tuple[int, int, int], int]:
        """Map ``(min(u, v), max(u, v), label)`` to the edge position."""
        return {(min(u, v), max(u, v), a): i for i, (u, v, a) in enumerate(self.edges)}

    def adjacency(self, label: int) -> np.ndarray:
        n = self.num_vertices
        adj = np.zeros((n, n), dtype=int)
        for u, v, a in self.edges:
            if a == label:
                adj[u, v] += 1
                adj[v, u] += 1
        return adj

    def components(self, removed: Iterable[int] = ()) -> list[list[int]]:
        """Connected components after deleting the edges at positions ``removed``."""
        removed = set(removed)
        nbrs: list[list[int]] = [[] for _ in self.parity]
        for i, (u, v, _) in enumerate(self.edges):
            if i not in removed:
                nbrs[u].append(v)
                nbrs[v].append(u)
        seen = [False] * self.num_vertices
        comps = []
        for start in range(self.num_vertices):
            if seen[start]:
                continue
            seen[start] = True
            comp, queue = [], deque([start])
            while queue:
                x = queue.popleft()
                comp.append(x)
                for y in nbrs[x]:
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def distances(self) -> np.ndarray:
        """All-pairs shortest path lengths (``-1`` when unreachable)."""
        n = self.num_vertices
        nbrs: list[set[int]] = [set() for _ in self.parity]
        for u, v, _ in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        dist = np.full((n, n), -1, dtype=int)
        for s in range(n):
            dist[s, s] = 0
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in nbrs[x]:
                    if dist[s, y] < 0:
                        dist[s, y] = dist[s, x] + 1
                        queue.append(y)
        return dist

    def is_simple(self) -> bool:
        pairs = Counter((min(u, v), max(u, v)) for u, v, _ in self.edges)
        return all(c == 1 for c in pairs.values())

    def flipped(self) -> PsiGraph:
        """Same graph with every vertex parity exchanged."""
        return PsiGraph(self.party_count, tuple(1 - p for p in self.parity), self.edges)


# -- validation -----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    offending: list = field(default_factory=list)


@dataclass
class ValidationReport:
    checks: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "offending": c.offending}
                for c in self.checks
            ],
        }


def validate(graph: PsiGraph) -> ValidationReport:
    """Check every structural invariant of a psi-graph.

    Failures are recorded in the report; nothing is raised.
    """
    checks = []
    n = graph.num_vertices

    bad_labels = [list(e) for e in graph.edges if not 0 <= e[2] < graph.party_count]
    bad_ends = [list(e) for e in graph.edges if not (0 <= e[0] < n and 0 <= e[1] < n)]
    checks.append(CheckResult("labels_in_range", not bad_labels, bad_labels))
    checks.append(CheckResult("endpoints_exist", not bad_ends, bad_ends))
    checks.append(
        CheckResult(
            "parity_values",
            all(p in (KET, BRA) for p in graph.parity),
            [v for v, p in enumerate(graph.parity) if p not in (KET, BRA)],
        )
    )

    hist: list[Counter] = [Counter() for _ in range(n)]
    for u, v, a in graph.edges:
        if 0 <= u < n:
            hist[u][a] += 1
        if 0 <= v < n:
            hist[v][a] += 1
    want = Counter({a: 1 for a in graph.labels})
    irregular = [v for v in range(n) if hist[v] != want]
    checks.append(CheckResult("color_regular", not irregular, irregular))

    crossing = [
        list(e)
        for e in graph.edges
        if not (0 <= e[0] < n and 0 <= e[1] < n) or graph.parity[e[0]] == graph.parity[e[1]]
    ]
    checks.append(CheckResult("parity_bipartite", not crossing, crossing))

    if bad_ends or n == 0:
        comps = [] if n == 0 else [list(range(n))]
        connected = n > 0 and not bad_ends
    else:
        comps = graph.components()
        connected = len(comps) == 1
    checks.append(
        CheckResult("connected", connected, [] if connected else [c[0] for c in comps])
    )

    kets, bras = len(graph.ket_vertices), len(graph.bra_vertices)
    checks.append(
        CheckResult("balanced", kets == bras and kets > 0, [] if kets == bras else [kets, bras])
    )
    return ValidationReport(checks)


class GraphError(ValueError):
    """A graph or graph construction request is invalid."""


def require_valid(graph: PsiGraph) -> PsiGraph:
    report = validate(graph)
    if not report.ok:
        raise GraphError("invalid psi-graph: failed " + ", ".join(report.failed()))
    return graph


# -- constructors -----------------------------------------------------------------


def build_cycle(n: int, merge_parties: bool = False) -> PsiGraph:
    """The cycle with ``n`` kets and ``n`` bras, labels alternating 0, 1.

    For ``n == 1`` the two vertices are joined by two parallel edges with
    labels 0 and 1; ``merge_parties=True`` fuses them into a single edge of a
    single party (the one-party graph ``K_2``).
    """
    if n < 1:
        raise GraphError("cycle length must be at least 1")
    if merge_parties:
        if n != 1:
            raise GraphError("merge_parties only applies to n = 1")
        return PsiGraph(1, (KET, BRA), ((0, 1, 0),))
    m = 2 * n
    edges = tuple((i, (i + 1) % m, i % 2) for i in range(m))
    return PsiGraph(2, tuple(i % 2 for i in range(m)), edges)


def build_hypercube(q: int) -> PsiGraph:
    """1-skeleton of the ``q``-cube; the edge flipping bit ``a`` has label ``a``."""
    if q < 1:
        raise GraphError("hypercube dimension must be at least 1")
    parity = tuple(bin(v).count("1") % 2 for v in range(2**q))
    edges = tuple(
        (v, v | (1 << a), a) for a in range(q) for v in range(2**q) if not v >> a & 1
    )
    return PsiGraph(q, parity, edges)


def cartesian_product(g1: PsiGraph, g2: PsiGraph) -> PsiGraph:
    """Coloured Cartesian product; labels of ``g2`` are shifted past ``g1``'s.

    Vertex ``(v1, v2)`` gets id ``v1 * |V2| + v2`` and parity
    ``parity(v1) XOR parity(v2)``.
    """
    n1, n2 = g1.num_vertices, g2.num_vertices
    parity = tuple(p1 ^ p2 for p1 in g1.parity for p2 in g2.parity)
    edges = [(u * n2 + y, v * n2 + y, a) for u, v, a in g1.edges for y in range(n2)]
    edges += [
        (x * n2 + u, x * n2 + v, a + g1.party_count) for u, v, a in g2.edges for x in range(n1)
    ]
    return PsiGraph(g1.party_count + g2.party_count, parity, tuple(edges))


def product_vertex(g2: PsiGraph, v1: int, v2: int) -> int:
    """Id of ``(v1, v2)`` in ``cartesian_product(g1, g2)``."""
    return v1 * g2.num_vertices + v2


# -- Coxeter groups ---------------------------------------------------------------


def coxeter_matrix(m: Sequence[Sequence[int]]) -> np.ndarray:
    """Validate a Coxeter matrix (``0`` encodes an infinite order)."""
    m = np.asarray(m, dtype=int)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise GraphError("Coxeter matrix must be square and non-empty")
    if not np.array_equal(m, m.T):
        raise GraphError("Coxeter matrix must be symmetric")
    if not np.all(np.diag(m) == 1):
        raise GraphError("Coxeter matrix must have ones on the diagonal")
    off = m[~np.eye(len(m), dtype=bool)]
    if np.any((off != 0) & (off < 2)):
        raise GraphError("off-diagonal Coxeter entries must be >= 2 or 0 (infinite)")
    return m


def reflection_generators(m: np.ndarray) -> list[np.ndarray]:
    """Generators of the geometric reflection representation.

    Mirrors ``a`` and ``b`` meet at angle ``pi / m[a][b]``; the bilinear form
    is ``B[a][b] = -cos(pi / m[a][b])`` (``-1`` for an infinite entry).
    """
    q = len(m)
    form = np.empty((q, q))
    for a in range(q):
        for b in range(q):
            form[a, b] = -1.0 if m[a, b] == 0 else -np.cos(np.pi / m[a, b])
    gens = []
    for a in range(q):
        s = np.eye(q)
        s[a, :] -= 2.0 * form[a, :]
        gens.append(s)
    return gens


def build_coxeter_cayley(
    m: Sequence[Sequence[int]], max_elements: int = DEFAULT_MAX_ELEMENTS
) -> PsiGraph:
    """Cayley graph of a finite Coxeter group with its simple reflections.

    Elements are enumerated breadth-first as products of reflection matrices
    and identified when their max-norm distance is below ``COXETER_TOL``.
    The edge labelled ``a`` joins ``g`` and ``s_a g``; the parity of ``g`` is
    the parity of its word length (the sign of its determinant).
    """
    m = coxeter_matrix(m)
    if max_elements < 2:
        raise GraphError("max_elements must be at least 2")
    gens = reflection_generators(m)
    q = len(m)

    elements: list[np.ndarray] = [np.eye(q)]
    buckets: dict[tuple, list[int]] = {}

    def key(g):
        return tuple(np.round(g, 6).ravel() + 0.0)

    def lookup(g):
        for idx in buckets.get(key(g), ()):
            if np.max(np.abs(elements[idx] - g)) < COXETER_TOL:
                return idx
        return None

    buckets[key(elements[0])] = [0]
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for a, s in enumerate(gens):
            h = s @ elements[i]
            j = lookup(h)
            if j is None:
                if len(elements) >= max_elements:
                    raise GraphError(
                        f"group too large or infinite: more than {max_elements} elements"
                    )
                j = len(elements)
                elements.append(h)
                buckets.setdefault(key(h), []).append(j)
                queue.append(j)
            if i < j:
                edges.append((i, j, a))
    parity = tuple(0 if np.linalg.det(g) > 0 else 1 for g in elements)
    return PsiGraph(q, parity, tuple(edges))


def block_coxeter_matrix(*blocks: Sequence[Sequence[int]]) -> np.ndarray:
    """Coxeter matrix of a disjoint union of diagrams (commuting blocks)."""
    blocks = [coxeter_matrix(b) for b in blocks]
    size = sum(len(b) for b in blocks)
    out = np.full((size, size), 2, dtype=int)
    at = 0
    for b in blocks:
        out[at : at + len(b), at : at + len(b)] = b
        at += len(b)
    return out


def dihedral_matrix(n: int) -> np.ndarray:
    return np.array([[1, n], [n, 1]])
