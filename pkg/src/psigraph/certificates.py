"""Convexity certificates: positive matrices attached to reflecting cuts.

A certificate for label ``A`` assigns to each reflecting cut ``k`` a real
symmetric positive semidefinite matrix ``P`` indexed by the uncut ``A``-edges
on one side of the cut.  Writing ``M[e, f] = P[e, k(f)]`` for ``f`` on the
far side, the certificate is valid when, for every pair of distinct
``A``-edges, the entries ``M`` over the cuts separating them add up to one.

Vertex certificates have the same shape with vertices in place of edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from .graph import PsiGraph, build_cycle, build_hypercube, cartesian_product
from .reflect import (
    GraphError,
    ReflectingCut,
    enumerate_reflecting_cuts,
    make_cut,
)

PSD_TOL = 1e-12
SUM_TOL = 1e-12


class CertificateMismatch(ValueError):
    """Certificate indices do not match the graph."""


@dataclass(frozen=True)
class CertificateBlock:
    cut: ReflectingCut
    items: tuple[int, ...]
    matrix: np.ndarray = field(compare=False)


@dataclass
class ConvexityCertificate:
    label: int | None
    blocks: list[CertificateBlock]
    kind: str = "edge"

    def matrices(self) -> list[np.ndarray]:
        return [b.matrix for b in self.blocks]


@dataclass
class CertificateReport:
    psd_margins: list[float]
    asymmetry: float
    worst_residual: float
    worst_pair: tuple | None
    passed: bool

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "psd_margins": [float(m) for m in self.psd_margins],
            "min_psd_margin": float(min(self.psd_margins, default=float("inf"))),
            "asymmetry": float(self.asymmetry),
            "worst_residual": float(self.worst_residual),
            "worst_pair": [int(x) for x in self.worst_pair] if self.worst_pair else None,
        }


def _items_universe(graph: PsiGraph, cert: ConvexityCertificate) -> list[int]:
    if cert.kind == "edge":
        return graph.label_edges(cert.label)
    if cert.kind == "vertex":
        return list(range(graph.num_vertices))
    raise CertificateMismatch(f"unknown certificate kind {cert.kind!r}")


def _item_side(graph, cut: ReflectingCut, kind, item):
    if kind == "edge":
        return cut.edge_side(graph, item)
    return cut.side_of(item)


def _item_image(graph, cut: ReflectingCut, kind, item):
    if kind == "edge":
        return cut.map_edge(graph, item)
    return cut.involution[item]


def _block_side(graph, block: CertificateBlock, kind, universe) -> int | None:
    """Side the block is indexed on; raises on any index mismatch."""
    cut = block.cut
    sides = {_item_side(graph, cut, kind, x) for x in block.items}
    if None in sides or len(sides) > 1:
        raise CertificateMismatch("block items are cut or straddle both sides")
    if len(set(block.items)) != len(block.items):
        raise CertificateMismatch("repeated block items")
    if block.matrix.shape != (len(block.items), len(block.items)):
        raise CertificateMismatch(
            f"matrix shape {block.matrix.shape} does not match {len(block.items)} items"
        )
    per_side = {0: [], 1: []}
    for x in universe:
        s = _item_side(graph, cut, kind, x)
        if s is not None:
            per_side[s].append(x)
    if not sides:
        if per_side[0] and per_side[1]:
            raise CertificateMismatch("empty block for a cut with items on both sides")
        return None
    (side,) = sides
    if sorted(block.items) != sorted(per_side[side]):
        raise CertificateMismatch("block items do not cover their side of the cut")
    return side


def verify_certificate(graph: PsiGraph, cert: ConvexityCertificate) -> CertificateReport:
    """Check positivity and the sum-to-one condition of ``cert`` on ``graph``.

    Every block's cut is re-validated as a reflecting cut of ``graph``.
    """
    universe = _items_universe(graph, cert)
    pos = {x: i for i, x in enumerate(universe)}
    total = np.zeros((len(universe), len(universe)))
    margins = []
    asym = 0.0
    for block in cert.blocks:
        try:
            cut = make_cut(graph, block.cut.involution)
        except GraphError as exc:
            raise CertificateMismatch(f"not a reflecting cut of the graph: {exc}") from exc
        block = CertificateBlock(cut, block.items, np.asarray(block.matrix, dtype=float))
        side = _block_side(graph, block, cert.kind, universe)
        P = block.matrix
        if P.size:
            asym = max(asym, float(np.max(np.abs(P - P.T))))
            margins.append(float(np.linalg.eigvalsh((P + P.T) / 2)[0]))
        if side is None:
            continue
        row = {x: i for i, x in enumerate(block.items)}
        far = [x for x in universe if _item_side(graph, cut, cert.kind, x) == 1 - side]
        for r in block.items:
            for f in far:
                m = P[row[r], row[_item_image(graph, cut, cert.kind, f)]]
                total[pos[r], pos[f]] += m
                total[pos[f], pos[r]] += m
    worst, worst_pair = 0.0, None
    for i in range(len(universe)):
        for j in range(i + 1, len(universe)):
            r = abs(total[i, j] - 1.0)
            if r > worst:
                worst, worst_pair = r, (universe[i], universe[j])
    passed = (
        min(margins, default=0.0) >= -PSD_TOL and asym <= SUM_TOL and worst <= SUM_TOL
    )
    return CertificateReport(margins, asym, worst, worst_pair, passed)


# -- constructive certificates -----------------------------------------------------------


def _clean_items(graph, cut, kind, label, side):
    if kind == "edge":
        return tuple(
            e for e in graph.label_edges(label) if cut.edge_side(graph, e) == side
        )
    return tuple(v for v in range(graph.num_vertices) if cut.side_of(v) == side)


def identity_certificate(graph: PsiGraph, label: int) -> ConvexityCertificate:
    """Identity matrix on every reflecting cut."""
    blocks = []
    for cut in enumerate_reflecting_cuts(graph):
        items = _clean_items(graph, cut, "edge", label, 0)
        blocks.append(CertificateBlock(cut, items, np.eye(len(items))))
    return ConvexityCertificate(label, blocks)


def certificate_for_cycle(n: int, label: int = 0) -> ConvexityCertificate:
    """Identity certificate for the cycle graph with ``n`` kets.

    Any two distinct same-label edges of the cycle are exchanged by exactly
    one of its reflections, so identities satisfy the sum rule.
    """
    return identity_certificate(build_cycle(n), label)


def vertex_certificate(graph: PsiGraph, edge_cert: ConvexityCertificate) -> ConvexityCertificate:
    """Lift an edge certificate to a vertex certificate.

    Pairs of vertices not joined by a ``label`` edge reuse the entry of their
    incident ``label`` edges.  A pair joined by a ``label`` edge is separated
    only by the cut that mirrors one onto the other; that cut gets a single
    diagonal one.
    """
    label = edge_cert.label
    inc = graph.incident_edge()
    by_inv = {b.cut.involution: b for b in edge_cert.blocks}
    blocks = []
    for cut in enumerate_reflecting_cuts(graph):
        eblock = by_inv.get(cut.involution)
        side = 0
        if eblock is not None and eblock.items:
            side = cut.edge_side(graph, eblock.items[0])
        items = _clean_items(graph, cut, "vertex", None, side)
        P = np.zeros((len(items), len(items)))
        if eblock is not None:
            erow = {e: i for i, e in enumerate(eblock.items)}
            idx = [erow.get(inc[v][label]) for v in items]
            for i, a in enumerate(idx):
                for j, b in enumerate(idx):
                    if a is not None and b is not None:
                        P[i, j] = eblock.matrix[a, b]
        for i, v in enumerate(items):
            if inc[v][label] in cut.cut_edges:
                P[i, i] += 1.0
        blocks.append(CertificateBlock(cut, items, P))
    return ConvexityCertificate(label, blocks, kind="vertex")


def _lift(prod, label_graph, other, vid, cert, other_vertex_cert, shift):
    """Certificate on ``prod`` for a label of ``label_graph``.

    ``vid(x, y)`` is the product id of label-graph vertex ``x`` and
    other-graph vertex ``y``.  Label-graph cuts carry ``P (x) ones``;
    other-graph cuts carry ``identity (x) P_vertex``.
    """
    label = cert.label + shift
    eidx = prod.edge_index()

    def pedge(e, y):
        u, v, _ = label_graph.edges[e]
        a, b = vid(u, y), vid(v, y)
        return eidx[(min(a, b), max(a, b), label)]

    ny = other.num_vertices
    blocks = []
    for block in cert.blocks:
        k = block.cut.involution
        inv = [0] * prod.num_vertices
        for x in range(label_graph.num_vertices):
            for y in range(ny):
                inv[vid(x, y)] = vid(k[x], y)
        items = tuple(pedge(e, y) for e in block.items for y in range(ny))
        blocks.append(
            CertificateBlock(make_cut(prod, inv), items, np.kron(block.matrix, np.ones((ny, ny))))
        )
    all_edges = label_graph.label_edges(cert.label)
    for block in other_vertex_cert.blocks:
        k = block.cut.involution
        inv = [0] * prod.num_vertices
        for x in range(label_graph.num_vertices):
            for y in range(ny):
                inv[vid(x, y)] = vid(x, k[y])
        items = tuple(pedge(e, y) for e in all_edges for y in block.items)
        blocks.append(
            CertificateBlock(
                make_cut(prod, inv), items, np.kron(np.eye(len(all_edges)), block.matrix)
            )
        )
    return ConvexityCertificate(label, blocks)


def certificate_for_product(
    g1: PsiGraph,
    cert1: ConvexityCertificate,
    g2: PsiGraph,
    cert2: ConvexityCertificate | None = None,
    vertex_cert2: ConvexityCertificate | None = None,
) -> ConvexityCertificate:
    """Certificate for ``cert1.label`` on ``cartesian_product(g1, g2)``.

    Needs a vertex certificate of ``g2``, given directly or built from an
    edge certificate ``cert2`` of ``g2``.
    """
    if vertex_cert2 is None:
        if cert2 is None:
            raise ValueError("a vertex certificate for the second factor is required")
        vertex_cert2 = vertex_certificate(g2, cert2)
    prod = cartesian_product(g1, g2)
    n2 = g2.num_vertices
    return _lift(prod, g1, g2, lambda x, y: x * n2 + y, cert1, vertex_cert2, 0)


def product_certificates(
    g1: PsiGraph,
    certs1: dict[int, ConvexityCertificate],
    g2: PsiGraph,
    certs2: dict[int, ConvexityCertificate],
) -> tuple[PsiGraph, dict[int, ConvexityCertificate]]:
    """Product graph and certificates for every label, from per-label factor certificates."""
    prod = cartesian_product(g1, g2)
    n2 = g2.num_vertices
    vc1 = vertex_certificate(g1, next(iter(certs1.values())))
    vc2 = vertex_certificate(g2, next(iter(certs2.values())))
    out = {}
    for a, c in certs1.items():
        out[a] = _lift(prod, g1, g2, lambda x, y: x * n2 + y, c, vc2, 0)
    for b, c in certs2.items():
        out[b + g1.party_count] = _lift(
            prod, g2, g1, lambda y, x: x * n2 + y, c, vc1, g1.party_count
        )
    return prod, out


def cycle_certificates(n: int, merge_parties: bool = False):
    """``(graph, {label: certificate})`` for a cycle graph."""
    g = build_cycle(n, merge_parties=merge_parties)
    return g, {a: identity_certificate(g, a) for a in g.labels}


def family_certificates(ns: Sequence[int]):
    """Graph and certificates for the product of cycles ``C_{n1} x C_{n2} x ...``.

    A factor with ``n == 1`` enters as the single-party graph ``K_2``.
    """
    g, certs = cycle_certificates(ns[0], merge_parties=ns[0] == 1)
    for n in ns[1:]:
        h, hc = cycle_certificates(n, merge_parties=n == 1)
        g, certs = product_certificates(g, certs, h, hc)
    return g, certs


def tripartite_certificates(n: int):
    """Graph and certificates for the single-party ``K_2`` times the two-party ``2n``-cycle.

    Unlike :func:`family_certificates`, the cycle factor keeps both labels
    even for ``n == 1``, so the result always has three parties.
    """
    g1, c1 = cycle_certificates(1, merge_parties=True)
    g2, c2 = cycle_certificates(n)
    return product_certificates(g1, c1, g2, c2)


# -- hypercube certificates given as explicit matrices -----------------------------------

HALF, THIRD = 0.5, 1.0 / 3.0

E3_PRODUCT = {0: ("", np.ones((2, 2))), 1: ("", np.eye(2))}
E3_SYMMETRIC = {
    0: ("", np.array([[1, HALF], [HALF, 1]])),
    1: ("", np.array([[1, HALF], [HALF, 1]])),
}
_CHECKER = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]], dtype=float)
_E4_SYM = np.array(
    [
        [1, HALF, HALF, THIRD],
        [HALF, 1, THIRD, HALF],
        [HALF, THIRD, 1, HALF],
        [THIRD, HALF, HALF, 1],
    ]
)
# Keys index the non-label coordinates in order; the string lists the row
# coordinates, most significant first.
E4_PRODUCT = {0: ("21", np.ones((4, 4))), 1: ("20", _CHECKER), 2: ("10", np.eye(4))}
E4_SYMMETRIC = {0: ("21", _E4_SYM), 1: ("20", _E4_SYM), 2: ("10", _E4_SYM)}


def hypercube_certificate(q: int, label: int, matrices: dict) -> ConvexityCertificate:
    """Certificate on ``build_hypercube(q)`` from explicit per-cut matrices.

    ``matrices[j] = (order, P)`` gives the matrix for the cut across the
    ``j``-th non-label coordinate.  Rows are the ``label`` edges on the side
    where that coordinate is 0, enumerated over the remaining non-label
    coordinates listed in ``order`` (positions into the non-label list, most
    significant first).
    """
    g = build_hypercube(q)
    others = [c for c in range(q) if c != label]
    eidx = g.edge_index()
    blocks = []
    for j, (order, P) in sorted(matrices.items()):
        coord = others[j]
        inv = [v ^ (1 << coord) for v in range(g.num_vertices)]
        cut = make_cut(g, inv)
        rest = [others[int(ch)] for ch in order] if order else [
            c for c in others if c != coord
        ]
        items = []
        for bits in iproduct((0, 1), repeat=len(rest)):
            v = sum(b << c for b, c in zip(bits, rest))
            items.append(eidx[(v, v | (1 << label), label)])
        blocks.append(CertificateBlock(cut, tuple(items), np.asarray(P, dtype=float)))
    return ConvexityCertificate(label, blocks)
