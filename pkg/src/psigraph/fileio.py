"""JSON formats for graphs, states, certificates and monotone specs."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .certificates import CertificateBlock, ConvexityCertificate
from .graph import (
    PsiGraph,
    block_coxeter_matrix,
    build_coxeter_cayley,
    build_cycle,
    build_hypercube,
    cartesian_product,
)
from .monotones import MonotoneSpec, bl_spec, graph_spec, multi_renyi_spec, vidal_spec
from .reflect import ReflectingCut
from .tensor import PureState


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


# -- graphs ---------------------------------------------------------------------------------


def graph_to_dict(graph: PsiGraph) -> dict:
    out = {
        "party_count": graph.party_count,
        "parity": list(graph.parity),
        "edges": [list(e) for e in graph.edges],
    }
    if graph.names:
        out["names"] = list(graph.names)
    return out


def graph_from_dict(d: dict) -> PsiGraph:
    """Explicit ``{"party_count", "parity", "edges"}`` or a ``{"build": recipe}``."""
    if "build" in d:
        return build_from_recipe(d["build"])
    names = tuple(d["names"]) if d.get("names") else None
    edges = tuple(tuple(int(x) for x in e) for e in d["edges"])
    if any(len(e) != 3 for e in edges):
        raise ValueError("every edge must be [u, v, label]")
    return PsiGraph(int(d["party_count"]), tuple(int(p) for p in d["parity"]), edges, names)


def build_from_recipe(r: dict) -> PsiGraph:
    """Graph from a recipe such as ``{"type": "cycle", "n": 3}``.

    Types: ``cycle`` (``n``, optional ``merge``), ``hypercube`` (``q``),
    ``tripartite`` (``n``: two-vertex graph times the ``2n``-cycle),
    ``product`` (``factors``: list of recipes) and ``coxeter`` (``m``: a
    Coxeter matrix, or ``blocks``: a list of them).
    """
    kind = r.get("type")
    if kind == "cycle":
        return build_cycle(int(r["n"]), bool(r.get("merge", False)))
    if kind == "hypercube":
        return build_hypercube(int(r["q"]))
    if kind == "tripartite":
        return cartesian_product(build_cycle(1, merge_parties=True), build_cycle(int(r["n"])))
    if kind == "product":
        factors = [build_from_recipe(f) for f in r["factors"]]
        if not factors:
            raise ValueError("product needs at least one factor")
        g = factors[0]
        for f in factors[1:]:
            g = cartesian_product(g, f)
        return g
    if kind == "coxeter":
        m = block_coxeter_matrix(*r["blocks"]) if "blocks" in r else np.asarray(r["m"])
        return build_coxeter_cayley(m, int(r.get("max_elements", 10000)))
    raise ValueError(f"unknown graph recipe type {kind!r}")


# -- states ---------------------------------------------------------------------------------


def state_to_dict(state: PureState) -> dict:
    v = state.vector
    return {"dims": list(state.dims), "amps": [[float(z.real), float(z.imag)] for z in v]}


def state_from_dict(d: dict) -> PureState:
    amps = np.asarray(d["amps"], dtype=float)
    if amps.ndim != 2 or amps.shape[1] != 2:
        raise ValueError("amps must be a list of [re, im] pairs")
    return PureState(tuple(d["dims"]), amps[:, 0] + 1j * amps[:, 1])


# -- certificates ---------------------------------------------------------------------------


def certificate_to_dict(cert: ConvexityCertificate) -> dict:
    return {
        "label": cert.label,
        "kind": cert.kind,
        "blocks": [
            {
                "involution": list(b.cut.involution),
                "items": list(b.items),
                "matrix": np.asarray(b.matrix, dtype=float).tolist(),
            }
            for b in cert.blocks
        ],
    }


def certificate_from_dict(d: dict) -> ConvexityCertificate:
    """Cuts are rebuilt unchecked; verification re-validates them against the graph."""
    blocks = []
    for b in d["blocks"]:
        cut = ReflectingCut(tuple(int(x) for x in b["involution"]), (), ((), ()))
        items = tuple(int(x) for x in b["items"])
        mat = np.asarray(b["matrix"], dtype=float).reshape(len(items), len(items))
        blocks.append(CertificateBlock(cut, items, mat))
    label = d.get("label")
    return ConvexityCertificate(None if label is None else int(label), blocks, d.get("kind", "edge"))


def certificate_file(graph: PsiGraph, certs) -> dict:
    return {"graph": graph_to_dict(graph), "certificates": [certificate_to_dict(c) for c in certs]}


def load_certificate_file(d: dict) -> tuple[PsiGraph, list[ConvexityCertificate]]:
    graph = graph_from_dict(d["graph"])
    raw = d["certificates"] if "certificates" in d else [d["certificate"]]
    return graph, [certificate_from_dict(c) for c in raw]


# -- monotone specs -------------------------------------------------------------------------


def spec_from_dict(d: dict) -> MonotoneSpec:
    """Monotone spec, e.g. ``{"kind": "graph", "graph": {"build": {...}}, "exponent": "1/8"}``."""
    kind = d["kind"]
    if kind == "vidal":
        return vidal_spec(int(d.get("k", 1)), d.get("party", 0))
    if kind == "graph":
        g = graph_from_dict(d["graph"])
        exp = Fraction(str(d["exponent"])) if "exponent" in d else None
        return graph_spec(g, exp, bool(d.get("certified", True)))
    if kind in ("multi_renyi", "multirenyi"):
        return multi_renyi_spec(int(d["q"]))
    if kind == "bl":
        return bl_spec(d["ranks"], int(d.get("restarts", 4)), int(d.get("seed", 0)))
    raise ValueError(f"unknown monotone kind {kind!r}")
