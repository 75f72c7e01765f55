"""Acceptance gate: one test per criterion, each at its stated tolerance.

A one-line verdict per criterion is printed in the terminal summary.
"""

import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from oracles import brute_force_invariant
from psigraph import fileio
from psigraph.certificates import (
    E3_PRODUCT,
    E3_SYMMETRIC,
    E4_PRODUCT,
    E4_SYMMETRIC,
    certificate_for_product,
    cycle_certificates,
    hypercube_certificate,
    identity_certificate,
    tripartite_certificates,
    verify_certificate,
)
from psigraph.graph import (
    block_coxeter_matrix,
    build_coxeter_cayley,
    build_cycle,
    build_hypercube,
    cartesian_product,
    dihedral_matrix,
)
from psigraph.locc import fuzz_monotonicity, ghz_sweep, tripartite_spec
from psigraph.monotones import (
    CATALOG_FAMILIES,
    bl_monotone,
    composite_ratio_floor,
    draw_composite,
    graph_spec,
    vidal_monotone,
    vidal_spec,
)
from psigraph.reflect import (
    are_isomorphic,
    cut_count_equals_distance,
    enumerate_reflecting_cuts,
    is_edge_reflecting,
)
from psigraph.tensor import convexity_probe, evaluate_invariant, partial_trace, random_state

FIX = Path(__file__).resolve().parent.parent / "fixtures"
K2 = build_cycle(1, merge_parties=True)


def verdict(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def oracle_graphs():
    graphs = {f"C{n}": build_cycle(n) for n in range(1, 5)}
    graphs["C1_merged"] = K2
    graphs.update({f"E{q}": build_hypercube(q) for q in range(1, 4)})
    graphs["C3xC1"] = cartesian_product(build_cycle(3), K2)
    graphs.update({f"C1xC{n}": cartesian_product(K2, build_cycle(n)) for n in range(1, 5)})
    return graphs


def oracle_dims(graph, rng, budget=2**24):
    """Local dims drawn from {2, 3}, lowered to 2 until the oracle grid fits ``budget``."""
    dims = [int(d) for d in rng.integers(2, 4, size=graph.party_count)]
    counts = [len(graph.label_edges(a)) for a in range(graph.party_count)]
    for a in range(graph.party_count):
        if np.prod([float(d) ** c for d, c in zip(dims, counts)]) <= budget:
            break
        dims[a] = 2
    return tuple(dims)


def test_criterion_01_oracle_equivalence():
    # the budget covers the contraction engine; the oracle is timed separately
    spent, oracle_time = 0.0, 0.0
    worst, where = 0.0, None
    for name, g in oracle_graphs().items():
        for s in range(100):
            rng = np.random.default_rng([1, s])
            state = random_state(oracle_dims(g, rng), rng)
            t0 = time.perf_counter()
            z = complex(evaluate_invariant(g, state))
            t1 = time.perf_counter()
            ref = brute_force_invariant(g, state.amplitudes)
            spent, oracle_time = spent + t1 - t0, oracle_time + time.perf_counter() - t1
            err = abs(z - ref) / max(abs(ref), 1e-300)
            if err > worst:
                worst, where = err, (name, s)
    detail = f"worst rel err {worst:.2e} at {where}, evaluation {spent:.1f}s, oracle {oracle_time:.1f}s"
    verdict(1, worst <= 1e-10 and spent < 120, detail)


def test_criterion_02_cycle_closed_form():
    worst = 0.0
    for n in range(1, 7):
        g = build_cycle(n)
        for s in range(20):
            rng = np.random.default_rng([2, n, s])
            state = random_state(tuple(rng.integers(1, 6, size=2)), rng)
            lam = np.linalg.eigvalsh(partial_trace(state, 1).matrix)
            ref = float(np.sum(lam**n))
            worst = max(worst, abs(evaluate_invariant(g, state) - ref) / ref)
    verdict(2, worst <= 1e-10, f"worst rel err {worst:.2e}")


def certificate_suite():
    for n in range(1, 7):
        g, certs = cycle_certificates(n)
        for a, c in certs.items():
            yield f"C{n} label {a}", g, c
    for q, sols in ((3, (E3_PRODUCT, E3_SYMMETRIC)), (4, (E4_PRODUCT, E4_SYMMETRIC))):
        g = build_hypercube(q)
        for i, sol in enumerate(sols):
            for a in g.labels:
                yield f"E{q} solution {i} label {a}", g, hypercube_certificate(q, a, sol)
    for n in range(1, 5):
        cyc = build_cycle(n)
        g = cartesian_product(K2, cyc)
        c = certificate_for_product(K2, identity_certificate(K2, 0), cyc, identity_certificate(cyc, 0))
        yield f"C1xC{n} product label 0", g, c
        g, certs = tripartite_certificates(n)
        for a, c in certs.items():
            yield f"C1xC{n} label {a}", g, c


def test_criterion_03_certificate_suite():
    failures, worst_margin, worst_residual, count = [], np.inf, 0.0, 0
    for name, g, c in certificate_suite():
        r = verify_certificate(g, c)
        count += 1
        worst_margin = min(worst_margin, min(r.psd_margins, default=np.inf))
        worst_residual = max(worst_residual, r.worst_residual)
        if not r.passed or min(r.psd_margins, default=0) < -1e-12 or r.worst_residual > 1e-12:
            failures.append(name)
    verdict(
        3,
        not failures,
        f"{count} certificates, min PSD margin {worst_margin:.2e}, max residual {worst_residual:.2e}, failures {failures}",
    )


def test_criterion_04_cut_combinatorics():
    bad = []
    for name, g, expected in [(f"C{n}", build_cycle(n), n) for n in range(1, 7)] + [
        (f"E{q}", build_hypercube(q), q) for q in range(1, 5)
    ]:
        cuts = enumerate_reflecting_cuts(g)
        if len(cuts) != expected or not cut_count_equals_distance(g).ok:
            bad.append((name, len(cuts)))
    verdict(4, not bad, f"mismatches {bad}")


def test_criterion_05_convexity_probes():
    c3xc1 = cartesian_product(build_cycle(3), K2)
    cases = [("C3", build_cycle(3)), ("C3xC1", c3xc1), ("E3", build_hypercube(3))]
    worst, bad = -np.inf, []
    for name, g in cases:
        for a in g.labels:
            r = convexity_probe(g, a, trials=1000, seed=5)
            worst = max(worst, r.worst_z, r.worst_root)
            if r.violated:
                bad.append((name, a))
    verdict(5, not bad, f"largest midpoint gap {worst:.2e}, violations {bad}")


def test_criterion_06_monotonicity_fuzz():
    specs = [
        (vidal_spec(1), (3, 3)),
        (vidal_spec(2), (3, 3)),
        (graph_spec(build_hypercube(3), Fraction(1, 4)), (2, 2, 2)),
        (tripartite_spec(2), (2, 2, 2)),
        (tripartite_spec(3), (2, 2, 2)),
    ]
    worst = {s.name: fuzz_monotonicity(s, d, trials=1000, seed=6).worst for s, d in specs}
    ctl_json = fileio.read_json(FIX / "spec_broken_exponent.json")
    control = fuzz_monotonicity(fileio.spec_from_dict(ctl_json), ctl_json["dims"], trials=1000, seed=0)
    ok = all(w >= -1e-9 for w in worst.values()) and control.violations > 0
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    verdict(6, ok, f"worst gaps {detail}; control worst {control.worst:.2e} at trial {control.worst_trial}")


def test_criterion_07_ghz_sweep():
    start = time.perf_counter()
    alphas = np.linspace(-1, 1, 81)
    rows = ghz_sweep(alphas)
    elapsed = time.perf_counter() - start
    zero = rows[int(np.argmin(np.abs(alphas)))]
    a = zero.alpha == 0.0 and all(abs(x - 1) <= 1e-12 for x in [zero.p_lower, *zero.uppers()])
    b = all(r.p_lower <= u + 1e-9 for r in rows for u in r.uppers())
    c = any(min(r.p_n.values()) < r.p_vidal - 1e-6 for r in rows)
    d = any(min(r.p_n.values()) < r.p_det - 1e-6 for r in rows)
    # (e) ghz_sweep raises when the three bipartitions disagree by more than 1e-10
    ok = a and b and c and d and elapsed < 60
    verdict(7, ok, f"a={a} b={b} c={c} d={d} e=True, {elapsed:.2f}s")


def test_criterion_08_bipartite_reduction():
    worst = 0.0
    for s in range(100):
        rng = np.random.default_rng([8, s])
        dims = tuple(int(d) for d in rng.integers(2, 5, size=2))
        state = random_state(dims, rng)
        ranks = [int(rng.integers(1, d + 1)) for d in dims]
        got = bl_monotone(state, ranks, seed=s).value
        worst = max(worst, abs(got - vidal_monotone(state, 0, min(ranks))))
    verdict(8, worst <= 1e-9, f"worst deviation {worst:.2e}")


def test_criterion_09_composite_bound():
    worst = np.inf
    for s in range(1000):
        rng = np.random.default_rng([9, s])
        k = int(rng.integers(1, 6))
        xs, xp = rng.uniform(0.01, 1.0, size=k), rng.uniform(0.01, 1.0, size=k)
        gs = [draw_composite(rng, k, fam) for fam in CATALOG_FAMILIES]
        worst = min(worst, composite_ratio_floor(xs, xp, gs).worst)
    verdict(9, worst >= -1e-12, f"worst margin {worst:.2e}")


def test_criterion_10_coxeter():
    bad = []
    for n in range(2, 9):
        g = build_coxeter_cayley(dihedral_matrix(n))
        if not are_isomorphic(g, build_cycle(n)):
            bad.append(f"dihedral {n}")
    blocks = [
        ([[1]], [[1]], K2, K2),
        ([[1]], dihedral_matrix(3), K2, build_cycle(3)),
        (dihedral_matrix(2), dihedral_matrix(4), build_cycle(2), build_cycle(4)),
        (dihedral_matrix(3), [[1]], build_cycle(3), K2),
    ]
    for m1, m2, g1, g2 in blocks:
        g = build_coxeter_cayley(block_coxeter_matrix(m1, m2))
        if not are_isomorphic(g, cartesian_product(g1, g2)):
            bad.append(f"block {np.shape(m1)}+{np.shape(m2)}")
        if not all(is_edge_reflecting(g, a) for a in g.labels):
            bad.append(f"not edge-reflecting {np.shape(m1)}+{np.shape(m2)}")
    for n in range(2, 9):
        g = build_coxeter_cayley(dihedral_matrix(n))
        if not all(is_edge_reflecting(g, a) for a in g.labels):
            bad.append(f"dihedral {n} not edge-reflecting")
    verdict(10, not bad, f"failures {bad}")
