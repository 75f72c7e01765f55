import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from oracles import brute_force_invariant, reduced_spectrum, realignment_power_trace
from psigraph.graph import GraphError, PsiGraph, build_cycle, build_hypercube, cartesian_product
from psigraph.reflect import enumerate_reflecting_cuts
from psigraph.tensor import (
    ContractionTooLarge,
    DensityMatrix,
    PureState,
    basis_state,
    contract_network,
    convexity_probe,
    evaluate_invariant,
    evaluate_on_density,
    ghz_type,
    partial_trace,
    plan_contraction,
    product_state,
    purify,
    random_density,
    random_state,
)

K2 = build_cycle(1, merge_parties=True)

# four parties, three kets; not isomorphic to its parity flip
CHIRAL = PsiGraph(
    4,
    (0, 0, 0, 1, 1, 1),
    (
        (0, 5, 0), (1, 3, 0), (2, 4, 0),
        (0, 3, 1), (1, 5, 1), (2, 4, 1),
        (0, 4, 2), (1, 5, 2), (2, 3, 2),
        (0, 4, 3), (1, 3, 3), (2, 5, 3),
    ),
)

SMALL_GRAPHS = {
    "C1": build_cycle(1),
    "C2": build_cycle(2),
    "C3": build_cycle(3),
    "C4": build_cycle(4),
    "E2": build_hypercube(2),
    "E3": build_hypercube(3),
    "K2xC1": cartesian_product(K2, build_cycle(1)),
    "K2xC2": cartesian_product(K2, build_cycle(2)),
    "K2xC3": cartesian_product(K2, build_cycle(3)),
    "C2xC1": cartesian_product(build_cycle(2), build_cycle(1)),
    "chiral": CHIRAL,
}


@st.composite
def states(draw, parties=None, max_dim=3):
    q = parties or draw(st.integers(1, 3))
    dims = tuple(draw(st.lists(st.integers(1, max_dim), min_size=q, max_size=q)))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_state(dims, np.random.default_rng(seed))


# -- states -------------------------------------------------------------------------------


def test_state_shape_checked():
    with pytest.raises(ValueError):
        PureState((2, 2), np.ones(3))


def test_normalized_flag():
    assert PureState((2,), [1, 0]).normalized
    assert not PureState((2,), [1, 1]).normalized
    assert PureState((2,), [1, 1]).normalize().normalized


def test_partial_trace_of_product_is_projector():
    rho = partial_trace(basis_state((2, 2), (0, 0)), 0)
    assert np.allclose(rho.matrix, [[1, 0], [0, 0]])


def test_partial_trace_of_bell_is_maximally_mixed():
    bell = ghz_type([1, 1], 2)
    assert np.allclose(partial_trace(bell, 0).matrix, np.eye(2) / 2)


def test_partial_trace_weighted_ghz_spectrum():
    # diagonalising by hand: the reduced state on BC is diag(4/5, 0, 0, 1/5)
    rho = partial_trace(ghz_type([2, 1], 3), 0)
    assert rho.dims == (2, 2)
    assert np.allclose(rho.eigenvalues()[:2], [0.8, 0.2])
    assert np.allclose(rho.eigenvalues()[2:], 0)


def test_partial_trace_out_of_range():
    with pytest.raises(IndexError):
        partial_trace(ghz_type([1, 1], 2), 2)


@given(states())
@settings(max_examples=50, deadline=None)
def test_partial_trace_is_psd_with_trace_norm(state):
    scaled = PureState(state.dims, 1.7 * state.amplitudes)
    for a in range(state.parties):
        rho = partial_trace(scaled, a)
        assert rho.problems(normalized=False) == []
        assert rho.trace == pytest.approx(scaled.norm2, rel=1e-12)


def test_partial_trace_several_parties():
    s = random_state((2, 3, 2), np.random.default_rng(3))
    rho = partial_trace(s, [0, 2])
    assert rho.dims == (3,)
    assert np.allclose(rho.eigenvalues(), np.sort(reduced_spectrum(s.amplitudes, 1))[::-1])


def test_purify_maximally_mixed():
    rho = DensityMatrix((2,), np.eye(2) / 2)
    psi = purify(rho)
    assert psi.dims == (2, 2)
    assert np.allclose(partial_trace(psi, 0).matrix, rho.matrix)
    # Bell-equivalent: both Schmidt weights are 1/2
    assert np.allclose(reduced_spectrum(psi.amplitudes, 0), [0.5, 0.5])


def test_purify_pure_gives_product():
    psi = purify(DensityMatrix((2,), [[1, 0], [0, 0]]))
    assert psi.dims == (1, 2)
    assert np.allclose(reduced_spectrum(psi.amplitudes, 1), [1])


@pytest.mark.parametrize("seed", range(5))
def test_purify_round_trip(seed):
    rho = random_density((2, 3), np.random.default_rng(seed))
    psi = purify(rho, position=1)
    back = partial_trace(psi, 1)
    assert np.linalg.norm(back.matrix - rho.matrix) < 1e-9


def test_purify_padding_and_rank_check():
    rho = DensityMatrix((3,), np.diag([0.5, 0.5, 0]))
    assert purify(rho).dims == (2, 3)
    assert purify(rho, ancilla_dim=4).dims == (4, 3)
    with pytest.raises(ValueError):
        purify(rho, ancilla_dim=1)


# -- contraction engine ---------------------------------------------------------------------


def test_contract_network_matches_einsum():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 3, 4))
    b = rng.standard_normal((4, 5))
    c = rng.standard_normal((5, 3, 6))
    out = contract_network(
        [a, b, c],
        [("i", "j", "k"), ("k", "l"), ("l", "j", "m")],
        {"i": 2, "j": 3, "k": 4, "l": 5, "m": 6},
        output=("m", "i"),
    )
    assert np.allclose(out, np.einsum("ijk,kl,ljm->mi", a, b, c))


def test_plan_is_deterministic_and_capped():
    legs = [("a", "b"), ("b", "c"), ("c", "a")]
    dims = {"a": 8, "b": 8, "c": 8}
    assert plan_contraction(legs, dims) == plan_contraction(legs, dims)
    with pytest.raises(ContractionTooLarge):
        plan_contraction([("a", "x"), ("x", "b")], {"a": 100, "x": 2, "b": 100}, ("a", "b"), 50)


def test_repeated_leg_is_traced():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 3, 2))
    b = rng.standard_normal(2)
    out = contract_network([a, b], [("x", "x", "y"), ("y",)], {"x": 3, "y": 2})
    assert out == pytest.approx(np.einsum("xxy,y->", a, b))


def test_plan_consumes_every_edge():
    g = build_hypercube(3)
    inc = g.incident_edge()
    legs = [tuple(inc[v][a] for a in g.labels) for v in range(g.num_vertices)]
    plan = plan_contraction(legs, {i: 2 for i in range(len(g.edges))})
    assert len(plan.steps) == g.num_vertices - 1
    assert plan.steps[-1].legs == ()


# -- invariants -------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(SMALL_GRAPHS))
def test_product_state_gives_one(name):
    g = SMALL_GRAPHS[name]
    rng = np.random.default_rng(1)
    factors = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in g.labels]
    z = evaluate_invariant(g, product_state(*factors))
    assert abs(z - 1) < 1e-12


@pytest.mark.parametrize("n", range(1, 7))
def test_cycle_is_power_trace(n):
    rng = np.random.default_rng(n)
    s = random_state((3, 4), rng)
    expected = np.sum(reduced_spectrum(s.amplitudes, 0) ** n)
    assert evaluate_invariant(build_cycle(n), s) == pytest.approx(expected, rel=1e-10)


def test_bell_purity():
    assert evaluate_invariant(build_cycle(2), ghz_type([1, 1], 2)) == pytest.approx(0.5)


def test_cube_on_ghz():
    # brute-force oracle value, and by hand: sum of p_i^4 over GHZ weights p = (1/2, 1/2)
    ghz = ghz_type([1, 1], 3)
    assert evaluate_invariant(build_hypercube(3), ghz) == pytest.approx(0.125, abs=1e-14)
    assert brute_force_invariant(build_hypercube(3), ghz.amplitudes) == pytest.approx(0.125)


def test_cube_on_weighted_ghz():
    # p = (4/5, 1/5): 0.4096 + 0.0016
    z = evaluate_invariant(build_hypercube(3), ghz_type([2, 1], 3))
    assert z == pytest.approx(0.4112, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tripartite_family_is_realigned_power_trace(n):
    s = random_state((2, 3, 2), np.random.default_rng(7 + n))
    z = evaluate_invariant(cartesian_product(K2, build_cycle(n)), s)
    assert z == pytest.approx(realignment_power_trace(s.amplitudes, n).real, rel=1e-10)


@pytest.mark.parametrize("name", sorted(SMALL_GRAPHS))
def test_matches_brute_force(name):
    g = SMALL_GRAPHS[name]
    rng = np.random.default_rng(11)
    for _ in range(3):
        dims = tuple(int(d) for d in rng.integers(1, 4, size=g.party_count))
        if np.prod([dims[a] for _, _, a in g.edges], dtype=float) > 2**20:
            dims = (2,) * g.party_count
        s = random_state(dims, rng)
        z = complex(evaluate_invariant(g, s))
        zb = brute_force_invariant(g, s.amplitudes)
        assert abs(z - zb) <= 1e-10 * max(1.0, abs(zb))


def test_chiral_graph_is_complex():
    s = random_state((2, 2, 2, 2), np.random.default_rng(0))
    z = evaluate_invariant(CHIRAL, s)
    assert isinstance(z, complex)
    assert abs(z.imag) > 1e-6
    assert z == pytest.approx(brute_force_invariant(CHIRAL, s.amplitudes), rel=1e-10)


@pytest.mark.parametrize("name", ["C3", "E3", "K2xC2", "C2xC1"])
def test_symmetric_graphs_are_real_and_nonnegative(name):
    g = SMALL_GRAPHS[name]
    assert enumerate_reflecting_cuts(g)
    rng = np.random.default_rng(5)
    for _ in range(200):
        s = random_state((2,) * g.party_count, rng)
        z = evaluate_invariant(g, s)
        assert isinstance(z, float)
        assert z >= -1e-9


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate_invariant(build_cycle(2), ghz_type([1, 1], 3))


def test_invalid_graph_rejected():
    bad = PsiGraph(1, (0, 0), ((0, 1, 0),))
    with pytest.raises(GraphError):
        evaluate_invariant(bad, PureState((2,), [1, 0]))


# -- density route ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["C3", "E3", "K2xC2", "C2xC1"])
def test_density_route_matches_pure_route(name):
    g = SMALL_GRAPHS[name]
    rng = np.random.default_rng(2)
    s = random_state(tuple(int(d) for d in rng.integers(2, 4, size=g.party_count)), rng)
    z = evaluate_invariant(g, s)
    for label in g.labels:
        zd = evaluate_on_density(g, label, partial_trace(s, label))
        assert abs(zd - z) <= 1e-10


def test_density_of_two_cycle_is_purity():
    rng = np.random.default_rng(4)
    h = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = h + h.conj().T
    rho = DensityMatrix((3,), h)
    assert evaluate_on_density(build_cycle(2), 0, rho) == pytest.approx(np.trace(h @ h).real)


@pytest.mark.parametrize("name", ["C3", "E3", "K2xC3"])
def test_density_route_is_homogeneous(name):
    g = SMALL_GRAPHS[name]
    rho = random_density((2,) * (g.party_count - 1), np.random.default_rng(1))
    z1 = evaluate_on_density(g, 0, rho)
    z2 = evaluate_on_density(g, 0, 2 * rho)
    assert z2 == pytest.approx(2**g.degree * z1, rel=1e-12)


def test_density_dims_checked():
    with pytest.raises(ValueError):
        evaluate_on_density(build_hypercube(3), 0, DensityMatrix((2,), np.eye(2) / 2))


# -- convexity probe -------------------------------------------------------------------------


def test_probe_cycle():
    report = convexity_probe(build_cycle(3), 0, trials=1000, seed=0)
    assert not report.violated


def test_probe_product_graph():
    g = cartesian_product(build_cycle(3), build_cycle(1))
    report = convexity_probe(g, 0, trials=500, seed=0)
    assert not report.violated


def test_probe_detects_concave_control():
    g = build_cycle(3)
    report = convexity_probe(
        g, 0, trials=50, seed=0, functional=lambda r: -evaluate_on_density(g, 0, r)
    )
    assert report.violated
    assert report.worst_z > 1e-6
