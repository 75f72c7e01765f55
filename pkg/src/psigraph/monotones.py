"""Pure-state entanglement monotones and the checks built around them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .graph import PsiGraph, build_hypercube, require_valid
from .reflect import is_parity_symmetric
from .tensor import (
    NumericalInvariantError,
    PureState,
    apply_local,
    contract_network,
    evaluate_invariant,
    _checked,
)

Z_CLAMP = 1e-9
ZERO = 1e-12


def _require_normalized(state: PureState):
    if not state.normalized:
        raise ValueError(f"state is not normalised (squared norm {state.norm2:.12g})")


def _parties(spec) -> tuple[int, ...]:
    return (spec,) if isinstance(spec, (int, np.integer)) else tuple(sorted(spec))


def schmidt_spectrum(state: PureState, party_a) -> np.ndarray:
    """Descending eigenvalues of the reduced state on ``party_a`` (an index or a tuple)."""
    side = _parties(party_a)
    rest = [a for a in range(state.parties) if a not in side]
    psi = np.transpose(state.amplitudes, list(side) + rest)
    da = int(np.prod([state.dims[a] for a in side]))
    s = np.linalg.svd(psi.reshape(da, -1), compute_uv=False)
    return s**2


# -- bipartite family ---------------------------------------------------------------------


def vidal_monotone(state: PureState, party_a, k: int) -> float:
    """One minus the sum of the ``k`` largest Schmidt weights across ``party_a`` | rest."""
    if k < 1:
        raise ValueError("k must be at least 1")
    _require_normalized(state)
    lam = schmidt_spectrum(state, party_a)
    return float(np.clip(1.0 - lam[:k].sum(), 0.0, 1.0))


@dataclass
class KyFanReport:
    top_sum: float
    sampled_max: float
    samples: int

    @property
    def ok(self) -> bool:
        return self.sampled_max <= self.top_sum + 1e-12


def kyfan_crosscheck(rho, k: int, samples: int = 100, seed: int = 0) -> KyFanReport:
    """Sum of the top ``k`` eigenvalues, checked against random rank-``k`` projectors."""
    lam = rho.eigenvalues()
    top = float(lam[:k].sum())
    d = rho.matrix.shape[0]
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(samples):
        g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
        q, _ = np.linalg.qr(g)
        best = max(best, float(np.trace(q.conj().T @ rho.matrix @ q).real))
    return KyFanReport(top, best, samples)


# -- graph family -------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneSpec:
    """Which monotone to compute.

    ``kind`` is one of ``vidal``, ``graph``, ``multi_renyi``, ``bl`` or ``det``.
    Graph-based specs store ``1 - Z**exponent``; a certified spec must use
    ``exponent == 1/n`` with ``n`` the number of ket vertices.  Specs built
    with ``certified=False`` skip that check and exist as negative controls.
    """

    kind: str
    graph: PsiGraph | None = None
    exponent: Fraction | None = None
    party: tuple[int, ...] = (0,)
    k: int = 1
    ranks: tuple[int, ...] = ()
    restarts: int = 4
    seed: int = 0
    matrices: tuple = field(default=(), compare=False)
    certified: bool = True

    def __post_init__(self):
        if self.kind not in ("vidal", "graph", "multi_renyi", "bl", "det"):
            raise ValueError(f"unknown monotone kind {self.kind!r}")
        if self.kind in ("graph", "multi_renyi"):
            if self.graph is None:
                raise ValueError("graph monotone needs a graph")
            require_valid(self.graph)
            if not is_parity_symmetric(self.graph):
                raise ValueError("graph is not parity-symmetric, its invariant is not real")
            n = len(self.graph.ket_vertices)
            exp = Fraction(1, n) if self.exponent is None else Fraction(self.exponent)
            if self.certified and exp != Fraction(1, n):
                raise ValueError(f"certified graph monotone needs exponent 1/{n}, got {exp}")
            object.__setattr__(self, "exponent", exp)
        if self.kind == "vidal" and self.k < 1:
            raise ValueError("k must be at least 1")

    @property
    def name(self) -> str:
        if self.kind == "vidal":
            return f"vidal(k={self.k}, party={list(self.party)})"
        if self.kind in ("graph", "multi_renyi"):
            return f"{self.kind}(exponent={self.exponent})"
        if self.kind == "bl":
            return f"bl(ranks={list(self.ranks)})"
        return "det"

    def evaluate(self, state: PureState) -> float:
        if self.kind == "vidal":
            return vidal_monotone(state, self.party, self.k)
        if self.kind in ("graph", "multi_renyi"):
            return graph_monotone(self, state)
        if self.kind == "bl":
            return bl_monotone(state, self.ranks, self.restarts, self.seed).value
        raise ValueError("the determinant monotone is only available as a same-orbit ratio")


def vidal_spec(k: int, party=0) -> MonotoneSpec:
    return MonotoneSpec("vidal", party=_parties(party), k=k)


def graph_spec(graph: PsiGraph, exponent=None, certified: bool = True) -> MonotoneSpec:
    return MonotoneSpec("graph", graph=graph, exponent=exponent, certified=certified)


def multi_renyi_spec(q: int) -> MonotoneSpec:
    """``1 - Z(E^(q))**(2**(1-q))``."""
    return MonotoneSpec("multi_renyi", graph=build_hypercube(q))


def bl_spec(ranks: Sequence[int], restarts: int = 4, seed: int = 0) -> MonotoneSpec:
    return MonotoneSpec("bl", ranks=tuple(ranks), restarts=restarts, seed=seed)


def clamped_invariant(graph: PsiGraph, state: PureState) -> float:
    """``Z`` clamped into ``[0, 1]``; values beyond the tolerance raise."""
    z = evaluate_invariant(graph, state)
    if isinstance(z, complex):
        raise ValueError("invariant is complex; the graph is not parity-symmetric")
    if z < -Z_CLAMP or z > 1 + Z_CLAMP:
        raise NumericalInvariantError(f"invariant {z!r} outside [0, 1] on a normalised state")
    return min(max(z, 0.0), 1.0)


def graph_monotone(spec, state: PureState) -> float:
    """``1 - Z**exponent`` for a graph spec (or a bare graph, exponent ``1/n``)."""
    if isinstance(spec, PsiGraph):
        spec = graph_spec(spec)
    if spec.graph.party_count != state.parties:
        raise ValueError("graph label count differs from the number of parties")
    _require_normalized(state)
    z = clamped_invariant(spec.graph, state)
    return float(1.0 - min(z ** float(spec.exponent), 1.0))


# -- projector maximisation ---------------------------------------------------------------


def _apply_projectors(state: PureState, frames, skip=None) -> PureState:
    for a, v in enumerate(frames):
        if a != skip:
            state = apply_local(state, a, v @ v.conj().T)
    return state


def _top_frame(h: np.ndarray, k: int) -> np.ndarray:
    h = (h + h.conj().T) / 2
    _, vecs = np.linalg.eigh(h)
    return vecs[:, ::-1][:, :k]


def _haar_frame(d: int, k: int, rng) -> np.ndarray:
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _check_ranks(state: PureState, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != state.parties:
        raise ValueError("need one rank per party")
    for a, (r, d) in enumerate(zip(ranks, state.dims)):
        if not 1 <= r <= d:
            raise ValueError(f"rank {r} for party {a} outside 1..{d}")
    return ranks


@dataclass
class MaximizationResult:
    """Best value over restarts of an alternating ascent.

    The ascent is a heuristic: ``best`` is a lower bound on the true maximum.
    """

    best: float
    restart_values: list[float]
    sweeps: list[int]
    frames: list[np.ndarray] = field(repr=False)
    heuristic: bool = True

    @property
    def spread(self) -> float:
        return float(max(self.restart_values) - min(self.restart_values))

    @property
    def best_restart(self) -> int:
        return int(np.argmax(self.restart_values))


def _alternate(state, ranks, restarts, seed, objective, update, tol, max_sweeps):
    values, sweeps, frames_out = [], [], []
    for r in range(max(restarts, 1)):
        rng = np.random.default_rng([seed, r])
        if r == 0:
            frames = [
                _top_frame(
                    _reduced_on(state.amplitudes, a), ranks[a]
                )
                for a in range(state.parties)
            ]
        else:
            frames = [_haar_frame(d, k, rng) for d, k in zip(state.dims, ranks)]
        val = objective(frames)
        n_sweeps = 0
        for n_sweeps in range(1, max_sweeps + 1):
            for a in range(state.parties):
                frames[a] = update(frames, a)
            new = objective(frames)
            if new - val < tol:
                val = max(val, new)
                break
            val = new
        values.append(float(val))
        sweeps.append(n_sweeps)
        frames_out.append(frames)
    best = int(np.argmax(values))
    return MaximizationResult(values[best], values, sweeps, frames_out[best])


def _reduced_on(psi: np.ndarray, a: int) -> np.ndarray:
    m = np.moveaxis(psi, a, 0).reshape(psi.shape[a], -1)
    return m @ m.conj().T


@dataclass
class BLResult:
    value: float
    overlap: MaximizationResult

    def to_dict(self) -> dict:
        o = self.overlap
        return {
            "value": self.value,
            "best_overlap": o.best,
            "restart_overlaps": o.restart_values,
            "spread": o.spread,
            "sweeps": o.sweeps,
            "heuristic": True,
        }


def bl_monotone(
    state: PureState,
    ranks: Sequence[int],
    restarts: int = 4,
    seed: int = 0,
    tol: float = 1e-10,
    max_sweeps: int = 500,
) -> BLResult:
    """``1 - max |P psi|^2`` over product projectors of the given ranks.

    Block-coordinate ascent: with all other projectors fixed, the best
    projector on one party spans the top eigenvectors of that party's reduced
    state of the partially projected vector.  Restart 0 starts from the top
    eigenvectors of each single-party reduced state (exact for two parties);
    the rest start from Haar-random frames.
    """
    _require_normalized(state)
    ranks = _check_ranks(state, ranks)

    def objective(frames):
        return _apply_projectors(state, frames).norm2

    def update(frames, a):
        phi = _apply_projectors(state, frames, skip=a)
        return _top_frame(_reduced_on(phi.amplitudes, a), ranks[a])

    res = _alternate(state, ranks, restarts, seed, objective, update, tol, max_sweeps)
    return BLResult(float(np.clip(1.0 - res.best, 0.0, 1.0)), res)


def _label_gradient(graph: PsiGraph, phi_open: PureState, frame: np.ndarray, label: int):
    """Derivative of ``Z`` with respect to the projector on ``label``.

    ``phi_open`` carries the projectors on every other party.  The projector
    ``P`` sits on each ``label`` edge; opening one edge at a time and summing
    gives ``S`` with ``Z(P + dP) = Z(P) + Tr(S dP) + ...``.
    """
    inc, _ = _checked(graph)
    proj = frame @ frame.conj().T
    full = apply_local(phi_open, label, proj).amplitudes
    bare = phi_open.amplitudes
    dims = phi_open.dims
    total = np.zeros((dims[label], dims[label]), dtype=complex)
    for e in graph.label_edges(label):
        u, v, _ = graph.edges[e]
        ket = u if graph.parity[u] == 0 else v
        legs, tensors = [], []
        for w in range(graph.num_vertices):
            endpoint = w in (u, v)
            t = bare if endpoint else full
            tensors.append(t if graph.parity[w] == 0 else t.conj())
            row = []
            for b in graph.labels:
                x = inc[w][b]
                row.append(x if x != e else ("open", 0 if w == ket else 1))
            legs.append(tuple(row))
        edge_dims = {i: dims[b] for i, (_, _, b) in enumerate(graph.edges) if i != e}
        edge_dims[("open", 0)] = edge_dims[("open", 1)] = dims[label]
        env = contract_network(tensors, legs, edge_dims, output=(("open", 0), ("open", 1)))
        # with P on the edge the contribution is sum_ij env[i, j] P[j, i]
        total += env
    return total


def projector_maximize(
    graph: PsiGraph,
    ranks: Sequence[int],
    state: PureState,
    restarts: int = 4,
    seed: int = 0,
    tol: float = 1e-12,
    max_sweeps: int = 500,
) -> MaximizationResult:
    """Maximise ``Z(P psi)**(1/n)`` over product projectors ``P`` of the given ranks.

    ``Z`` restricted to one party's projector is convex, so replacing that
    projector by the top eigenspace of the gradient never decreases it.  The
    result is a lower bound on the true maximum.
    """
    require_valid(graph)
    ranks = _check_ranks(state, ranks)
    n = len(graph.ket_vertices)

    def objective(frames):
        z = evaluate_invariant(graph, _apply_projectors(state, frames))
        return float(np.real(z))

    def update(frames, a):
        phi = _apply_projectors(state, frames, skip=a)
        grad = _label_gradient(graph, phi, frames[a], a)
        return _top_frame(grad, ranks[a])

    res = _alternate(state, ranks, restarts, seed, objective, update, tol, max_sweeps)
    root = [max(v, 0.0) ** (1.0 / n) for v in res.restart_values]
    return MaximizationResult(max(root), root, res.sweeps, res.frames)


# -- determinant monotone -------------------------------------------------------------------


@dataclass
class DetRatio:
    raw: float
    capped: float


def unit_determinant(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    d = m.shape[0]
    if m.ndim != 2 or m.shape != (d, d):
        raise ValueError(f"matrix of shape {m.shape} is not square")
    det = np.linalg.det(m)
    scale = max(np.linalg.norm(m, 2), 1e-300) ** d
    if abs(det) < 1e-14 * scale:
        raise ValueError("matrix is singular")
    return m / det ** (1.0 / d)


def det_ratio(psi0: PureState, ms: Sequence[np.ndarray]) -> DetRatio:
    """Squared norm of ``(M_1 x ... x M_q) psi0`` after scaling every ``M`` to unit determinant.

    For ``phi`` proportional to that vector this is the ratio of the
    determinant monotone at ``psi0`` and at ``phi``; the orbit constant cancels.
    """
    if len(ms) != psi0.parties:
        raise ValueError("need one matrix per party")
    for a, m in enumerate(ms):
        if np.shape(m) != (psi0.dims[a], psi0.dims[a]):
            raise ValueError(f"matrix for party {a} has shape {np.shape(m)}")
    out = psi0
    for a, m in enumerate(ms):
        out = apply_local(out, a, unit_determinant(m))
    raw = out.norm2
    return DetRatio(raw, min(raw, 1.0))


# -- majorization -------------------------------------------------------------------------------


def can_convert_with_certainty(psi: PureState, phi: PureState, party_a=0) -> bool:
    """Deterministic conversion test across ``party_a`` | rest.

    True when every ``1 - (sum of top k Schmidt weights)`` of ``psi`` is at
    least that of ``phi``; a ratio ``0/0`` counts as satisfied.
    """
    if psi.dims != phi.dims:
        raise ValueError("states have different dimensions")
    _require_normalized(psi)
    _require_normalized(phi)
    lp, lf = schmidt_spectrum(psi, party_a), schmidt_spectrum(phi, party_a)
    for k in range(1, len(lp) + 1):
        a = max(1.0 - lp[:k].sum(), 0.0)
        b = max(1.0 - lf[:k].sum(), 0.0)
        if b <= ZERO:
            continue
        if a / b < 1 - 1e-12:
            return False
    return True


# -- composite functionals ----------------------------------------------------------------------

CATALOG_VERSION = 1
CATALOG_FAMILIES = ("weighted_sum", "power_mean", "min_linear", "geometric_mean", "sqrt_sum")


@dataclass(frozen=True)
class CompositeFunctional:
    """A positive, non-decreasing, concave function of a positive vector."""

    family: str
    weights: tuple[float, ...]
    power: float = 1.0
    rows: tuple[tuple[float, ...], ...] = ()

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        w = np.asarray(self.weights)
        if self.family == "weighted_sum":
            return float(w @ x)
        if self.family == "power_mean":
            return float((w @ x**self.power) ** (1.0 / self.power))
        if self.family == "min_linear":
            return float(min(np.asarray(r) @ x for r in self.rows))
        if self.family == "geometric_mean":
            return float(np.prod(x**w))
        if self.family == "sqrt_sum":
            return float(np.sqrt(w @ x))
        raise ValueError(f"unknown family {self.family!r}")


def draw_composite(rng: np.random.Generator, k: int, family: str | None = None) -> CompositeFunctional:
    """Random member of the catalog; weights of means are normalised to sum to one."""
    if family is None:
        family = CATALOG_FAMILIES[rng.integers(len(CATALOG_FAMILIES))]
    w = rng.uniform(0.05, 1.0, size=k)
    if family in ("power_mean", "geometric_mean"):
        w = w / w.sum()
    if family == "power_mean":
        return CompositeFunctional(family, tuple(w), power=float(rng.uniform(0.01, 1.0)))
    if family == "min_linear":
        rows = tuple(tuple(rng.uniform(0.05, 1.0, size=k)) for _ in range(rng.integers(2, 5)))
        return CompositeFunctional(family, tuple(w), rows=rows)
    return CompositeFunctional(family, tuple(w))


@dataclass
class CompositeReport:
    margins: list[float]

    @property
    def worst(self) -> float:
        return float(min(self.margins)) if self.margins else float("inf")

    @property
    def ok(self) -> bool:
        return self.worst >= -1e-12


def composite_ratio_floor(
    xs, xs_prime, g_samples: Sequence[Callable[[np.ndarray], float]]
) -> CompositeReport:
    """Margins ``G(xs)/G(xs') - min(min_i xs_i/xs'_i, 1)`` for each ``G``."""
    xs = np.asarray(xs, dtype=float)
    xp = np.asarray(xs_prime, dtype=float)
    if xs.shape != xp.shape or np.any(xs <= 0) or np.any(xp <= 0):
        raise ValueError("need equal-length positive vectors")
    floor = min(float(np.min(xs / xp)), 1.0)
    return CompositeReport([g(xs) / g(xp) - floor for g in g_samples])
