"""Pure states, reduced density matrices and contraction of psi-graph invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .graph import PsiGraph, require_valid
from .reflect import is_parity_symmetric

MAX_INTERMEDIATE = 2**26
NORM_TOL = 1e-9
IMAG_TOL = 1e-9


class ContractionTooLarge(MemoryError):
    pass


class NumericalInvariantError(ArithmeticError):
    """A computed quantity violates an invariant beyond tolerance."""


# -- states -----------------------------------------------------------------------------


@dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.size != int(np.prod(dims)):
            raise ValueError(f"{amps.size} amplitudes do not fit dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps.reshape(dims))

    @property
    def parties(self) -> int:
        return len(self.dims)

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    @property
    def normalized(self) -> bool:
        return abs(self.norm2 - 1.0) <= NORM_TOL

    def normalize(self) -> PureState:
        return PureState(self.dims, self.amplitudes / np.sqrt(self.norm2))


def basis_state(dims: Sequence[int], index: Sequence[int]) -> PureState:
    amps = np.zeros(dims, dtype=complex)
    amps[tuple(index)] = 1.0
    return PureState(dims, amps)


def product_state(*factors) -> PureState:
    """Tensor product of single-party vectors (each normalised)."""
    out = np.array(1.0 + 0j)
    for f in factors:
        f = np.asarray(f, dtype=complex)
        out = np.multiply.outer(out, f / np.linalg.norm(f))
    return PureState(out.shape, out)


def ghz_type(weights: Sequence[complex], parties: int, dim: int = 2) -> PureState:
    """``sum_i w_i |i i ... i>`` normalised."""
    amps = np.zeros((dim,) * parties, dtype=complex)
    for i, w in enumerate(weights):
        amps[(i,) * parties] = w
    return PureState(amps.shape, amps).normalize()


def random_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    """Normalised complex Gaussian amplitudes."""
    shape = tuple(dims)
    amps = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return PureState(shape, amps).normalize()


def apply_local(state: PureState, party: int, op: np.ndarray) -> PureState:
    """Act with ``op`` on one party (``op`` may change that party's dimension)."""
    out = np.moveaxis(np.tensordot(op, state.amplitudes, axes=([1], [party])), 0, party)
    return PureState(out.shape, out)


def apply_product(state: PureState, ops: Sequence[np.ndarray]) -> PureState:
    if len(ops) != state.parties:
        raise ValueError("need one operator per party")
    for a, op in enumerate(ops):
        op = np.asarray(op, dtype=complex)
        if op.ndim != 2 or op.shape[1] != state.dims[a]:
            raise ValueError(f"operator for party {a} has shape {op.shape}")
        state = apply_local(state, a, op)
    return state


@dataclass(frozen=True)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        mat = np.asarray(self.matrix, dtype=complex)
        D = int(np.prod(dims))
        if mat.shape != (D, D):
            raise ValueError(f"matrix shape {mat.shape} does not fit dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        h = (self.matrix + self.matrix.conj().T) / 2
        return np.linalg.eigvalsh(h)[::-1]

    def problems(self, normalized: bool = True) -> list[str]:
        out = []
        if np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) > 1e-10:
            out.append("not Hermitian")
        if normalized and abs(self.trace - 1.0) > NORM_TOL:
            out.append("trace differs from 1")
        if self.eigenvalues()[-1] < -1e-10:
            out.append("negative eigenvalue")
        return out

    def __mul__(self, c):
        return DensityMatrix(self.dims, self.matrix * c)

    __rmul__ = __mul__

    def __add__(self, other):
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return DensityMatrix(self.dims, self.matrix + other.matrix)


def random_density(dims: Sequence[int], rng: np.random.Generator) -> DensityMatrix:
    """Full-rank ``G G^dagger / Tr`` with complex Gaussian ``G``."""
    D = int(np.prod(dims))
    g = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = g @ g.conj().T
    return DensityMatrix(dims, rho / np.trace(rho).real)


def partial_trace(state: PureState, party: int | Iterable[int]) -> DensityMatrix:
    """Trace out ``party`` (one index or several); the rest keep their order."""
    traced = sorted({party} if isinstance(party, (int, np.integer)) else set(party))
    for a in traced:
        if not 0 <= a < state.parties:
            raise IndexError(f"party {a} out of range for {state.parties} parties")
    keep = [a for a in range(state.parties) if a not in traced]
    psi = state.amplitudes
    rho = np.tensordot(psi, psi.conj(), axes=(traced, traced))
    dims = tuple(state.dims[a] for a in keep)
    D = int(np.prod(dims))
    return DensityMatrix(dims, rho.reshape(D, D))


def reduced_density(state: PureState, keep: Iterable[int]) -> DensityMatrix:
    keep = set(keep)
    return partial_trace(state, [a for a in range(state.parties) if a not in keep])


def purify(rho: DensityMatrix, ancilla_dim: int | None = None, position: int = 0) -> PureState:
    """Pure state whose partial trace over the new party at ``position`` is ``rho``.

    The ancilla dimension defaults to the rank of ``rho``; larger values are
    zero-padded.
    """
    h = (rho.matrix + rho.matrix.conj().T) / 2
    evals, evecs = np.linalg.eigh(h)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    evals = np.clip(evals, 0.0, None)
    rank = int(np.sum(evals > 1e-12 * max(1.0, evals[0])))
    rank = max(rank, 1)
    if ancilla_dim is None:
        ancilla_dim = rank
    if ancilla_dim < rank:
        raise ValueError(f"ancilla dimension {ancilla_dim} below rank {rank}")
    keep = min(ancilla_dim, len(evals))
    amps = np.zeros((ancilla_dim, h.shape[0]), dtype=complex)
    amps[:keep] = (np.sqrt(evals[:keep])[:, None] * evecs[:, :keep].T)
    amps = amps.reshape((ancilla_dim,) + rho.dims)
    amps = np.moveaxis(amps, 0, position)
    return PureState(amps.shape, amps)


# -- contraction engine ------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionStep:
    left: int
    right: int
    left_axes: tuple[int, ...]
    right_axes: tuple[int, ...]
    legs: tuple[Hashable, ...]
    size: int


@dataclass(frozen=True)
class ContractionPlan:
    """Pairwise merges; node ``len(inputs) + s`` is the result of step ``s``."""

    inputs: tuple[tuple[Hashable, ...], ...]
    steps: tuple[ContractionStep, ...]
    final: int
    output_perm: tuple[int, ...]
    peak_size: int
    traces: tuple[str | None, ...] = ()


def plan_contraction(
    legs: Sequence[Sequence[Hashable]],
    edge_dims: dict,
    output: Sequence[Hashable] = (),
    max_size: int = MAX_INTERMEDIATE,
) -> ContractionPlan:
    """Greedy pairwise plan.

    Each step merges the two nodes whose result is smallest, ties broken by
    the lowest shared edge (in ``edge_dims`` order).  A leg appearing on two
    nodes is summed; a leg listed in ``output`` must appear once.
    """
    order = {e: i for i, e in enumerate(edge_dims)}
    # a leg listed twice on one node is a trace inside that node, done first
    traces = []
    active = {}
    for i, l in enumerate(legs):
        l = tuple(l)
        once = tuple(x for x in l if l.count(x) == 1)
        if len(once) == len(l):
            traces.append(None)
        else:
            letter = {x: chr(97 + j) for j, x in enumerate(dict.fromkeys(l))}
            traces.append("".join(letter[x] for x in l) + "->" + "".join(letter[x] for x in once))
        active[i] = once
    holders: dict[Hashable, list[int]] = {}
    for i, l in active.items():
        for e in l:
            holders.setdefault(e, []).append(i)

    def size(ls):
        return int(np.prod([edge_dims[e] for e in ls], dtype=np.int64)) if ls else 1

    peak = max((size(l) for l in active.values()), default=1)
    steps = []
    next_id = len(legs)
    while len(active) > 1:
        best = None
        for e, hs in holders.items():
            live = [h for h in hs if h in active]
            if len(live) != 2 or live[0] == live[1]:
                continue
            a, b = sorted(live)
            shared = set(active[a]) & set(active[b])
            out = [x for x in active[a] if x not in shared] + [
                x for x in active[b] if x not in shared
            ]
            key = (size(out), min(order[x] for x in shared), a, b)
            if best is None or key < best[0]:
                best = (key, a, b, shared, out)
        if best is None:
            # disconnected pieces: outer product of the two smallest
            a, b = sorted(active, key=lambda i: (size(active[i]), i))[:2]
            a, b = sorted((a, b))
            shared, out = set(), list(active[a]) + list(active[b])
        else:
            _, a, b, shared, out = best
        sh = sorted(shared, key=order.get)
        la = tuple(active[a].index(x) for x in sh)
        lb = tuple(active[b].index(x) for x in sh)
        s = size(out)
        if s > max_size:
            raise ContractionTooLarge(f"intermediate of {s} entries exceeds cap {max_size}")
        peak = max(peak, s)
        steps.append(ContractionStep(a, b, la, lb, tuple(out), s))
        del active[a], active[b]
        active[next_id] = tuple(out)
        for x in out:
            holders[x].append(next_id)
        next_id += 1
    (final,) = active
    rest = active[final]
    if sorted(map(str, rest)) != sorted(map(str, output)):
        raise ValueError(f"open legs {rest} do not match requested output {tuple(output)}")
    perm = tuple(rest.index(x) for x in output)
    return ContractionPlan(
        tuple(tuple(l) for l in legs), tuple(steps), final, perm, peak, tuple(traces)
    )


def execute_plan(plan: ContractionPlan, tensors: Sequence[np.ndarray]) -> np.ndarray:
    nodes = dict(enumerate(tensors))
    for i, sub in enumerate(plan.traces):
        if sub is not None:
            nodes[i] = np.einsum(sub, nodes[i])
    nid = len(tensors)
    for st in plan.steps:
        nodes[nid] = np.tensordot(
            nodes.pop(st.left), nodes.pop(st.right), axes=(st.left_axes, st.right_axes)
        )
        nid += 1
    out = nodes[plan.final]
    return np.transpose(out, plan.output_perm) if plan.output_perm else out


def contract_network(tensors, legs, edge_dims, output=(), max_size=MAX_INTERMEDIATE):
    plan = plan_contraction(legs, edge_dims, output, max_size)
    return execute_plan(plan, tensors)


# -- invariants ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _checked(graph: PsiGraph) -> tuple[list[dict[int, int]], bool]:
    require_valid(graph)
    return graph.incident_edge(), is_parity_symmetric(graph)


@lru_cache(maxsize=512)
def _state_plan(graph: PsiGraph, dims: tuple[int, ...]) -> ContractionPlan:
    inc, _ = _checked(graph)
    legs = [tuple(inc[v][a] for a in graph.labels) for v in range(graph.num_vertices)]
    edge_dims = {i: dims[a] for i, (_, _, a) in enumerate(graph.edges)}
    return plan_contraction(legs, edge_dims)


def _realify(graph: PsiGraph, z: complex):
    _, symmetric = _checked(graph)
    if not symmetric:
        return complex(z)
    if abs(z.imag) > IMAG_TOL * (1 + abs(z)):
        raise NumericalInvariantError(
            f"parity-symmetric invariant has imaginary part {z.imag:.3e}"
        )
    return float(z.real)


def evaluate_invariant(graph: PsiGraph, state: PureState):
    """Contract one copy of ``state`` per ket and its conjugate per bra.

    Returns a float for graphs isomorphic to their parity flip (whose
    invariant is real) and a complex number otherwise.
    """
    if len(state.dims) != graph.party_count:
        raise ValueError(
            f"state has {len(state.dims)} parties, graph has {graph.party_count} labels"
        )
    plan = _state_plan(graph, state.dims)
    psi = state.amplitudes
    tensors = [psi if p == 0 else psi.conj() for p in graph.parity]
    return _realify(graph, complex(execute_plan(plan, tensors)))


@lru_cache(maxsize=512)
def _density_plan(graph: PsiGraph, label: int, dims: tuple[int, ...]):
    inc, _ = _checked(graph)
    others = [a for a in graph.labels if a != label]
    legs = []
    for e in graph.label_edges(label):
        u, v, _ = graph.edges[e]
        ket, bra = (u, v) if graph.parity[u] == 0 else (v, u)
        legs.append(tuple(inc[ket][a] for a in others) + tuple(inc[bra][a] for a in others))
    full = dict(zip(others, dims))
    edge_dims = {i: full[a] for i, (_, _, a) in enumerate(graph.edges) if a != label}
    return plan_contraction(legs, edge_dims)


def evaluate_on_density(graph: PsiGraph, label: int, rho: DensityMatrix):
    """The invariant as a degree-``n`` function of the density matrix on the ``label`` edges.

    ``rho`` lives on the parties other than ``label`` (in order) and need not
    be normalised.
    """
    if not 0 <= label < graph.party_count:
        raise IndexError(f"label {label} out of range")
    if len(rho.dims) != graph.party_count - 1:
        raise ValueError("density matrix must cover every party except the label")
    plan = _density_plan(graph, label, rho.dims)
    t = rho.matrix.reshape(rho.dims + rho.dims)
    return _realify(graph, complex(execute_plan(plan, [t] * len(plan.inputs))))


def edge_environment(graph: PsiGraph, state: PureState, edge: int) -> np.ndarray:
    """Open the network at ``edge``; ``env[i, j]`` pairs ket index ``i`` with bra index ``j``.

    ``Tr(env @ X)`` is the invariant with operator ``X`` inserted on ``edge``.
    """
    inc, _ = _checked(graph)
    u, v, a = graph.edges[edge]
    ket = u if graph.parity[u] == 0 else v
    legs = []
    for w in range(graph.num_vertices):
        row = []
        for b in graph.labels:
            e = inc[w][b]
            row.append(e if e != edge else (("open", 0) if w == ket else ("open", 1)))
        legs.append(tuple(row))
    edge_dims = {i: state.dims[b] for i, (_, _, b) in enumerate(graph.edges) if i != edge}
    edge_dims[("open", 0)] = state.dims[a]
    edge_dims[("open", 1)] = state.dims[a]
    psi = state.amplitudes
    tensors = [psi if p == 0 else psi.conj() for p in graph.parity]
    return contract_network(tensors, legs, edge_dims, output=(("open", 0), ("open", 1)))


# -- convexity probe ------------------------------------------------------------------------


@dataclass
class ProbeReport:
    trials: int
    worst_z: float
    worst_root: float
    worst_trial: int

    @property
    def violated(self) -> bool:
        return max(self.worst_z, self.worst_root) > 1e-9

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "worst_z": self.worst_z,
            "worst_root": self.worst_root,
            "worst_trial": self.worst_trial,
            "violated": self.violated,
        }


def convexity_probe(
    graph: PsiGraph,
    label: int,
    trials: int = 1000,
    seed: int = 0,
    dim: int = 2,
    functional: Callable[[DensityMatrix], float] | None = None,
) -> ProbeReport:
    """Largest midpoint-convexity gap of ``Z`` and ``Z**(1/n)`` over random mixtures.

    Each trial draws two random density matrices on the non-``label`` parties
    and a mixing weight ``p``, and records
    ``f(p r1 + (1-p) r2) - p f(r1) - (1-p) f(r2)``.  Positive values are
    violations.
    """
    n = graph.degree
    dims = (dim,) * (graph.party_count - 1)
    if functional is None:

        def functional(r):
            return evaluate_on_density(graph, label, r)

    def root(z):
        return np.sign(z) * abs(z) ** (1.0 / n)

    worst_z = worst_r = -np.inf
    worst_t = -1
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        r1, r2 = random_density(dims, rng), random_density(dims, rng)
        p = rng.uniform()
        z1, z2 = np.real(functional(r1)), np.real(functional(r2))
        zm = np.real(functional(p * r1 + (1 - p) * r2))
        gap_z = zm - p * z1 - (1 - p) * z2
        gap_r = root(zm) - p * root(z1) - (1 - p) * root(z2)
        if max(gap_z, gap_r) > max(worst_z, worst_r):
            worst_t = t
        worst_z, worst_r = max(worst_z, gap_z), max(worst_r, gap_r)
    return ProbeReport(trials, float(worst_z), float(worst_r), worst_t)
