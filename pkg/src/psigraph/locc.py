"""SLOCC deformations, transition-probability bounds and LOCC monotonicity fuzzing."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import build_cycle, cartesian_product
from .monotones import MonotoneSpec, det_ratio, graph_spec, schmidt_spectrum
from .tensor import NumericalInvariantError, PureState, apply_local, apply_product, random_state

PRUNE = 1e-14
ZERO = 1e-12


@dataclass(frozen=True)
class KrausInstrument:
    party: int
    operators: tuple[np.ndarray, ...] = field(compare=False)

    def completeness_residual(self) -> float:
        ops = self.operators
        s = sum(e.conj().T @ e for e in ops)
        return float(np.linalg.norm(s - np.eye(s.shape[0])))


@dataclass
class Ensemble:
    probabilities: list[float]
    states: list[PureState]

    def __len__(self):
        return len(self.states)

    def problems(self) -> list[str]:
        out = []
        if any(p < 0 for p in self.probabilities):
            out.append("negative probability")
        if abs(sum(self.probabilities) - 1.0) > 1e-10:
            out.append("probabilities do not sum to one")
        if not all(s.normalized for s in self.states):
            out.append("unnormalised member state")
        return out


def slocc_apply(state: PureState, ms: Sequence[np.ndarray]) -> tuple[PureState, float]:
    """Normalised ``(M_1 x ... x M_q) psi`` and its squared norm before normalising."""
    out = apply_product(state, ms)
    n2 = out.norm2
    if n2 <= ZERO:
        raise ValueError("local operators annihilate the state")
    return out.normalize(), n2


def lower_bound(state: PureState, ms: Sequence[np.ndarray]) -> float:
    """Success probability of the one-shot protocol with each ``M`` scaled to unit top singular value."""
    scaled = []
    for m in ms:
        s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
        if s[-1] <= ZERO * s[0]:
            raise ValueError("matrix is singular")
        scaled.append(np.asarray(m, dtype=complex) / s[0])
    return apply_product(state, scaled).norm2


@dataclass
class UpperBound:
    bound: float
    raw: float
    status: str
    before: float
    after: float


def upper_bound(spec: MonotoneSpec, psi: PureState, phi: PureState) -> UpperBound:
    """``min(nu(psi)/nu(phi), 1)``.

    ``status`` is ``ok``, ``target-unentangled`` (``nu(phi)`` is zero, bound
    1) or ``indeterminate`` (both zero, bound 1).
    """
    a, b = spec.evaluate(psi), spec.evaluate(phi)
    if b <= ZERO:
        status = "indeterminate" if a <= ZERO else "target-unentangled"
        return UpperBound(1.0, float("inf") if a > ZERO else float("nan"), status, a, b)
    return UpperBound(min(a / b, 1.0), a / b, "ok", a, b)


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``rows x cols`` isometry (QR with phase-fixed diagonal)."""
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_instrument(d: int, outcomes: int, seed, party: int = 0) -> KrausInstrument:
    """``outcomes`` Kraus operators cut from one Haar isometry ``C^d -> C^(d*outcomes)``."""
    if d < 1 or outcomes < 1:
        raise ValueError("need d >= 1 and outcomes >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = haar_isometry(d * outcomes, d, rng)
    return KrausInstrument(party, tuple(v[i * d : (i + 1) * d] for i in range(outcomes)))


def apply_instrument(state: PureState, instrument: KrausInstrument) -> Ensemble:
    """Outcome probabilities and post-measurement states; outcomes below ``1e-14`` are dropped."""
    a = instrument.party
    probs, states = [], []
    for e in instrument.operators:
        if e.shape[1] != state.dims[a]:
            raise ValueError(f"operator acts on dimension {e.shape[1]}, party has {state.dims[a]}")
        out = apply_local(state, a, e)
        p = out.norm2
        if p < PRUNE:
            continue
        probs.append(p)
        states.append(out.normalize())
    total = sum(probs)
    if abs(total - state.norm2) > 1e-10:
        raise NumericalInvariantError(f"outcome probabilities sum to {total!r}")
    return Ensemble(probs, states)


@dataclass
class FuzzReport:
    spec: str
    trials: int
    seed: int
    worst: float
    worst_trial: int
    violations: int
    gaps: list[float] = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.worst >= -1e-9

    def to_dict(self) -> dict:
        g = np.asarray(self.gaps)
        return {
            "spec": self.spec,
            "trials": self.trials,
            "seed": self.seed,
            "worst_gap": self.worst,
            "worst_trial": self.worst_trial,
            "violations": self.violations,
            "ok": self.ok,
            "gap_summary": {
                "min": float(g.min()),
                "median": float(np.median(g)),
                "mean": float(g.mean()),
                "max": float(g.max()),
            },
        }


def fuzz_monotonicity(
    spec: MonotoneSpec, dims: Sequence[int], trials: int = 1000, seed: int = 0
) -> FuzzReport:
    """Draw random (state, party, instrument) triples and record ``nu(psi) - sum_i p_i nu(psi_i)``.

    Trial ``t`` uses its own generator seeded by ``(seed, t)``.  A negative
    gap below ``-1e-9`` is a violation.
    """
    dims = tuple(dims)
    gaps = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        psi = random_state(dims, rng)
        party = int(rng.integers(len(dims)))
        outcomes = int(rng.integers(2, 5))
        inst = random_instrument(dims[party], outcomes, rng, party=party)
        ens = apply_instrument(psi, inst)
        after = sum(p * spec.evaluate(s) for p, s in zip(ens.probabilities, ens.states))
        gaps.append(spec.evaluate(psi) - after)
    worst = int(np.argmin(gaps))
    return FuzzReport(
        spec.name,
        trials,
        seed,
        float(gaps[worst]),
        worst,
        int(np.sum(np.asarray(gaps) < -1e-9)),
        gaps,
    )


# -- three-qubit sweep ------------------------------------------------------------------------

SWEEP_K = np.array([[1.0, 1.0], [-2.0, -1.0]])


def sweep_source() -> PureState:
    """``(2|000> + |111>)/sqrt(5)``."""
    amps = np.zeros((2, 2, 2), dtype=complex)
    amps[0, 0, 0], amps[1, 1, 1] = 2.0, 1.0
    return PureState((2, 2, 2), amps / np.sqrt(5))


def sweep_deformation(alpha: float) -> np.ndarray:
    """``exp(alpha K)`` in closed form; ``K @ K = -I``."""
    return np.cos(alpha) * np.eye(2) + np.sin(alpha) * SWEEP_K


def tripartite_spec(n: int) -> MonotoneSpec:
    """``1 - Z**(1/(2n))`` for the product of the two-vertex graph with the ``2n``-cycle."""
    return graph_spec(cartesian_product(build_cycle(1, merge_parties=True), build_cycle(n)))


@dataclass
class SweepRow:
    alpha: float
    p_lower: float
    p_det: float
    p_vidal: float
    p_n: dict[int, float]

    def uppers(self) -> list[float]:
        return [self.p_det, self.p_vidal, *self.p_n.values()]

    def problems(self) -> list[str]:
        out = []
        if any(self.p_lower > u + 1e-9 for u in self.uppers()):
            out.append(f"lower bound exceeds an upper bound at alpha={self.alpha}")
        if any(not -1e-9 <= x <= 1 + 1e-9 for x in [self.p_lower, *self.uppers()]):
            out.append(f"entry outside [0, 1] at alpha={self.alpha}")
        return out


def _vidal_ratio(psi, phi, party) -> float:
    lp, lf = schmidt_spectrum(psi, party), schmidt_spectrum(phi, party)
    ratios = []
    for k in (1, 2):
        a, b = max(1 - lp[:k].sum(), 0.0), max(1 - lf[:k].sum(), 0.0)
        if b > ZERO:
            ratios.append(a / b)
    return min(min(ratios, default=1.0), 1.0)


def ghz_sweep(alphas: Sequence[float], ns: Sequence[int] = (2, 3, 4)) -> list[SweepRow]:
    """Bounds on converting the sweep source into its ``exp(alpha K)`` deformation."""
    psi = sweep_source()
    specs = {n: tripartite_spec(n) for n in ns}
    before = {n: specs[n].evaluate(psi) for n in ns}
    rows = []
    for alpha in alphas:
        m = sweep_deformation(alpha)
        phi, _ = slocc_apply(psi, [m] * 3)
        p_vidal = [_vidal_ratio(psi, phi, a) for a in range(3)]
        if max(p_vidal) - min(p_vidal) > 1e-10:
            raise NumericalInvariantError(f"bipartitions disagree at alpha={alpha}: {p_vidal}")
        p_n = {}
        for n in ns:
            after = specs[n].evaluate(phi)
            p_n[n] = 1.0 if after <= ZERO else min(before[n] / after, 1.0)
        row = SweepRow(
            float(alpha),
            lower_bound(psi, [m] * 3),
            det_ratio(psi, [m] * 3).capped,
            p_vidal[0],
            p_n,
        )
        bad = row.problems()
        if bad:
            raise NumericalInvariantError("; ".join(bad))
        rows.append(row)
    return rows


def sweep_csv(rows: Sequence[SweepRow], ns: Sequence[int] = (2, 3, 4)) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "p_lower", "p_det", "p_vidal"] + [f"p_n{n}" for n in ns])
    for r in rows:
        vals = [r.alpha, r.p_lower, r.p_det, r.p_vidal] + [r.p_n[n] for n in ns]
        w.writerow([repr(float(v)) for v in vals])
    return buf.getvalue()
