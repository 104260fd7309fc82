"""Fine-grained uncertainty relations and their entropic consequences."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import clifford
from .linalg import as_matrix, frozen, hermitian_eig, is_psd, projector, validate_density

EFFECT_TOL = 1e-10
MAX_SETTINGS = 20


def bitstrings(n: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=n)]


def _check_distribution(p, name: str = "distribution") -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"{name} must be nonnegative and sum to 1, got {p.tolist()}")
    return p


@dataclass(frozen=True)
class MeasurementSet:
    """Two-outcome measurements ``effects[t] = (E_t^0, E_t^1)`` chosen with
    probability ``p_t[t]``."""

    effects: tuple[tuple[np.ndarray, np.ndarray], ...]
    p_t: np.ndarray

    def __post_init__(self):
        effects = tuple(tuple(frozen(as_matrix(e)) for e in pair) for pair in self.effects)
        p_t = _check_distribution(self.p_t, "p_t")
        if len(effects) != p_t.size:
            raise ValueError(f"{len(effects)} measurements but {p_t.size} probabilities")
        dim = effects[0][0].shape[0]
        ident = np.eye(dim)
        for t, pair in enumerate(effects):
            if len(pair) != 2:
                raise ValueError(f"measurement {t} must have exactly two outcomes")
            if any(e.shape != (dim, dim) for e in pair):
                raise ValueError("all effects must act on the same space")
            if np.max(np.abs(pair[0] + pair[1] - ident)) > EFFECT_TOL:
                raise ValueError(f"effects of measurement {t} do not sum to the identity")
            if not all(is_psd(e, EFFECT_TOL) for e in pair):
                raise ValueError(f"measurement {t} has a non-positive effect")
        p_t = p_t.copy()
        p_t.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "p_t", p_t)

    @classmethod
    def from_observables(cls, observables, p_t=None) -> "MeasurementSet":
        observables = list(observables)
        if p_t is None:
            p_t = np.full(len(observables), 1.0 / len(observables))
        return cls(tuple(clifford.effects_from_observable(b) for b in observables), p_t)

    @classmethod
    def from_vectors(cls, vectors, p_t=None) -> "MeasurementSet":
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        gens = clifford.gamma_generators(vectors.shape[1])
        return cls.from_observables([clifford.observable(v, gens) for v in vectors], p_t)

    @property
    def n(self) -> int:
        return len(self.effects)

    @property
    def dim(self) -> int:
        return self.effects[0][0].shape[0]

    def probabilities(self, rho) -> np.ndarray:
        """``[t, b] = tr(E_t^b rho)``."""
        rho = as_matrix(rho)
        return np.array([[np.trace(e @ rho).real for e in pair] for pair in self.effects])

    def certainty(self, rho, x: str) -> float:
        """``sum_t p(t) p(x_t | t)_rho``."""
        _check_string(x, self.n)
        probs = self.probabilities(rho)
        return float(sum(p * probs[t, int(b)] for t, (p, b) in enumerate(zip(self.p_t, x))))


def _check_string(x: str, n: int) -> None:
    if len(x) != n or set(x) - {"0", "1"}:
        raise ValueError(f"expected a bit string of length {n}, got {x!r}")


@dataclass(frozen=True)
class UncertaintyOperator:
    x: str
    operator: np.ndarray


def uncertainty_operator(meas: MeasurementSet, x: str) -> UncertaintyOperator:
    """``Q_x = sum_t p(t) E_t^{x_t}``."""
    _check_string(x, meas.n)
    q = sum(p * pair[int(b)] for p, pair, b in zip(meas.p_t, meas.effects, x))
    return UncertaintyOperator(x, frozen(q))


def zeta(meas: MeasurementSet, x: str, theory: str = "quantum"):
    """Largest achievable certainty for string ``x`` and a state attaining it.

    ``theory="quantum"`` maximises over all density matrices (top eigenvalue
    of the uncertainty operator). ``theory="classical"`` requires diagonal
    effects and maximises over deterministic point masses, which is the
    same as maximising over diagonal (hidden-variable) states.
    """
    q = uncertainty_operator(meas, x).operator
    if theory == "quantum":
        w, v = hermitian_eig(q)
        return float(w[0]), validate_density(projector(v[:, 0]))
    if theory == "classical":
        if np.max(np.abs(q - np.diag(np.diag(q)))) > EFFECT_TOL:
            raise ValueError("classical certainty needs effects diagonal in one basis")
        diag = np.diag(q).real
        k = int(np.argmax(diag))
        point = np.zeros_like(q)
        point[k, k] = 1.0
        return float(diag[k]), validate_density(point)
    raise ValueError(f"unknown theory {theory!r}")


class CliffordBound(NamedTuple):
    zeta: float
    state: np.ndarray
    direction: np.ndarray
    degenerate: bool


def clifford_state(r, gens: clifford.CliffordGenerators | None = None) -> np.ndarray:
    """``(I + r . Gamma) / d`` for a Bloch-like vector ``r`` with ``|r| <= 1``."""
    r = np.asarray(r, dtype=float).ravel()
    gens = gens or clifford.gamma_generators(r.size)
    return (np.eye(gens.dim) + clifford.observable(r, gens)) / gens.dim


def zeta_clifford(b_vectors, p_t, x: str) -> CliffordBound:
    """Closed-form certainty bound for observables ``B_t = b_t . Gamma``.

    With ``v = sum_t p(t) (-1)^{x_t} b_t`` the bound is ``(1 + |v|) / 2`` and
    it is attained by ``(I + v.Gamma/|v|) / d``. When ``v`` vanishes every
    state gives 1/2 and the maximally mixed state is returned with
    ``degenerate=True``.
    """
    b = np.atleast_2d(np.asarray(b_vectors, dtype=float))
    p_t = _check_distribution(p_t, "p_t")
    if b.shape[0] != p_t.size:
        raise ValueError(f"{b.shape[0]} vectors but {p_t.size} probabilities")
    _check_string(x, p_t.size)
    signs = np.array([1.0 if bit == "0" else -1.0 for bit in x])
    v = (p_t * signs) @ b
    c = float(p_t.sum())
    gens = clifford.gamma_generators(b.shape[1])
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        return CliffordBound(c / 2.0, frozen(np.eye(gens.dim) / gens.dim), np.zeros_like(v), True)
    r = v / norm
    state = validate_density(clifford_state(r, gens))
    return CliffordBound((c + norm) / 2.0, state, r, False)


@dataclass(frozen=True)
class FineGrainedRelation:
    """Certainty bounds ``zetas[x]`` for every outcome string, with states
    attaining them."""

    n: int
    p_t: tuple[float, ...]
    zetas: dict[str, float]
    maximizers: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def max_zeta(self) -> float:
        return max(self.zetas.values())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p_t": list(self.p_t),
            "entries": [{"x": x, "zeta": self.zetas[x]} for x in bitstrings(self.n)],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FineGrainedRelation":
        n = int(doc["n"])
        zetas = {e["x"]: float(e["zeta"]) for e in doc["entries"]}
        if sorted(zetas) != bitstrings(n):
            raise ValueError("relation must list every bit string of length n exactly once")
        return cls(n, tuple(float(p) for p in doc["p_t"]), zetas)


def fine_grained_relation(meas: MeasurementSet, theory: str = "quantum") -> FineGrainedRelation:
    if meas.n > MAX_SETTINGS:
        raise ValueError(f"at most {MAX_SETTINGS} settings supported, got {meas.n}")
    zetas, maximizers = {}, {}
    for x in bitstrings(meas.n):
        zetas[x], maximizers[x] = zeta(meas, x, theory)
    return FineGrainedRelation(meas.n, tuple(meas.p_t.tolist()), zetas, maximizers)


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = _check_distribution(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def min_entropy(p) -> float:
    """``-log2 max_x p(x)`` in bits."""
    p = _check_distribution(p)
    return -math.log2(float(np.max(p))) + 0.0


def average_min_entropy(meas: MeasurementSet, rho) -> float:
    """``sum_t p(t) H_min(B_t)_rho``; for uniform ``p(t)`` this is the plain mean."""
    probs = np.clip(meas.probabilities(rho), 0.0, None)
    return float(sum(p * -math.log2(float(np.max(row))) for p, row in zip(meas.p_t, probs))) + 0.0


def min_entropic_bound(meas: MeasurementSet, relation: FineGrainedRelation | None = None,
                       tol: float = 1e-9):
    """Lower bound ``-log2 max_x zeta_x`` on the average min-entropy.

    Returns ``(bound, state)`` where ``state`` is a maximally certain state
    for which the bound holds with equality, or ``None`` if no maximiser is
    tight.
    """
    relation = relation or fine_grained_relation(meas)
    best = relation.max_zeta
    bound = -math.log2(best) + 0.0
    for x in bitstrings(meas.n):
        if relation.zetas[x] < best - tol or x not in relation.maximizers:
            continue
        rho = relation.maximizers[x]
        if abs(average_min_entropy(meas, rho) - bound) <= tol:
            return bound, rho
    return bound, None
