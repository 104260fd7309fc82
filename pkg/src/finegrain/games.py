"""XOR games and their values under quantum, classical and no-signalling
strategies.

A game is stored through its answer strings: for Alice's setting ``s`` and
answer ``a`` the string ``answers[s, a]`` lists, for every question ``t``,
the unique answer with which Bob wins.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import clifford
from .linalg import as_matrix, maximally_entangled, tensor_product, validate_density
from .models import NoSignallingBox, is_no_signalling
from .steering import Ensemble, steer
from .uncertainty import FineGrainedRelation, MeasurementSet, bitstrings, clifford_state

PROB_TOL = 1e-12
MAX_CLASSICAL_ASSIGNMENTS = 2**20


def _distribution(p, name: str) -> np.ndarray:
    p = np.array(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"{name} must be nonnegative and sum to 1, got {p.tolist()}")
    p.setflags(write=False)
    return p


def _bits(x: str) -> list[int]:
    if set(x) - {"0", "1"}:
        raise ValueError(f"not a bit string: {x!r}")
    return [int(c) for c in x]


@dataclass(frozen=True)
class XorPredicate:
    """Generic XOR rule: ``table[s, t, c] = V(c | s, t)`` for ``c = a xor b``."""

    p_s: np.ndarray
    p_t: np.ndarray
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_s", _distribution(self.p_s, "p_s"))
        object.__setattr__(self, "p_t", _distribution(self.p_t, "p_t"))
        t = np.asarray(self.table, dtype=float)
        if t.shape != (self.p_s.size, self.p_t.size, 2):
            raise ValueError(f"predicate table has shape {t.shape}")
        object.__setattr__(self, "table", t)

    def weights(self) -> tuple[float, np.ndarray]:
        """Split the winning probability as ``const + 1/2 sum W[s,t] <A_s B_t>``."""
        pst = np.outer(self.p_s, self.p_t)
        const = 0.5 * float(np.sum(pst * self.table.sum(axis=2)))
        w = pst * (self.table[:, :, 0] - self.table[:, :, 1])
        return const, w


@dataclass(frozen=True)
class XorGame:
    settings_a: tuple[str, ...]
    settings_b: tuple[str, ...]
    p_s: np.ndarray
    p_t: np.ndarray
    answers: np.ndarray  # uint8, shape (|S|, 2, |T|)

    def __post_init__(self):
        object.__setattr__(self, "settings_a", tuple(str(s) for s in self.settings_a))
        object.__setattr__(self, "settings_b", tuple(str(t) for t in self.settings_b))
        p_s = _distribution(self.p_s, "p_s")
        p_t = _distribution(self.p_t, "p_t")
        ans = np.array(self.answers, dtype=np.uint8)
        ns, nt = len(self.settings_a), len(self.settings_b)
        if p_s.size != ns or p_t.size != nt:
            raise ValueError("setting distributions do not match the setting labels")
        if ans.shape != (ns, 2, nt):
            raise ValueError(f"answers must have shape ({ns}, 2, {nt}), got {ans.shape}")
        if np.any(ans > 1):
            raise ValueError("answer strings must be binary")
        if np.any(ans[:, 0, :] == ans[:, 1, :]):
            raise ValueError("the two answer strings of each setting must be complements")
        ans.setflags(write=False)
        object.__setattr__(self, "p_s", p_s)
        object.__setattr__(self, "p_t", p_t)
        object.__setattr__(self, "answers", ans)

    @property
    def n_alice(self) -> int:
        return len(self.settings_a)

    @property
    def n_bob(self) -> int:
        return len(self.settings_b)

    def answer(self, s: int, a: int) -> str:
        return "".join(str(int(b)) for b in self.answers[s, a])

    def predicate(self) -> np.ndarray:
        """``V[s, t, a, b]`` as a 0/1 array."""
        v = np.zeros((self.n_alice, self.n_bob, 2, 2))
        for s in range(self.n_alice):
            for a in range(2):
                for t in range(self.n_bob):
                    v[s, t, a, self.answers[s, a, t]] = 1.0
        return v

    def xor_predicate(self) -> XorPredicate:
        table = np.zeros((self.n_alice, self.n_bob, 2))
        for s in range(self.n_alice):
            for t in range(self.n_bob):
                table[s, t, self.answers[s, 0, t]] = 1.0
        return XorPredicate(self.p_s, self.p_t, table)

    def to_json(self) -> dict:
        return {
            "settings_a": list(self.settings_a),
            "settings_b": list(self.settings_b),
            "p_s": self.p_s.tolist(),
            "p_t": self.p_t.tolist(),
            "answers": [[self.answer(s, 0), self.answer(s, 1)] for s in range(self.n_alice)],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "XorGame":
        answers = [[_bits(x) for x in pair] for pair in doc["answers"]]
        return cls(doc["settings_a"], doc["settings_b"], doc["p_s"], doc["p_t"], answers)


def make_chsh() -> XorGame:
    """Win iff ``a xor b = s * t``; settings and questions uniform."""
    answers = [[[0, 0], [1, 1]], [[0, 1], [1, 0]]]
    return XorGame(("0", "1"), ("0", "1"), [0.5, 0.5], [0.5, 0.5], answers)


def make_retrieval(n: int) -> XorGame:
    """Alice names an n-bit string starting with 0 (a=0) or its complement
    (a=1); Bob must output its t-th bit."""
    if not 1 <= n <= 10:
        raise ValueError(f"retrieval length must be in [1, 10], got {n}")
    strings = ["0" + rest for rest in bitstrings(n - 1)] if n > 1 else ["0"]
    answers = [[_bits(s), [1 - b for b in _bits(s)]] for s in strings]
    m = len(strings)
    return XorGame(
        tuple(strings), tuple(str(t) for t in range(1, n + 1)),
        np.full(m, 1.0 / m), np.full(n, 1.0 / n), answers,
    )


@dataclass(frozen=True)
class QuantumStrategy:
    state: np.ndarray
    alice_observables: tuple[np.ndarray, ...]
    bob_observables: tuple[np.ndarray, ...]

    def __post_init__(self):
        state = validate_density(self.state)
        alice = tuple(as_matrix(a) for a in self.alice_observables)
        bob = tuple(as_matrix(b) for b in self.bob_observables)
        for obs in alice + bob:
            clifford.effects_from_observable(obs)
        da, db = alice[0].shape[0], bob[0].shape[0]
        if any(a.shape != (da, da) for a in alice) or any(b.shape != (db, db) for b in bob):
            raise ValueError("observables of one party must share a dimension")
        if state.shape[0] != da * db:
            raise ValueError(f"state of size {state.shape[0]} does not match {da}x{db}")
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "alice_observables", alice)
        object.__setattr__(self, "bob_observables", bob)

    @property
    def dim_a(self) -> int:
        return self.alice_observables[0].shape[0]

    @property
    def dim_b(self) -> int:
        return self.bob_observables[0].shape[0]

    def alice_effects(self, s: int):
        return clifford.effects_from_observable(self.alice_observables[s])

    def bob_measurements(self, p_t) -> MeasurementSet:
        return MeasurementSet.from_observables(self.bob_observables, p_t)


@dataclass(frozen=True)
class GameValueReport:
    """``terms[s, a]`` holds ``p(s) p(a|s) P_cert(sigma_{s,a}; x_{s,a})``."""

    value: float
    terms: np.ndarray
    witness: dict = field(default_factory=dict)


def _check_strategy(game: XorGame, strat: QuantumStrategy) -> None:
    if len(strat.alice_observables) != game.n_alice or len(strat.bob_observables) != game.n_bob:
        raise ValueError("strategy does not provide one observable per game setting")


def quantum_box(strat: QuantumStrategy) -> NoSignallingBox:
    """Correlations ``p(a, b | s, t) = tr[(A_s^a x B_t^b) sigma]``."""
    table = np.zeros((len(strat.alice_observables), len(strat.bob_observables), 2, 2))
    bob = [clifford.effects_from_observable(b) for b in strat.bob_observables]
    for s in range(table.shape[0]):
        alice = strat.alice_effects(s)
        for t in range(table.shape[1]):
            for a in range(2):
                for b in range(2):
                    p = np.trace(tensor_product(alice[a], bob[t][b]) @ strat.state).real
                    table[s, t, a, b] = max(float(p), 0.0)
    table /= table.sum(axis=(2, 3), keepdims=True)
    return NoSignallingBox(table)


def quantum_value(game: XorGame, strat: QuantumStrategy) -> GameValueReport:
    _check_strategy(game, strat)
    bob = [clifford.effects_from_observable(b) for b in strat.bob_observables]
    terms = np.zeros((game.n_alice, 2))
    for s in range(game.n_alice):
        alice = strat.alice_effects(s)
        for a in range(2):
            acc = 0.0
            for t in range(game.n_bob):
                op = tensor_product(alice[a], bob[t][game.answers[s, a, t]])
                acc += game.p_t[t] * np.trace(op @ strat.state).real
            terms[s, a] = game.p_s[s] * acc
    return GameValueReport(float(terms.sum()), terms)


def box_value(game: XorGame, box: NoSignallingBox) -> GameValueReport:
    if (box.n_alice, box.n_bob) != (game.n_alice, game.n_bob):
        raise ValueError(
            f"box has {box.n_alice}x{box.n_bob} settings, game {game.n_alice}x{game.n_bob}"
        )
    terms = np.zeros((game.n_alice, 2))
    for s in range(game.n_alice):
        for a in range(2):
            terms[s, a] = game.p_s[s] * sum(
                game.p_t[t] * box.table[s, t, a, game.answers[s, a, t]] for t in range(game.n_bob)
            )
    return GameValueReport(float(terms.sum()), terms)


def box_certainties(game: XorGame, box: NoSignallingBox) -> dict[tuple[int, int], float]:
    """``P_cert`` of Bob's conditional state for each ``(s, a)`` with ``p(a|s) > 0``."""
    out = {}
    for s in range(game.n_alice):
        for a in range(2):
            pa = float(box.table[s, 0, a].sum())
            if pa > PROB_TOL:
                out[(s, a)] = sum(
                    game.p_t[t] * box.table[s, t, a, game.answers[s, a, t]] / box.table[s, t, a].sum()
                    for t in range(game.n_bob)
                )
    return out


def classical_value(game: XorGame) -> GameValueReport:
    """Best deterministic strategy, by exhausting Bob's assignments.

    Given Bob's assignment, Alice's best answer per setting is read off;
    ties go to the lexicographically smallest assignment and to ``a = 0``.
    """
    nt = game.n_bob
    if 2**nt > MAX_CLASSICAL_ASSIGNMENTS:
        raise ValueError(f"{2**nt} Bob assignments exceed the exhaustive limit")
    assignments = np.array(list(itertools.product((0, 1), repeat=nt)), dtype=np.uint8)
    scores = np.zeros((len(assignments), game.n_alice, 2))
    for s in range(game.n_alice):
        for a in range(2):
            scores[:, s, a] = (assignments == game.answers[s, a]) @ game.p_t
    best_a = np.argmax(scores, axis=2)
    totals = np.max(scores, axis=2) @ game.p_s
    k = int(np.argmax(totals))
    terms = np.zeros((game.n_alice, 2))
    for s in range(game.n_alice):
        terms[s, best_a[k, s]] = game.p_s[s] * scores[k, s, best_a[k, s]]
    witness = {"alice": best_a[k].astype(int).tolist(), "bob": assignments[k].astype(int).tolist()}
    return GameValueReport(float(totals[k]), terms, witness)


def ns_value(game: XorGame) -> tuple[float, NoSignallingBox]:
    """Every unique XOR game is won with certainty by a no-signalling box:
    Alice's answer is uniform and Bob outputs the matching bit."""
    table = np.zeros((game.n_alice, game.n_bob, 2, 2))
    for s in range(game.n_alice):
        for t in range(game.n_bob):
            for a in range(2):
                table[s, t, a, game.answers[s, a, t]] = 0.5
    box = NoSignallingBox(table)
    ok, violation = is_no_signalling(box)
    if not ok:
        raise RuntimeError(f"winning box signals (violation {violation:.3g})")
    return box_value(game, box).value, box


# --- Clifford strategies ----------------------------------------------------


def strategy_from_vectors(alice_vectors, bob_vectors) -> QuantumStrategy:
    """Realise unit vectors as observables on the maximally entangled state.

    Bob measures ``b_t . Gamma`` and Alice ``(a_s . Gamma)^T`` so that
    ``<A_s x B_t> = a_s . b_t``.
    """
    av = np.atleast_2d(np.asarray(alice_vectors, dtype=float))
    bv = np.atleast_2d(np.asarray(bob_vectors, dtype=float))
    if av.shape[1] != bv.shape[1]:
        raise ValueError("Alice and Bob vectors must have the same length")
    gens = clifford.gamma_generators(av.shape[1])
    alice = [clifford.observable(clifford.unit(a), gens).T for a in av]
    bob = [clifford.observable(clifford.unit(b), gens) for b in bv]
    return QuantumStrategy(maximally_entangled(gens.dim), tuple(alice), tuple(bob))


def alice_vectors_for(game: XorGame, bob_vectors) -> np.ndarray:
    """Alice's best unit vectors against fixed Bob vectors: the direction of
    the maximally certain state for ``x_{s,0}``."""
    bv = np.atleast_2d(np.asarray(bob_vectors, dtype=float))
    out = []
    for s in range(game.n_alice):
        signs = 1.0 - 2.0 * game.answers[s, 0].astype(float)
        v = (game.p_t * signs) @ bv
        norm = np.linalg.norm(v)
        out.append(v / norm if norm > 1e-12 else np.eye(bv.shape[1])[0])
    return np.array(out)


def retrieval_bob_vectors(n: int) -> np.ndarray:
    """Pairwise orthogonal unit vectors, i.e. anticommuting observables."""
    return np.eye(n)


def chsh_optimal_strategy() -> QuantumStrategy:
    """Bob measures Z then X; Alice measures (X+Z)/sqrt2 then (Z-X)/sqrt2 on
    (|00> + |11>)/sqrt2."""
    X, Z = clifford.X, clifford.Z
    r = 1.0 / np.sqrt(2.0)
    return QuantumStrategy(
        maximally_entangled(2), (r * (X + Z), r * (Z - X)), (Z, X)
    )


def optimal_clifford_strategy(game: XorGame, bob_vectors) -> QuantumStrategy:
    return strategy_from_vectors(alice_vectors_for(game, bob_vectors), bob_vectors)


def maximally_certain_ensembles(game: XorGame, bob_vectors) -> list[Ensemble]:
    """For each setting, the two maximally certain states of Bob's uncertainty
    operators with weight 1/2 each."""
    bv = np.atleast_2d(np.asarray(bob_vectors, dtype=float))
    gens = clifford.gamma_generators(bv.shape[1])
    alice = alice_vectors_for(game, bv)
    return [
        Ensemble((0.5, 0.5), (clifford_state(a, gens), clifford_state(-a, gens)))
        for a in alice
    ]


def steered_certainty_sum(game: XorGame, strat: QuantumStrategy) -> GameValueReport:
    """Winning probability rebuilt from Bob's side alone:
    ``sum_s p(s) sum_a p(a|s) P_cert(sigma_{s,a}; x_{s,a})`` with
    ``sigma_{s,a}`` obtained by steering."""
    _check_strategy(game, strat)
    meas = strat.bob_measurements(game.p_t)
    terms = np.zeros((game.n_alice, 2))
    ensembles = []
    for s in range(game.n_alice):
        ens = steer(strat.state, strat.alice_effects(s), strat.dim_a)
        ensembles.append(ens)
        for a in range(2):
            if not ens.placeholder[a]:
                terms[s, a] = game.p_s[s] * ens.weights[a] * meas.certainty(ens.states[a], game.answer(s, a))
    return GameValueReport(float(terms.sum()), terms, {"ensembles": ensembles})


# --- alternating ascent -----------------------------------------------------


def _ascend(w: np.ndarray, b: np.ndarray, max_iter: int, tol: float):
    a = np.zeros((w.shape[0], b.shape[1]))
    prev = -np.inf
    for _ in range(max_iter):
        a = _normalise_rows(w @ b, a)
        b = _normalise_rows(w.T @ a, b)
        bias = float(np.sum(w * (a @ b.T)))
        if bias - prev <= tol:
            break
        prev = bias
    return a, b, bias


def _normalise_rows(m: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    out = np.where(norms > 1e-15, m / np.where(norms > 1e-15, norms, 1.0), fallback)
    # rows with no gradient keep their previous direction (or e_1 initially)
    dead = (norms[:, 0] <= 1e-15) & (np.linalg.norm(out, axis=1) == 0.0)
    out[dead, 0] = 1.0
    return out


def optimize_xor_vectors(game, restarts: int = 32, seed: int = 0,
                         max_iter: int = 20000, tol: float = 1e-15):
    """Heuristic lower bound on the quantum value of an XOR game.

    Alternately sets each Alice vector to the normalised gradient
    ``sum_t W[s,t] b_t`` and each Bob vector to ``sum_s W[s,t] a_s``; the
    value never decreases. Vectors live in ``min(|S|, |T|)`` dimensions and
    the best of ``restarts`` seeded random starts is returned as
    ``(alice_vectors, bob_vectors, value)``.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    pred = game.xor_predicate() if isinstance(game, XorGame) else game
    const, w = pred.weights()
    dim = min(w.shape)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        b0 = rng.standard_normal((w.shape[1], dim))
        b0 /= np.linalg.norm(b0, axis=1, keepdims=True)
        a, b, bias = _ascend(w, b0, max_iter, tol)
        value = const + 0.5 * bias
        if best is None or value > best[2]:
            best = (a, b, value)
    return best


# --- games from uncertainty relations --------------------------------------


@dataclass(frozen=True)
class RelationGame:
    """Game whose setting ``s`` asks Alice for a string from ``cells[s]`` and
    Bob for one entry of it."""

    cells: tuple[tuple[str, ...], ...]
    p_s: np.ndarray
    p_t: np.ndarray
    p_x_given_s: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return self.p_t.size

    def as_xor(self) -> XorGame:
        """The same game as an :class:`XorGame`; every cell must be a
        complementary pair."""
        answers = []
        for cell in self.cells:
            if len(cell) != 2:
                raise ValueError(f"cell {cell} is not a pair of strings")
            answers.append([_bits(x) for x in cell])
        labels = tuple(str(s) for s in range(len(self.cells)))
        bob = tuple(str(t) for t in range(self.n))
        return XorGame(labels, bob, self.p_s, self.p_t, answers)

    def to_json(self) -> dict:
        return {
            "cells": [list(c) for c in self.cells],
            "p_s": self.p_s.tolist(),
            "p_t": self.p_t.tolist(),
            "p_x_given_s": [list(p) for p in self.p_x_given_s],
        }


def game_from_relation(relation: FineGrainedRelation, partition: Sequence[Sequence[str]],
                       p_s=None, steerable_zetas: dict[str, float] | None = None,
                       p_x_given_s=None):
    """Turn an uncertainty relation into a game and bound its value from below.

    Returns ``(game, lower_bound)`` with
    ``lower_bound = sum_s p(s) sum_{x in cell s} p(x|s) zeta_x``, where
    ``zeta_x`` is taken from ``steerable_zetas`` when given (the bound over
    the states the theory can steer to) and from ``relation`` otherwise.
    ``p(x|s)`` defaults to uniform within each cell.
    """
    cells = tuple(tuple(str(x) for x in cell) for cell in partition)
    everything = [x for cell in cells for x in cell]
    if any(len(c) == 0 for c in cells):
        raise ValueError("partition cells must be nonempty")
    if len(set(everything)) != len(everything):
        raise ValueError("partition cells must be disjoint")
    if sorted(everything) != bitstrings(relation.n):
        raise ValueError(f"partition must cover all {2**relation.n} strings of length {relation.n}")
    p_s = _distribution(np.full(len(cells), 1.0 / len(cells)) if p_s is None else p_s, "p_s")
    if p_s.size != len(cells):
        raise ValueError("need one p_s entry per cell")
    if p_x_given_s is None:
        p_x_given_s = [[1.0 / len(c)] * len(c) for c in cells]
    p_x_given_s = tuple(tuple(_distribution(p, "p(x|s)").tolist()) for p in p_x_given_s)
    if [len(p) for p in p_x_given_s] != [len(c) for c in cells]:
        raise ValueError("p(x|s) must give one weight per string of each cell")
    zetas = steerable_zetas if steerable_zetas is not None else relation.zetas
    bound = sum(
        p_s[s] * w * zetas[x]
        for s, cell in enumerate(cells)
        for x, w in zip(cell, p_x_given_s[s])
    )
    game = RelationGame(cells, p_s, _distribution(relation.p_t, "p_t"), p_x_given_s)
    return game, float(bound)
