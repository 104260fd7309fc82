"""Steered ensembles on Bob's side and Alice measurements that prepare them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    as_matrix,
    frozen,
    is_psd,
    maximally_entangled,
    partial_trace,
    tensor_product,
    validate_density,
)

ZERO_WEIGHT = 1e-12
CONSISTENCY_TOL = 1e-9


class SteeringError(ValueError):
    def __init__(self, message: str, deviation: float):
        self.deviation = deviation
        super().__init__(f"{message} (deviation {deviation:.3g})")


@dataclass(frozen=True)
class Ensemble:
    """Weighted states ``{(p(a), sigma_a)}``.

    ``placeholder[a]`` marks zero-weight outcomes, whose state is the
    maximally mixed state and carries no information.
    """

    weights: tuple[float, ...]
    states: tuple[np.ndarray, ...]
    placeholder: tuple[bool, ...] = ()

    def __post_init__(self):
        if len(self.weights) != len(self.states):
            raise ValueError("ensemble needs one weight per state")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -ZERO_WEIGHT) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"ensemble weights must be a distribution, got {w.tolist()}")
        flags = self.placeholder or tuple(False for _ in self.weights)
        states = tuple(
            frozen(as_matrix(s)) if flag else validate_density(s)
            for s, flag in zip(self.states, flags)
        )
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "placeholder", tuple(flags))

    @classmethod
    def from_members(cls, members) -> "Ensemble":
        members = list(members)
        return cls(tuple(w for w, _ in members), tuple(s for _, s in members))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __iter__(self):
        return iter(zip(self.weights, self.states))

    def __len__(self):
        return len(self.weights)

    def average(self) -> np.ndarray:
        return sum(
            w * s for w, s, flag in zip(self.weights, self.states, self.placeholder) if not flag
        )


@dataclass(frozen=True)
class SteeringReport:
    consistent: bool
    average: np.ndarray
    max_deviation: float


def steer(state, alice_effects, dim_a: int | None = None) -> Ensemble:
    """Ensemble prepared on B when Alice measures ``alice_effects`` on A.

    Outcome ``a`` occurs with ``p(a) = tr[(E_a x I) sigma]`` and leaves B in
    ``tr_A[(E_a x I) sigma] / p(a)``.
    """
    sigma = as_matrix(state)
    effects = [as_matrix(e) for e in alice_effects]
    dim_a = dim_a or effects[0].shape[0]
    n = sigma.shape[0]
    if n % dim_a or any(e.shape != (dim_a, dim_a) for e in effects):
        raise ValueError(f"effects of size {dim_a} do not fit a state of size {n}")
    dim_b = n // dim_a
    ident_b = np.eye(dim_b)
    if np.max(np.abs(sum(effects) - np.eye(dim_a))) > 1e-9:
        raise ValueError("Alice's effects do not sum to the identity")

    weights, states, flags = [], [], []
    for e in effects:
        unnorm = partial_trace(tensor_product(e, ident_b) @ sigma, dim_a, dim_b, over="A")
        p = float(np.trace(unnorm).real)
        if p < ZERO_WEIGHT:
            weights.append(max(p, 0.0))
            states.append(ident_b / dim_b)
            flags.append(True)
        else:
            weights.append(p)
            states.append(0.5 * (unnorm + unnorm.conj().T) / p)
            flags.append(False)
    total = sum(weights)
    return Ensemble(tuple(w / total for w in weights), tuple(states), tuple(flags))


def ensembles_consistent(ensembles, tol: float = CONSISTENCY_TOL) -> SteeringReport:
    """Do all ensembles average to the same state (the no-signalling condition)?"""
    ensembles = list(ensembles)
    if not ensembles:
        raise ValueError("need at least one ensemble")
    averages = [e.average() for e in ensembles]
    dim = averages[0].shape
    if any(a.shape != dim for a in averages):
        raise ValueError("ensembles live on different dimensions")
    dev = max((float(np.max(np.abs(a - averages[0]))) for a in averages[1:]), default=0.0)
    return SteeringReport(dev <= tol, frozen(averages[0]), dev)


def measurement_for_ensemble(target: Ensemble, tol: float = CONSISTENCY_TOL) -> list[np.ndarray]:
    """Alice's POVM steering the maximally entangled state to ``target``.

    The effects are ``d * w_a * sigma_a^T`` (transpose in the computational
    basis of ``sum_k |k>|k> / sqrt(d)``). The target must average to ``I/d``.
    """
    d = target.dim
    avg = target.average()
    dev = float(np.max(np.abs(avg - np.eye(d) / d)))
    if dev > tol:
        raise SteeringError("target ensemble does not average to the maximally mixed state", dev)
    effects = [d * w * s.T for w, s in target]
    if np.max(np.abs(sum(effects) - np.eye(d))) > tol:
        raise SteeringError("effects do not sum to the identity", dev)
    if not all(is_psd(e, tol) for e in effects):
        raise SteeringError("effects are not positive", dev)

    check = steer(maximally_entangled(d), effects)
    w_dev = max(abs(a - b) for a, b in zip(check.weights, target.weights))
    s_dev = max(
        (float(np.max(np.abs(a - b))) for a, b, w in zip(check.states, target.states, target.weights)
         if w >= ZERO_WEIGHT),
        default=0.0,
    )
    if max(w_dev, s_dev) > tol:
        raise SteeringError("steering round trip failed", max(w_dev, s_dev))
    return effects
