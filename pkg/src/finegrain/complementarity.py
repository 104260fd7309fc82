"""Sequential retrieval and complementarity.

``q`` is the probability of retrieving the first bit correctly, ``prr`` the
probability of then retrieving the second bit correctly given the first
was right, ``pww`` the probability of getting the second bit wrong given
the first was wrong. No-signalling forbids learning the parity, which pins
``q * prr + (1 - q) * pww = 1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix
from .uncertainty import MeasurementSet

FEAS_TOL = 1e-12


class InfeasiblePoint(ValueError):
    pass


@dataclass(frozen=True)
class SequentialPoint:
    q: float
    prr: float
    pww: float

    def __post_init__(self):
        for name in ("q", "prr", "pww"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} is not a probability")

    @property
    def residual(self) -> float:
        return parity_residual(self)

    @property
    def feasible(self) -> bool:
        return abs(self.residual) <= FEAS_TOL


def parity_residual(pt: SequentialPoint) -> float:
    return pt.q * pt.prr + (1.0 - pt.q) * pt.pww - 0.5


def _check_q(q: float) -> None:
    if not 0.5 <= q <= 1.0:
        raise ValueError(f"q must lie in [1/2, 1], got {q}")


def induced_pww(q: float, prr: float) -> float:
    """``pww`` forced by the parity constraint; raises if it leaves [0, 1]."""
    if q >= 1.0:
        if abs(q * prr - 0.5) > FEAS_TOL:
            raise InfeasiblePoint(f"q = 1 requires prr = 1/2, got {prr}")
        return float("nan")
    pww = (0.5 - q * prr) / (1.0 - q)
    if pww < -FEAS_TOL or pww > 1.0 + FEAS_TOL:
        raise InfeasiblePoint(f"prr = {prr} forces pww = {pww:.6g} outside [0, 1] at q = {q}")
    return min(max(pww, 0.0), 1.0)


def p_second(q: float, prr: float) -> float:
    """Average success on the second bit, ``q prr + (1 - q)(1 - pww)``,
    with ``pww`` eliminated through the parity constraint."""
    if not 0.0 <= prr <= 1.0 or not 0.0 <= q <= 1.0:
        raise ValueError("q and prr must be probabilities")
    induced_pww(q, prr)
    return 2.0 * q * prr + 0.5 - q


def max_p_second(q: float) -> tuple[float, float]:
    """Best ``p_second`` and the ``prr`` achieving it.

    ``p_second`` grows with ``prr``, and ``pww >= 0`` caps ``prr`` at
    ``1/(2q)``, giving ``3/2 - q``.
    """
    _check_q(q)
    prr = min(1.0, 1.0 / (2.0 * q))
    return 2.0 * q * prr + 0.5 - q, prr


def max_p_second_grid(q: float, points: int = 10_000) -> tuple[float, float]:
    """Brute-force ``max_p_second`` on a grid of ``points`` values of ``prr``
    spanning the interval where the induced ``pww`` stays in [0, 1]."""
    _check_q(q)
    if q >= 1.0:
        prr = 0.5 / q  # the only feasible point
        return q * prr, prr
    lo = max(0.0, (q - 0.5) / q)     # pww <= 1
    hi = min(1.0, 0.5 / q)           # pww >= 0
    prr = np.linspace(lo, hi, points)
    pww = (0.5 - q * prr) / (1.0 - q)
    vals = q * prr + (1.0 - q) * (1.0 - pww)
    k = int(np.argmax(vals))
    return float(vals[k]), float(prr[k])


def tradeoff_curve(q: float, samples: int) -> np.ndarray:
    """``samples`` points ``(prr, pww)`` on the parity line inside the unit square."""
    _check_q(q)
    if samples < 2:
        raise ValueError("need at least two samples")
    if q >= 1.0:
        return np.column_stack([np.full(samples, 0.5), np.linspace(0.0, 1.0, samples)])
    lo = (q - 0.5) / q
    hi = min(1.0, 0.5 / q)
    prr = np.linspace(lo, hi, samples)
    pww = np.clip((0.5 - q * prr) / (1.0 - q), 0.0, 1.0)
    return np.column_stack([prr, pww])


def post_measurement_certainty(sigma, meas: MeasurementSet, first: tuple[int, int], x: str) -> float:
    """Certainty ``eta`` for ``x`` after a first projective measurement.

    The state is updated by the Lueders rule ``P sigma P / tr(P sigma P)``
    with ``P = effects[t][b]`` for ``first = (t, b)``.
    """
    sigma = as_matrix(sigma)
    t, b = first
    proj = meas.effects[t][b]
    if np.max(np.abs(proj @ proj - proj)) > 1e-9:
        raise ValueError(f"effect {first} is not a projector")
    post = proj @ sigma @ proj
    p = float(np.trace(post).real)
    if p <= 1e-12:
        raise ValueError(f"outcome {b} of measurement {t} has zero probability")
    return meas.certainty(post / p, x)
