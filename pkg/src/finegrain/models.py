"""Correlation boxes for the CHSH analysis: PR boxes, local boxes and the
hidden-variable circle model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
NORMALISATION_TOL = 1e-12
SIGNALLING_TOL = 1e-10

# (s, a) -> string Bob has to retrieve in CHSH
CHSH_STRINGS = {(0, 0): "00", (0, 1): "11", (1, 0): "01", (1, 1): "10"}


@dataclass(frozen=True)
class NoSignallingBox:
    """Conditional distribution ``table[s, t, a, b] = p(a, b | s, t)``.

    Construction only checks shape, positivity and normalisation; use
    :func:`is_no_signalling` for the marginal conditions.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float, copy=True)
        if t.ndim != 4 or t.shape[2:] != (2, 2):
            raise ValueError(f"box table must have shape (|S|, |T|, 2, 2), got {t.shape}")
        if not np.all(np.isfinite(t)) or np.min(t) < -NORMALISATION_TOL:
            raise ValueError("box probabilities must be finite and nonnegative")
        sums = t.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > NORMALISATION_TOL:
            raise ValueError("box is not normalised for every (s, t)")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def n_alice(self) -> int:
        return self.table.shape[0]

    @property
    def n_bob(self) -> int:
        return self.table.shape[1]

    def p(self, a: int, b: int, s: int, t: int) -> float:
        return float(self.table[s, t, a, b])

    def alice_marginals(self) -> np.ndarray:
        """``[s, t, a] = p(a | s, t)``."""
        return self.table.sum(axis=3)

    def bob_marginals(self) -> np.ndarray:
        """``[s, t, b] = p(b | s, t)``."""
        return self.table.sum(axis=2)

    def to_json(self) -> dict:
        blocks = {
            f"{s},{t}": self.table[s, t].tolist()
            for s in range(self.n_alice)
            for t in range(self.n_bob)
        }
        return {"n_alice": self.n_alice, "n_bob": self.n_bob, "table": blocks}

    @classmethod
    def from_json(cls, doc: dict) -> "NoSignallingBox":
        ns, nt = int(doc["n_alice"]), int(doc["n_bob"])
        table = np.zeros((ns, nt, 2, 2))
        for key, block in doc["table"].items():
            s, t = (int(k) for k in key.split(","))
            table[s, t] = np.asarray(block, dtype=float)
        return cls(table)


def is_no_signalling(box) -> tuple[bool, float]:
    """Check that each party's marginal ignores the other party's setting.

    Returns ``(ok, max_violation)`` where ``max_violation`` is the largest
    spread of a marginal probability across the other party's settings.
    """
    table = box.table if isinstance(box, NoSignallingBox) else np.asarray(box, dtype=float)
    if table.ndim != 4 or table.shape[2:] != (2, 2):
        raise ValueError(f"malformed box table of shape {table.shape}")
    pa = table.sum(axis=3)  # [s, t, a]
    pb = table.sum(axis=2)  # [s, t, b]
    va = np.max(pa.max(axis=1) - pa.min(axis=1), initial=0.0)
    vb = np.max(pb.max(axis=0) - pb.min(axis=0), initial=0.0)
    violation = float(max(va, vb))
    return violation <= SIGNALLING_TOL, violation


def pr_box() -> NoSignallingBox:
    """Uniform marginals and ``a xor b = s * t`` with certainty."""
    table = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for t in range(2):
            for a in range(2):
                table[s, t, a, a ^ (s * t)] = 0.5
    return NoSignallingBox(table)


def uniform_box(n_alice: int = 2, n_bob: int = 2) -> NoSignallingBox:
    return NoSignallingBox(np.full((n_alice, n_bob, 2, 2), 0.25))


def deterministic_box(alice_answers, bob_answers) -> NoSignallingBox:
    """Local box where Alice answers ``alice_answers[s]`` and Bob ``bob_answers[t]``."""
    alice_answers = list(alice_answers)
    bob_answers = list(bob_answers)
    table = np.zeros((len(alice_answers), len(bob_answers), 2, 2))
    for s, a in enumerate(alice_answers):
        for t, b in enumerate(bob_answers):
            table[s, t, int(a), int(b)] = 1.0
    return NoSignallingBox(table)


# --- hidden-variable circle model -------------------------------------------


def arc_overlap(start_a: float, len_a: float, start_b: float, len_b: float) -> float:
    """Length of the intersection of two half-open arcs on a circle of length 2*pi.

    Arcs are ``[start, start + len)`` taken modulo 2*pi, with ``len <= 2*pi``.
    """
    a0 = start_a % TWO_PI
    b0 = start_b % TWO_PI
    total = 0.0
    for shift in (-TWO_PI, 0.0, TWO_PI):
        lo = max(a0, b0 + shift)
        hi = min(a0 + len_a, b0 + shift + len_b)
        if hi > lo:
            total += hi - lo
    return total


@dataclass(frozen=True)
class LhvCircleModel:
    """Hidden variable uniform on the circle.

    Bob's measurement ``t`` cuts the circle at ``cuts[t]`` (0 for t=0,
    ``theta_b`` for t=1) and answers 1 above the cut. Alice's setting ``s``
    splits the circle into the half arcs ``[phi_s, phi_s + pi)`` (a=0) and
    its complement (a=1).
    """

    theta_b: float
    phi_0: float
    phi_1: float

    @property
    def cuts(self) -> tuple[float, float]:
        return (0.0, self.theta_b)

    @property
    def arcs(self) -> dict[tuple[int, int], tuple[float, float]]:
        """``(s, a) -> (start, end)`` with angles reduced to [0, 2*pi)."""
        out = {}
        for s, phi in enumerate((self.phi_0, self.phi_1)):
            for a in range(2):
                start = (phi + a * math.pi) % TWO_PI
                out[(s, a)] = (start, (start + math.pi) % TWO_PI)
        return out

    def bob_region(self, t: int, b: int) -> tuple[float, float]:
        """Arc ``(start, length)`` on which Bob's measurement ``t`` answers ``b``."""
        cut = self.cuts[t]
        return ((cut if b == 1 else cut + math.pi) % TWO_PI, math.pi)

    def joint(self, s: int, t: int, a: int, b: int) -> float:
        start = self.arcs[(s, a)][0]
        b_start, b_len = self.bob_region(t, b)
        return arc_overlap(start, math.pi, b_start, b_len) / TWO_PI

    def certainty(self, s: int, a: int) -> float:
        """Average probability (t uniform) that Bob retrieves ``CHSH_STRINGS[(s, a)]``
        from the steered hidden-variable state."""
        x = CHSH_STRINGS[(s, a)]
        start = self.arcs[(s, a)][0]
        hits = 0.0
        for t in range(2):
            b_start, b_len = self.bob_region(t, int(x[t]))
            hits += 0.5 * arc_overlap(start, math.pi, b_start, b_len) / math.pi
        return hits

    @property
    def zetas(self) -> dict[str, float]:
        return {CHSH_STRINGS[sa]: self.certainty(*sa) for sa in sorted(CHSH_STRINGS)}

    def breakpoints(self) -> list[float]:
        pts = {0.0, math.pi % TWO_PI, self.theta_b % TWO_PI, (self.theta_b + math.pi) % TWO_PI}
        for start, end in self.arcs.values():
            pts.update((start, end))
        return sorted(pts)

    def cells(self) -> list[tuple[float, float]]:
        """Elementary arcs ``(start, length)`` on which every region is constant."""
        pts = self.breakpoints()
        return [
            (p, ((pts[(i + 1) % len(pts)] - p) % TWO_PI) or TWO_PI)
            for i, p in enumerate(pts)
        ]

    def cell_weights(self, start: float, length: float) -> np.ndarray:
        """Uniform distribution on an arc, pushed onto :meth:`cells`."""
        w = np.array([arc_overlap(c0, cl, start, length) for c0, cl in self.cells()])
        return w / w.sum()

    def steered_states(self) -> dict[tuple[int, int], np.ndarray]:
        """Bob's hidden-variable state for each (s, a), as a diagonal density matrix."""
        return {sa: np.diag(self.cell_weights(arc[0], math.pi)).astype(complex)
                for sa, arc in self.arcs.items()}

    def bob_effects(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Bob's two measurements as diagonal 0/1 effects over :meth:`cells`."""
        out = []
        for t in range(2):
            pair = []
            for b in range(2):
                b_start, b_len = self.bob_region(t, b)
                inside = [1.0 if arc_overlap(c0, cl, b_start, b_len) > cl / 2 else 0.0
                          for c0, cl in self.cells()]
                pair.append(np.diag(inside).astype(complex))
            out.append(tuple(pair))
        return out


def default_angles(theta_b: float) -> tuple[float, float]:
    """Partition angles in the middle of the optimal ranges
    ``phi_0 in [pi, pi + theta_b]`` and ``phi_1 in [theta_b, pi]``."""
    return math.pi + theta_b / 2.0, (theta_b + math.pi) / 2.0


def lhv_model(theta_b: float, phi_0: float | None = None, phi_1: float | None = None):
    """Build the circle model and its correlation box.

    ``p(a, b | s, t)`` is the exact length of the overlap between Alice's arc
    ``(s, a)`` and Bob's half circle ``(t, b)``, divided by 2*pi.
    """
    if not 0.0 <= theta_b <= math.pi:
        raise ValueError(f"theta_b must lie in [0, pi], got {theta_b}")
    d0, d1 = default_angles(theta_b)
    model = LhvCircleModel(
        theta_b, d0 if phi_0 is None else float(phi_0), d1 if phi_1 is None else float(phi_1)
    )
    table = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for t in range(2):
            for a in range(2):
                for b in range(2):
                    table[s, t, a, b] = model.joint(s, t, a, b)
    return NoSignallingBox(table), model


def lhv_game_value(theta_b: float) -> float:
    if not 0.0 <= theta_b <= math.pi:
        raise ValueError(f"theta_b must lie in [0, pi], got {theta_b}")
    same = 1.0 - theta_b / TWO_PI
    diff = 1.0 - (math.pi - theta_b) / TWO_PI
    return 0.5 * (same + diff)
