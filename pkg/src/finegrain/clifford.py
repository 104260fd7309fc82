"""Jordan-Wigner Clifford generators and dichotomic observables built from them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import as_matrix, frozen, kron_all

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

MAX_GENERATORS = 21
INVOLUTION_TOL = 1e-9


@dataclass(frozen=True)
class CliffordGenerators:
    """``count`` pairwise anticommuting, traceless involutions of size ``dim``."""

    count: int
    dim: int
    gammas: tuple[np.ndarray, ...]

    def __iter__(self):
        return iter(self.gammas)

    def __getitem__(self, j):
        return self.gammas[j]

    def __len__(self):
        return self.count


def qubits_for(count: int) -> int:
    # 2m generators fit on m qubits, plus one more as the Z-string.
    return max(1, count // 2)


@lru_cache(maxsize=None)
def gamma_generators(count: int) -> CliffordGenerators:
    """Jordan-Wigner generators on ``m = max(1, count // 2)`` qubits.

    Generator ``2k`` (0-based) is ``Z^(k) X I...``, generator ``2k+1`` is
    ``Z^(k) Y I...``; for odd ``count >= 3`` the last one is ``Z^(m)``.
    The first tensor factor is the leftmost (big-endian) qubit.
    """
    if not isinstance(count, (int, np.integer)) or not 1 <= count <= MAX_GENERATORS:
        raise ValueError(f"generator count must be in [1, {MAX_GENERATORS}], got {count!r}")
    m = qubits_for(count)
    gammas = []
    for k in range(m):
        for pauli in (X, Y):
            if len(gammas) < count:
                gammas.append(kron_all(*([Z] * k), pauli, *([I2] * (m - k - 1))))
    if len(gammas) < count:
        gammas.append(kron_all(*([Z] * m)))
    return CliffordGenerators(count, 2**m, tuple(frozen(g) for g in gammas))


def observable(v, gens: CliffordGenerators) -> np.ndarray:
    """Return ``sum_j v_j Gamma_j``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != gens.count:
        raise ValueError(f"vector has {v.size} components, generators number {gens.count}")
    out = np.zeros((gens.dim, gens.dim), dtype=np.complex128)
    for vj, g in zip(v, gens.gammas):
        out += vj * g
    return out


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("zero vector has no direction")
    return v / norm


def effects_from_observable(b) -> tuple[np.ndarray, np.ndarray]:
    """Split a +/-1 observable into its two projectors ``(I + B)/2, (I - B)/2``."""
    b = as_matrix(b)
    ident = np.eye(b.shape[0], dtype=np.complex128)
    defect = float(np.max(np.abs(b @ b - ident)))
    if defect > INVOLUTION_TOL:
        raise ValueError(f"observable does not square to the identity (defect {defect:.3g})")
    return 0.5 * (ident + b), 0.5 * (ident - b)


def anticommutator(a, b) -> np.ndarray:
    return a @ b + b @ a
