"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. Functions never mutate their
inputs; the Hermitian eigensolver is a parallel-ordered cyclic Jacobi
method so results are bit-for-bit reproducible for identical inputs.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
MAX_DIM = 2**10


class NotHermitianError(ValueError):
    pass


class DensityMatrixError(ValueError):
    """Raised by :func:`validate_density`.

    ``failures`` maps each violated invariant (``"hermiticity"``,
    ``"trace"``, ``"positivity"``, ``"finite"``, ``"shape"``) to the size of
    the violation.
    """

    def __init__(self, failures: dict[str, float]):
        self.failures = dict(failures)
        detail = ", ".join(f"{k} (violation {v:.3g})" for k, v in failures.items())
        super().__init__(f"not a density matrix: {detail}")


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``a``."""
    out = np.array(a, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def hermiticity_defect(m) -> float:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return float("inf")
    return float(np.max(np.abs(a - dagger(a)), initial=0.0))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(m) <= tol


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors) -> np.ndarray:
    out = np.eye(1, dtype=np.complex128)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def partial_trace(m, dim_a: int, dim_b: int, over: str = "A") -> np.ndarray:
    """Trace out one factor of an operator on ``C^dim_a (x) C^dim_b``.

    ``over="A"`` returns the ``dim_b``-square reduction (Bob's marginal),
    ``over="B"`` the ``dim_a``-square one.
    """
    a = as_matrix(m)
    n = dim_a * dim_b
    if a.shape != (n, n):
        raise ValueError(
            f"matrix of shape {a.shape} does not act on {dim_a}x{dim_b} = {n} dimensions"
        )
    t = a.reshape(dim_a, dim_b, dim_a, dim_b)
    if over == "A":
        return np.einsum("ijik->jk", t)
    if over == "B":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"unknown subsystem {over!r}; use 'A' or 'B'")


def maximally_entangled(d: int) -> np.ndarray:
    """Projector onto sum_k |k>|k> / sqrt(d)."""
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[:: d + 1] = 1.0 / np.sqrt(d)
    return np.outer(psi, psi.conj())


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    # Circle-method tournament: each round is a set of disjoint (p, q) pairs
    # and every pair appears exactly once per sweep.
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def hermitian_eig(h, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix, ``||h - h^dagger||_max <= 1e-12`` (scaled
        by ``max(1, ||h||_max)``).
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm drops below
        ``tol * ||h||_F``.

    Returns
    -------
    eigenvalues : ndarray
        Real, sorted in descending order.
    eigenvectors : ndarray
        Unitary matrix whose column ``k`` belongs to ``eigenvalues[k]``.
    """
    a = as_matrix(h)
    n = a.shape[0]
    if a.shape != (n, n):
        raise NotHermitianError(f"matrix of shape {a.shape} is not square")
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_DIM}")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_TOL * scale:
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.3g})")

    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=np.complex128)
    target = tol * float(np.linalg.norm(a))
    rounds = _round_robin(n)

    for _ in range(max_sweeps):
        if _off_norm(a) <= target:
            break
        for p, q in rounds:
            if p.size == 0:
                continue
            apq = a[p, q]
            mag = np.abs(apq)
            phase = np.where(mag > 0.0, apq / np.where(mag > 0.0, mag, 1.0), 1.0)
            diff = a[p, p].real - a[q, q].real
            # rotation angle in [-pi/4, pi/4] zeroes the (p, q) entry
            sgn = np.where(diff >= 0.0, 1.0, -1.0)
            theta = 0.5 * np.arctan2(2.0 * mag * sgn, np.abs(diff))
            c = np.cos(theta)
            s = np.sin(theta)
            se = s * phase
            sec = s * np.conj(phase)

            cp, cq = a[:, p], a[:, q]
            a[:, p], a[:, q] = cp * c + cq * sec, cq * c - cp * se
            rp, rq = a[p, :], a[q, :]
            a[p, :], a[q, :] = c[:, None] * rp + se[:, None] * rq, c[:, None] * rq - sec[:, None] * rp
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = vp * c + vq * sec, vq * c - vp * se
    else:
        if _off_norm(a) > target:
            raise RuntimeError("Jacobi iteration did not converge")

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def lambda_max(h) -> float:
    return float(hermitian_eig(h)[0][0])


def validate_density(m) -> np.ndarray:
    """Check the density-matrix invariants and return a read-only copy.

    Raises :class:`DensityMatrixError` naming every failed invariant.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DensityMatrixError({"shape": float("inf")})
    if not np.all(np.isfinite(a)):
        raise DensityMatrixError({"finite": float("inf")})
    failures = {}
    herm = hermiticity_defect(a)
    if herm > HERMITIAN_TOL:
        failures["hermiticity"] = herm
    tr_dev = abs(np.trace(a) - 1.0)
    if tr_dev > TRACE_TOL:
        failures["trace"] = float(tr_dev)
    if "hermiticity" not in failures:
        lo = float(hermitian_eig(a)[0][-1])
        if lo < -POSITIVITY_TOL:
            failures["positivity"] = -lo
    if failures:
        raise DensityMatrixError(failures)
    return frozen(a)


def is_psd(m, tol: float = POSITIVITY_TOL) -> bool:
    if not is_hermitian(m, max(HERMITIAN_TOL, tol)):
        return False
    return float(hermitian_eig(m)[0][-1]) >= -tol
