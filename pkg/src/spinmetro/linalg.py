"""Spin operator construction and dense Hermitian linear-algebra kernels.

Everything here works on plain complex numpy arrays.  The only composite
type is :class:`SpinRep`, the triple of angular-momentum matrices for one
irreducible representation; its arrays are frozen after construction so
instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure, SpectrumNotReal

__all__ = [
    "SpinRep",
    "build_spin_rep",
    "j_direction",
    "herm_eig",
    "expm_i",
    "spectral_absmax",
    "trace_norm",
    "sym_inverse",
    "commutator",
    "anticommutator",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    return a


def require_hermitian(a, tol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as an array, raising if it is not Hermitian.

    The residual ``||a - a^dag||`` is measured relative to ``max(||a||, 1)``
    in the Frobenius norm.
    """
    a = _as_square(a, name)
    resid = np.linalg.norm(a - a.conj().T)
    if resid > tol * max(np.linalg.norm(a), 1.0):
        raise InvalidInput(f"{name} is not Hermitian (residual {resid:.3e})")
    return a


def require_unit3(n, tol: float = 1e-10) -> np.ndarray:
    """Validate a real 3-component direction vector of unit norm."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise InvalidInput(f"direction vector must have 3 components, got shape {n.shape}")
    if abs(np.linalg.norm(n) - 1.0) > tol:
        raise InvalidInput(f"direction vector has norm {np.linalg.norm(n)!r}, expected 1")
    return n


@dataclass(frozen=True)
class SpinRep:
    """Irreducible su(2) representation of dimension ``N = 2s + 1``.

    Attributes
    ----------
    N : int
        Hilbert-space dimension, at least 2.
    s : float
        Spin quantum number ``(N - 1) / 2``; half-integers are allowed.
    jx, jy, jz : ndarray
        The three N x N Hermitian generators, satisfying the cyclic
        commutation relations ``[jx, jy] = 1j * jz`` and the Casimir
        identity ``jx^2 + jy^2 + jz^2 = s (s + 1) I``.
    """

    N: int
    s: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    def __post_init__(self):
        for name in ("jx", "jy", "jz"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def jvec(self) -> np.ndarray:
        """The generators stacked into one (3, N, N) array."""
        return np.stack([self.jx, self.jy, self.jz])


def build_spin_rep(N: int) -> SpinRep:
    """Construct the spin-s representation acting on dimension ``N``.

    ``jz`` is diagonal with entries ``s, s-1, ..., -s`` and the ladder
    matrix elements are ``<m-1|J-|m> = sqrt(s(s+1) - m(m-1))``; ``jx`` and
    ``jy`` follow from the ladder combination.
    """
    if int(N) != N or N < 2:
        raise InvalidInput(f"representation dimension must be an integer >= 2, got {N!r}")
    N = int(N)
    s = (N - 1) / 2
    m = s - np.arange(N)
    jminus = np.zeros((N, N), dtype=complex)
    jminus[np.arange(1, N), np.arange(N - 1)] = np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] - 1))
    jplus = jminus.conj().T
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    jz = np.diag(m).astype(complex)
    return SpinRep(N=N, s=s, jx=jx, jy=jy, jz=jz)


def j_direction(rep: SpinRep, n) -> np.ndarray:
    """Spin component ``n . J`` along the unit direction ``n``."""
    n = require_unit3(n)
    return n[0] * rep.jx + n[1] * rep.jy + n[2] * rep.jz


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    return a @ b + b @ a


def herm_eig(a):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(evals, vecs)`` with real eigenvalues in ascending order and
    the unitary eigenvector matrix as columns, so that
    ``a = vecs @ diag(evals) @ vecs^dag``.
    """
    a = require_hermitian(a)
    return np.linalg.eigh(a)


def expm_i(a, c: float) -> np.ndarray:
    """Unitary ``exp(-1j * c * a)`` for Hermitian ``a``.

    Computed through the eigendecomposition, which keeps the result unitary
    to the accuracy of the eigensolver regardless of ``|c| * ||a||``.
    """
    evals, vecs = herm_eig(a)
    return (vecs * np.exp(-1j * c * evals)) @ vecs.conj().T


def spectral_absmax(a, imag_rel_tol: float = 1e-8) -> float:
    """Largest eigenvalue magnitude of a matrix with real spectrum.

    Raises :class:`SpectrumNotReal` when any eigenvalue's imaginary part
    exceeds ``imag_rel_tol`` relative to the spectral scale.
    """
    a = _as_square(a)
    w = np.linalg.eigvals(a)
    scale = max(float(np.abs(w).max(initial=0.0)), 1e-300)
    imag = float(np.abs(w.imag).max(initial=0.0))
    if imag > imag_rel_tol * scale:
        raise SpectrumNotReal(
            f"spectrum is not numerically real (max imag {imag:.3e}, scale {scale:.3e})"
        )
    return float(np.abs(w.real).max(initial=0.0))


def trace_norm(a) -> float:
    """Sum of singular values of a square matrix."""
    a = _as_square(a)
    return float(np.linalg.svd(a, compute_uv=False).sum())


def sym_inverse(q, rel_tol: float = 1e-10) -> np.ndarray | None:
    """Inverse of a real symmetric matrix, or ``None`` when near singular.

    A matrix counts as singular when the ratio of its smallest to largest
    eigenvalue falls below ``rel_tol``.  The threshold is relative on
    purpose: the matrices this package inverts scale with evolution time
    and probe dimension.  Asymmetric input raises :class:`InvalidInput`.
    """
    q = _as_square(q, "symmetric matrix")
    q = np.asarray(q, dtype=float) if not np.iscomplexobj(q) else q
    if np.iscomplexobj(q):
        if np.abs(q.imag).max(initial=0.0) > 1e-12 * max(np.abs(q).max(), 1.0):
            raise InvalidInput("symmetric inverse expects a real matrix")
        q = q.real
    if np.linalg.norm(q - q.T) > 1e-10 * max(np.linalg.norm(q), 1.0):
        raise InvalidInput("matrix is not symmetric")
    w = np.linalg.eigvalsh(q)
    lam_max = w[-1]
    if lam_max <= 0.0 or w[0] / lam_max < rel_tol:
        return None
    inv = np.linalg.inv(q)
    inv = (inv + inv.T) / 2
    resid = np.linalg.norm(q @ inv - np.eye(q.shape[0]))
    if resid > 1e-8:
        raise NumericalFailure(f"inverse verification failed (residual {resid:.3e})")
    return inv
