"""Estimation-theory core: QFIM, Uhlmann curvature, SLD, bounds.

All routines are model-agnostic; they consume generator sets or density
matrices and know nothing about su(2).  Near-singular quantum Fisher
matrices are never pseudo-inverted: every quantity that needs an inverse
returns ``None`` (or sets a flag) instead, so callers can mask those
points.  The misleading regime is exactly where ``det Q -> 0``, and a
silently regularized inverse would hide it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import GeneratorSet
from .errors import InvalidInput, NumericalFailure
from .linalg import require_hermitian, spectral_absmax, sym_inverse, trace_norm

__all__ = [
    "check_probe",
    "qfim_uhlmann",
    "qfim_from_generators",
    "uhlmann_from_generators",
    "batched_qfim_uhlmann",
    "qfim_from_state_derivatives",
    "sld_solve",
    "qfim_from_slds",
    "uhlmann_from_slds",
    "born_probabilities",
    "classical_fim",
    "ai_measure",
    "ai_two_param",
    "holevo_pure",
    "submodel",
    "IncompatReport",
    "incompat_report",
]


def check_probe(psi, dim: int | None = None) -> np.ndarray:
    """Validate a pure probe state: complex vector with unit norm."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvalidInput(f"probe must be a vector, got shape {psi.shape}")
    if dim is not None and psi.size != dim:
        raise InvalidInput(f"probe has dimension {psi.size}, expected {dim}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise InvalidInput(f"probe is not normalized (norm {np.linalg.norm(psi)!r})")
    return psi


def _moment_matrix(gens: GeneratorSet, psi: np.ndarray):
    v = np.einsum("lij,j->li", gens.matrices, psi)
    means = np.einsum("i,li->l", psi.conj(), v).real
    second = np.einsum("li,mi->lm", v.conj(), v)
    return second, means


def qfim_uhlmann(gens: GeneratorSet, probe) -> tuple[np.ndarray, np.ndarray]:
    """QFIM and Uhlmann matrix of a pure unitary model, from generators.

    ``Q_lm = 2 <{G_l, G_m}> - 4 <G_l><G_m>`` and
    ``D_lm = -2j <[G_l, G_m]>``, expectations in the probe state.  Q is
    symmetric positive semidefinite, D real antisymmetric.
    """
    psi = check_probe(probe, gens.dim)
    second, means = _moment_matrix(gens, psi)
    asym = np.abs(second.real - second.real.T).max()
    if asym > 1e-9 * max(np.abs(second).max(), 1.0):
        raise NumericalFailure(
            f"generator moments lost Hermitian symmetry (residual {asym:.3e})"
        )
    q = 4 * (second.real - np.outer(means, means))
    d = 4 * second.imag
    return (q + q.T) / 2, (d - d.T) / 2


def qfim_from_generators(gens: GeneratorSet, probe) -> np.ndarray:
    return qfim_uhlmann(gens, probe)[0]


def uhlmann_from_generators(gens: GeneratorSet, probe) -> np.ndarray:
    return qfim_uhlmann(gens, probe)[1]


def batched_qfim_uhlmann(gen_stack, probes) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`qfim_uhlmann` over broadcast leading axes.

    ``gen_stack`` has shape (..., d, N, N) and ``probes`` (..., N); the
    leading axes broadcast against each other.  Returns ``(Q, D)`` with
    shape (..., d, d).  Probes must be pre-normalized.
    """
    gen_stack = np.asarray(gen_stack, dtype=complex)
    probes = np.asarray(probes, dtype=complex)
    v = np.einsum("...lij,...j->...li", gen_stack, probes)
    means = np.einsum("...i,...li->...l", probes.conj(), v).real
    second = np.einsum("...li,...mi->...lm", v.conj(), v)
    q = 4 * (second.real - means[..., :, None] * means[..., None, :])
    d = 4 * second.imag
    return q, d


def qfim_from_state_derivatives(family, values, step: float = 1e-5):
    """QFIM and Uhlmann matrix from finite differences of the state itself.

    ``family`` maps a parameter vector to a normalized pure state.  This is
    the generator-free route: with ``|d_j psi>`` from central differences,
    ``Q_jk = 4 Re(<d_j psi|d_k psi> - <d_j psi|psi><psi|d_k psi>)`` and the
    Uhlmann matrix is 4 times the imaginary part of the same bracket.
    Differentiated states whose norm drifts beyond 1e-6 raise
    :class:`InvalidInput` (the family is then not a pure-state family at
    the working step).
    """
    values = np.asarray(values, dtype=float)
    if not step > 0:
        raise InvalidInput("finite-difference step must be positive")
    psi = check_probe(family(values))
    steps = step * np.maximum(1.0, np.abs(values))
    derivs = []
    for j in range(values.size):
        up, um = values.copy(), values.copy()
        up[j] += steps[j]
        um[j] -= steps[j]
        psi_p = np.asarray(family(up), dtype=complex)
        psi_m = np.asarray(family(um), dtype=complex)
        for vec in (psi_p, psi_m):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-6:
                raise InvalidInput(
                    "state family norm drifted beyond 1e-6 at the working step"
                )
        derivs.append((psi_p - psi_m) / (2 * steps[j]))
    dpsi = np.array(derivs)
    overlap = dpsi.conj() @ dpsi.T
    dot_psi = dpsi.conj() @ psi
    bracket = overlap - np.outer(dot_psi, dot_psi.conj())
    q = 4 * bracket.real
    d = 4 * bracket.imag
    return (q + q.T) / 2, (d - d.T) / 2


def sld_solve(rho, drho, support_tol: float = 1e-12) -> np.ndarray:
    """Symmetric logarithmic derivative: solve ``2 drho = {L, rho}``.

    Solved in the eigenbasis of ``rho`` where the anticommutator equation
    decouples: ``L_jk = 2 drho_jk / (p_j + p_k)`` on the support
    (eigenvalue sums above ``support_tol``), zero elsewhere.
    """
    rho = require_hermitian(rho, name="density matrix")
    # derivative inputs often come from finite differences; tolerate their
    # noise floor, then symmetrize
    drho = require_hermitian(drho, tol=1e-8, name="density-matrix derivative")
    drho = (drho + drho.conj().T) / 2
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise InvalidInput(f"density matrix has trace {np.trace(rho)!r}, expected 1")
    p, v = np.linalg.eigh(rho)
    dr = v.conj().T @ drho @ v
    denom = p[:, None] + p[None, :]
    on_support = denom > support_tol
    l_eig = np.zeros_like(dr)
    l_eig[on_support] = 2 * dr[on_support] / denom[on_support]
    l_mat = v @ l_eig @ v.conj().T
    return (l_mat + l_mat.conj().T) / 2


def qfim_from_slds(rho, slds) -> np.ndarray:
    """QFIM from SLD operators: ``Q_jk = Re Tr(rho L_j L_k)``."""
    rho = np.asarray(rho, dtype=complex)
    slds = [np.asarray(l, dtype=complex) for l in slds]
    d = len(slds)
    q = np.empty((d, d))
    for j in range(d):
        for k in range(j, d):
            q[j, k] = q[k, j] = np.trace(rho @ slds[j] @ slds[k]).real
    return q


def uhlmann_from_slds(rho, slds) -> np.ndarray:
    """Uhlmann matrix from SLDs: ``D_jk = Im Tr(rho L_j L_k)``."""
    rho = np.asarray(rho, dtype=complex)
    slds = [np.asarray(l, dtype=complex) for l in slds]
    d = len(slds)
    mat = np.zeros((d, d))
    for j in range(d):
        for k in range(j + 1, d):
            val = np.trace(rho @ slds[j] @ slds[k]).imag
            mat[j, k] = val
            mat[k, j] = -val
    return mat


def born_probabilities(rho, povm) -> np.ndarray:
    """Outcome probabilities ``p_i = Tr(rho Pi_i)`` for a POVM.

    The POVM must resolve the identity to 1e-10; tiny negative
    probabilities from rounding are clipped at -1e-12.
    """
    rho = np.asarray(rho, dtype=complex)
    povm = [np.asarray(e, dtype=complex) for e in povm]
    total = sum(povm)
    if np.abs(total - np.eye(rho.shape[0])).max() > 1e-10:
        raise InvalidInput("POVM does not sum to the identity")
    probs = np.array([np.trace(rho @ e).real for e in povm])
    if probs.min(initial=0.0) < -1e-12:
        raise NumericalFailure(f"negative Born probability {probs.min():.3e}")
    if abs(probs.sum() - 1.0) > 1e-10:
        raise NumericalFailure(f"Born probabilities sum to {probs.sum()!r}")
    return np.clip(probs, 0.0, None)


def classical_fim(probs, grads) -> np.ndarray:
    """Classical Fisher information matrix of a finite distribution.

    ``grads[j, i] = d p_i / d lambda_j`` must have vanishing row sums
    (probability is conserved); outcomes with ``p_i < 1e-14`` are skipped.
    """
    probs = np.asarray(probs, dtype=float)
    grads = np.atleast_2d(np.asarray(grads, dtype=float))
    if probs.min(initial=0.0) < -1e-12 or abs(probs.sum() - 1.0) > 1e-10:
        raise InvalidInput("probabilities must be nonnegative and sum to 1")
    if grads.shape[1] != probs.size:
        raise InvalidInput(
            f"gradient matrix has {grads.shape[1]} columns for {probs.size} outcomes"
        )
    row_sums = np.abs(grads.sum(axis=1))
    if row_sums.max(initial=0.0) > 1e-10 * max(np.abs(grads).max(initial=0.0), 1.0):
        raise InvalidInput(
            "gradient rows must sum to zero (probability normalization broken)"
        )
    keep = probs >= 1e-14
    g = grads[:, keep]
    f = (g / probs[keep]) @ g.T
    return (f + f.T) / 2


def ai_measure(q, d, rel_tol: float = 1e-10) -> float | None:
    """Asymptotic incompatibility: largest eigenvalue magnitude of ``1j Q^-1 D``.

    Returns ``None`` when Q is singular at ``rel_tol``; otherwise a number
    in [0, 1] up to rounding.
    """
    q = np.asarray(q, dtype=float)
    d = np.asarray(d, dtype=float)
    if q.shape != d.shape:
        raise InvalidInput(f"shape mismatch: Q {q.shape} vs D {d.shape}")
    q_inv = sym_inverse(q, rel_tol=rel_tol)
    if q_inv is None:
        return None
    return spectral_absmax(1j * q_inv @ d)


def ai_two_param(q, d) -> float | None:
    """Two-parameter incompatibility via ``sqrt(det D / det Q)``.

    Equivalent to :func:`ai_measure` for d = 2; returns ``None`` when
    ``det Q <= 0``.
    """
    q = np.asarray(q, dtype=float)
    d = np.asarray(d, dtype=float)
    if q.shape != (2, 2) or d.shape != (2, 2):
        raise InvalidInput("ai_two_param expects 2x2 matrices")
    det_q = float(np.linalg.det(q))
    if det_q <= 0:
        return None
    det_d = float(np.linalg.det(d))
    return float(np.sqrt(max(det_d, 0.0) / det_q))


def _check_weight(w, dim: int) -> np.ndarray:
    if w is None:
        return np.eye(dim)
    w = np.asarray(w, dtype=float)
    if w.shape != (dim, dim):
        raise InvalidInput(f"weight matrix has shape {w.shape}, expected {(dim, dim)}")
    if np.linalg.norm(w - w.T) > 1e-10 * max(np.linalg.norm(w), 1.0):
        raise InvalidInput("weight matrix must be symmetric")
    if np.linalg.eigvalsh(w)[0] <= 0:
        raise InvalidInput("weight matrix must be positive definite")
    return w


def holevo_pure(q, d, weight=None, rel_tol: float = 1e-10):
    """Scalar SLD cost, pure-model Holevo bound and their normalized gap.

    Returns ``(c_sld, c_h, delta)`` or ``None`` for singular Q, where
    ``c_sld = tr(W Q^-1)`` and
    ``c_h = c_sld + ||sqrt(W) Q^-1 D Q^-1 sqrt(W)||_1``.  The symmetric
    sqrt(W) sandwich reduces to ``||Q^-1 D Q^-1||_1`` at W = identity.
    """
    q = np.asarray(q, dtype=float)
    d = np.asarray(d, dtype=float)
    w = _check_weight(weight, q.shape[0])
    q_inv = sym_inverse(q, rel_tol=rel_tol)
    if q_inv is None:
        return None
    c_sld = float(np.trace(w @ q_inv))
    if weight is None:
        sandwich = q_inv @ d @ q_inv
    else:
        evals, vecs = np.linalg.eigh(w)
        w_sqrt = (vecs * np.sqrt(evals)) @ vecs.T
        sandwich = w_sqrt @ q_inv @ d @ q_inv @ w_sqrt
    gap = trace_norm(sandwich)
    c_h = c_sld + gap
    return c_sld, c_h, gap / c_sld


def submodel(q, d, subset):
    """Restrict (Q, D) to a sub-model: principal blocks on ``subset``.

    ``subset`` must be a nonempty proper subset of the parameter indices.
    """
    q = np.asarray(q, dtype=float)
    d = np.asarray(d, dtype=float)
    n = q.shape[0]
    idx = sorted(set(int(i) for i in subset))
    if not idx or len(idx) >= n:
        raise InvalidInput(f"subset must be nonempty and proper, got {subset!r}")
    if idx[0] < 0 or idx[-1] >= n:
        raise InvalidInput(f"subset indices out of range for {n} parameters")
    ix = np.ix_(idx, idx)
    return q[ix], d[ix]


@dataclass(frozen=True)
class IncompatReport:
    """Precision and incompatibility summary at one (model, probe, point).

    On singular points only ``qfim``, ``uhlmann``, ``det_q`` and the flag
    are meaningful; the bound fields are ``None``.
    """

    labels: tuple[str, ...]
    qfim: np.ndarray
    uhlmann: np.ndarray
    det_q: float
    singular: bool
    weight: np.ndarray
    c_sld: float | None = None
    c_h: float | None = None
    delta: float | None = None
    r_ai: float | None = None


def incompat_report(
    gens: GeneratorSet, probe, weight=None, rel_tol: float = 1e-10
) -> IncompatReport:
    """Evaluate the full report for one generator set and probe."""
    q, d = qfim_uhlmann(gens, probe)
    w = _check_weight(weight, q.shape[0])
    det_q = float(np.linalg.det(q))
    r_ai = ai_measure(q, d, rel_tol=rel_tol)
    if r_ai is None:
        return IncompatReport(
            labels=gens.labels, qfim=q, uhlmann=d, det_q=det_q, singular=True, weight=w
        )
    c_sld, c_h, delta = holevo_pure(q, d, weight=weight, rel_tol=rel_tol)
    return IncompatReport(
        labels=gens.labels,
        qfim=q,
        uhlmann=d,
        det_q=det_q,
        singular=False,
        weight=w,
        c_sld=c_sld,
        c_h=c_h,
        delta=delta,
        r_ai=r_ai,
    )
