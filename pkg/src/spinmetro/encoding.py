"""Parametric su(2) Hamiltonian families and their evolution generators.

Two unitary models are supported.  The two-parameter family is
``H = B (cos(theta) Jx + sin(theta) Jz)`` with unknowns ``(B, theta)``;
the three-parameter family tilts the field direction out of the xz-plane,
``H = B * n(theta, phi) . J`` with unknowns ``(B, theta, phi)``.  The probe
evolves as ``U = exp(-1j t H)``.

For each estimated parameter ``l`` the Hermitian generator
``G_l = 1j (d_l U^dag) U`` converts the unitary family into expectation
formulas for the quantum Fisher information and Uhlmann curvature.  The
generators can be produced through three independent routes:

* :func:`closed_generators` -- exact closed forms; every generator is a
  spin component along an explicitly known direction.
* :func:`series_generators` -- the nested-commutator series
  ``G_l = 1j * sum_n f_n ad_H^n(d_l H)`` with ``f_n = (1j t)^(n+1)/(n+1)!``.
* :func:`numeric_generators` -- central finite differences of ``U``.

The routes are deliberately redundant: the closed forms are the fast path
and the other two act as oracles for them.

Parameter ordering is fixed as ``(B, theta, phi)`` everywhere, and all
matrices built downstream (QFIM, Uhlmann) use this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInput, NonConvergence, StepInstability
from .linalg import SpinRep, expm_i, j_direction

__all__ = [
    "ModelKind",
    "ModelPoint",
    "GeneratorSet",
    "direction_vectors_2p",
    "direction_vectors_3p",
    "hamiltonian",
    "closed_generators",
    "closed_generators_2p",
    "closed_generators_3p",
    "numeric_generators",
    "series_generators",
]


class ModelKind(Enum):
    """Which unitary family is being estimated."""

    TWO_PARAM = "two"
    THREE_PARAM = "three"

    @property
    def n_params(self) -> int:
        return 2 if self is ModelKind.TWO_PARAM else 3

    @property
    def labels(self) -> tuple[str, ...]:
        return ("B", "theta") if self is ModelKind.TWO_PARAM else ("B", "theta", "phi")


@dataclass(frozen=True)
class ModelPoint:
    """One point in parameter space plus the evolution time.

    ``phi`` must be present exactly for the three-parameter family; the
    evolution time ``t`` must be positive.
    """

    b: float
    theta: float
    t: float
    phi: float | None = None

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidInput(f"evolution time must be positive, got {self.t!r}")

    @property
    def n_params(self) -> int:
        return 2 if self.phi is None else 3

    def values(self) -> np.ndarray:
        """Parameter values in the fixed ordering."""
        if self.phi is None:
            return np.array([self.b, self.theta])
        return np.array([self.b, self.theta, self.phi])

    def replace_values(self, values) -> "ModelPoint":
        values = np.asarray(values, dtype=float)
        if values.size == 2:
            return ModelPoint(b=values[0], theta=values[1], t=self.t)
        return ModelPoint(b=values[0], theta=values[1], t=self.t, phi=values[2])


def _check_point(kind: ModelKind, point: ModelPoint) -> None:
    if kind.n_params != point.n_params:
        raise InvalidInput(
            f"{kind.value}-parameter model needs phi "
            f"{'absent' if kind is ModelKind.TWO_PARAM else 'present'}, got {point!r}"
        )


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered Hermitian generators, one per estimated parameter.

    ``matrices`` has shape (d, N, N) in the fixed ``(B, theta[, phi])``
    ordering.  ``herm_residuals`` is populated only by the finite-difference
    route and records the Hermitization residual per parameter.
    """

    labels: tuple[str, ...]
    matrices: np.ndarray
    herm_residuals: tuple[float, ...] | None = None

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[0] != len(self.labels) or m.shape[1] != m.shape[2]:
            raise InvalidInput(f"generator stack has shape {m.shape}, labels {self.labels}")
        herm_gap = np.abs(m - m.conj().transpose(0, 2, 1)).max(initial=0.0)
        if herm_gap > 1e-10 * max(np.abs(m).max(initial=0.0), 1.0):
            raise InvalidInput(f"generators must be Hermitian (residual {herm_gap:.3e})")
        m.flags.writeable = False
        object.__setattr__(self, "matrices", m)

    @property
    def n_params(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.matrices.shape[-1]

    def __iter__(self):
        return iter(self.matrices)


def direction_vectors_2p(point: ModelPoint):
    """Unit direction vectors of the two-parameter model.

    Returns ``(n_theta, n_theta_prime, n1, n2)`` where ``n_theta`` is the
    field direction, ``n_theta_prime`` its theta-derivative, and ``n1``,
    ``n2`` span the plane the theta-generator rotates in; ``n2`` equals
    ``n_theta x n1`` identically.
    """
    half = point.b * point.t / 2
    ch, sh = np.cos(half), np.sin(half)
    ct, st = np.cos(point.theta), np.sin(point.theta)
    n_theta = np.array([ct, 0.0, st])
    n_theta_prime = np.array([-st, 0.0, ct])
    n1 = np.array([ch * st, -sh, -ch * ct])
    n2 = np.array([sh * st, ch, -sh * ct])
    return n_theta, n_theta_prime, n1, n2


def direction_vectors_3p(point: ModelPoint):
    """Unit direction vectors of the three-parameter model.

    Returns ``(n_theta, n1, n2)``: the field direction and the two
    rotating-frame directions attached to the theta and phi generators.
    The triple is orthonormal with ``n_theta x n2 = n1``.
    """
    half = point.b * point.t / 2
    ch, sh = np.cos(half), np.sin(half)
    ct, st = np.cos(point.theta), np.sin(point.theta)
    cp, sp = np.cos(point.phi), np.sin(point.phi)
    n_theta = np.array([ct * cp, ct * sp, st])
    n1 = np.array([sh * sp + ch * st * cp, -sh * cp + ch * st * sp, -ch * ct])
    n2 = np.array([ch * sp - sh * st * cp, -ch * cp - sh * st * sp, sh * ct])
    return n_theta, n1, n2


def hamiltonian(rep: SpinRep, kind: ModelKind, point: ModelPoint) -> np.ndarray:
    """Field Hamiltonian ``B * n . J`` at the given point."""
    _check_point(kind, point)
    if kind is ModelKind.TWO_PARAM:
        n = direction_vectors_2p(point)[0]
    else:
        n = direction_vectors_3p(point)[0]
    return point.b * j_direction(rep, n)


def closed_generators_2p(rep: SpinRep, point: ModelPoint) -> GeneratorSet:
    """Closed-form generators of the two-parameter model.

    ``G_B = -t * J_{n_theta}`` and ``G_theta = 2 sin(Bt/2) J_{n1}``.
    """
    if point.n_params != 2:
        raise InvalidInput("closed_generators_2p needs a two-parameter point")
    n_theta, _, n1, _ = direction_vectors_2p(point)
    g_b = -point.t * j_direction(rep, n_theta)
    g_theta = 2 * np.sin(point.b * point.t / 2) * j_direction(rep, n1)
    return GeneratorSet(labels=("B", "theta"), matrices=np.stack([g_b, g_theta]))


def closed_generators_3p(rep: SpinRep, point: ModelPoint) -> GeneratorSet:
    """Closed-form generators of the three-parameter model.

    ``G_B = -t * J_{n_theta}``, ``G_theta = 2 sin(Bt/2) J_{n1}`` and
    ``G_phi = 2 sin(Bt/2) cos(theta) J_{n2}``.  The cos(theta) factor in
    ``G_phi`` is required: at theta = pi/2 the Hamiltonian is independent
    of phi, so its generator must vanish there.  All three forms are
    checked against the series and finite-difference routes in the tests.
    """
    if point.n_params != 3:
        raise InvalidInput("closed_generators_3p needs a three-parameter point")
    n_theta, n1, n2 = direction_vectors_3p(point)
    sh = np.sin(point.b * point.t / 2)
    g_b = -point.t * j_direction(rep, n_theta)
    g_theta = 2 * sh * j_direction(rep, n1)
    g_phi = 2 * sh * np.cos(point.theta) * j_direction(rep, n2)
    return GeneratorSet(labels=("B", "theta", "phi"), matrices=np.stack([g_b, g_theta, g_phi]))


def closed_generators(rep: SpinRep, kind: ModelKind, point: ModelPoint) -> GeneratorSet:
    """Dispatch to the closed form matching ``kind``."""
    _check_point(kind, point)
    if kind is ModelKind.TWO_PARAM:
        return closed_generators_2p(rep, point)
    return closed_generators_3p(rep, point)


def _fd_steps(values: np.ndarray, step: float) -> np.ndarray:
    # Per-parameter step h = step * max(1, |lambda_l|): balances truncation
    # against roundoff for double precision at step ~ 1e-5.
    return step * np.maximum(1.0, np.abs(values))


def numeric_generators(
    rep: SpinRep, kind: ModelKind, point: ModelPoint, step: float = 1e-5
) -> GeneratorSet:
    """Generators by central finite differences of the evolution unitary.

    For each parameter, ``d_l U^dag`` is approximated with a central
    difference, then ``G_l = 1j (d_l U^dag) U`` is explicitly Hermitized as
    ``(A + A^dag)/2``.  The Hermitization residual is recorded on the
    returned set; a residual above 1e-4 raises :class:`StepInstability`.
    """
    _check_point(kind, point)
    if not step > 0:
        raise InvalidInput("finite-difference step must be positive")
    values = point.values()
    steps = _fd_steps(values, step)
    u = expm_i(hamiltonian(rep, kind, point), point.t)
    mats, resids = [], []
    for l in range(values.size):
        up = values.copy()
        um = values.copy()
        up[l] += steps[l]
        um[l] -= steps[l]
        u_plus = expm_i(hamiltonian(rep, kind, point.replace_values(up)), point.t)
        u_minus = expm_i(hamiltonian(rep, kind, point.replace_values(um)), point.t)
        du_dag = (u_plus.conj().T - u_minus.conj().T) / (2 * steps[l])
        raw = 1j * du_dag @ u
        resid = float(np.linalg.norm(raw - raw.conj().T) / (2 * max(np.linalg.norm(raw), 1.0)))
        if resid > 1e-4:
            raise StepInstability(
                f"finite-difference generator for {kind.labels[l]} is not Hermitian "
                f"(residual {resid:.3e}); adjust the step"
            )
        mats.append((raw + raw.conj().T) / 2)
        resids.append(resid)
    return GeneratorSet(labels=kind.labels, matrices=np.stack(mats), herm_residuals=tuple(resids))


def _hamiltonian_derivatives(rep: SpinRep, kind: ModelKind, point: ModelPoint) -> list[np.ndarray]:
    ct, st = np.cos(point.theta), np.sin(point.theta)
    if kind is ModelKind.TWO_PARAM:
        n_theta, n_theta_prime, _, _ = direction_vectors_2p(point)
        return [j_direction(rep, n_theta), point.b * j_direction(rep, n_theta_prime)]
    cp, sp = np.cos(point.phi), np.sin(point.phi)
    n_theta = direction_vectors_3p(point)[0]
    n_theta_prime = np.array([-st * cp, -st * sp, ct])
    n_phi_prime = np.array([-sp, cp, 0.0])
    return [
        j_direction(rep, n_theta),
        point.b * j_direction(rep, n_theta_prime),
        point.b * ct * j_direction(rep, n_phi_prime),
    ]


def series_generators(
    rep: SpinRep,
    kind: ModelKind,
    point: ModelPoint,
    tol: float = 1e-14,
    max_terms: int = 200,
) -> GeneratorSet:
    """Generators from the nested-commutator series.

    ``G_l = 1j * sum_n f_n ad_H^n(d_l H)`` with
    ``f_n = (1j t)^(n+1) / (n+1)!``.  Terms are added until the latest
    one's spectral norm drops below ``tol``; factorial decay guarantees
    convergence well inside ``max_terms`` for the field strengths and
    times this package targets.
    """
    _check_point(kind, point)
    if not tol > 0:
        raise InvalidInput("series tolerance must be positive")
    h = hamiltonian(rep, kind, point)
    mats = []
    for dh in _hamiltonian_derivatives(rep, kind, point):
        x = dh.astype(complex)
        f = 1j * point.t  # f_0
        acc = np.zeros_like(x)
        for n in range(max_terms + 1):
            term = 1j * f * x
            acc = acc + term
            if np.linalg.norm(term, 2) < tol:
                break
            x = h @ x - x @ h
            f *= 1j * point.t / (n + 2)
        else:
            raise NonConvergence(
                f"generator series did not converge within {max_terms} terms"
            )
        mats.append((acc + acc.conj().T) / 2)
    return GeneratorSet(labels=kind.labels, matrices=np.stack(mats))
