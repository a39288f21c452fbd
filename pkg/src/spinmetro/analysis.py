"""Experiment drivers: grid scans, scaling tables, rank experiments, reports.

Everything here is deterministic given its configuration.  Grids are
evaluated with vectorized kernels whose cell values are identical to the
one-point library route (the tests pin this); random experiments draw each
trial from its own counter-derived seed so results are independent of
evaluation order.  CSV output uses '.' decimals, ',' delimiters, a header
row and 17 significant digits so repeated runs are bytewise identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .encoding import (
    GeneratorSet,
    ModelKind,
    ModelPoint,
    closed_generators,
    numeric_generators,
    series_generators,
)
from .errors import InvalidInput, NumericalFailure
from .linalg import build_spin_rep
from .metrology import batched_qfim_uhlmann, check_probe, classical_fim, incompat_report
from .models import ProbeSpec, make_probe

__all__ = [
    "ScanConfig",
    "ScanResult",
    "run_scan",
    "shrinkage_fractions",
    "ScalingResult",
    "scaling_table",
    "RankExperimentConfig",
    "fim_rank_experiment",
    "metrics_report",
    "format_csv_value",
    "write_json",
]

TWO_PI = 2 * np.pi


def format_csv_value(x) -> str:
    """17-significant-digit decimal rendering; empty string for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return ""
    return f"{x:.17g}"


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_csv_value(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, doc) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


@dataclass(frozen=True)
class ScanConfig:
    """Configuration of one T(theta, B) grid scan.

    ``b_range`` defaults to one period of the model in the field strength,
    ``[0, 2 pi / t]``; the probe can be a :class:`ProbeSpec` or an explicit
    amplitude vector of length ``dim``.
    """

    kind: ModelKind
    dim: int
    probe: ProbeSpec | np.ndarray
    t: float
    model_phi: float = 0.0
    theta_range: tuple[float, float] = (0.0, TWO_PI)
    b_range: tuple[float, float] | None = None
    theta_count: int = 101
    b_count: int = 101
    weight: np.ndarray | None = None
    rel_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidInput(f"dimension must be an integer >= 2, got {self.dim!r}")
        if not self.t > 0:
            raise InvalidInput("evolution time must be positive")
        if self.theta_count < 2 or self.b_count < 2:
            raise InvalidInput("grid needs at least 2 points per axis")
        if not self.theta_range[1] > self.theta_range[0]:
            raise InvalidInput("theta range is empty")
        if self.b_range is not None and not self.b_range[1] > self.b_range[0]:
            raise InvalidInput("B range is empty")
        if not self.rel_tol > 0:
            raise InvalidInput("singularity tolerance must be positive")

    @property
    def effective_b_range(self) -> tuple[float, float]:
        return self.b_range if self.b_range is not None else (0.0, TWO_PI / self.t)

    def probe_state(self) -> np.ndarray:
        if isinstance(self.probe, ProbeSpec):
            if self.probe.dim != self.dim:
                raise InvalidInput("probe spec dimension disagrees with scan dimension")
            return make_probe(self.probe)
        return check_probe(self.probe, self.dim)


@dataclass(frozen=True)
class ScanResult:
    """Flattened grid in row-major (theta outer, B inner) order."""

    config: ScanConfig
    theta: np.ndarray
    b: np.ndarray
    r_ai: np.ndarray
    delta: np.ndarray
    det_q: np.ndarray
    singular: np.ndarray

    HEADER = ("theta", "B", "R", "Delta", "T", "det_q", "singular")

    @property
    def t_gap(self) -> np.ndarray:
        return self.r_ai - self.delta

    @property
    def shape(self) -> tuple[int, int]:
        return (self.config.theta_count, self.config.b_count)

    def rows(self):
        t_gap = self.t_gap
        for i in range(self.theta.size):
            if self.singular[i]:
                yield (self.theta[i], self.b[i], None, None, None, self.det_q[i], True)
            else:
                yield (
                    self.theta[i],
                    self.b[i],
                    self.r_ai[i],
                    self.delta[i],
                    t_gap[i],
                    self.det_q[i],
                    False,
                )

    def write_csv(self, path) -> None:
        _write_csv(path, self.HEADER, self.rows())


def _grid_generator_stack(config: ScanConfig, theta: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Closed-form generator stack for every grid cell, shape (G, d, N, N).

    Vectorized twin of :func:`spinmetro.encoding.closed_generators`; the
    tests assert cell-for-cell agreement with the scalar route.
    """
    jvec = build_spin_rep(config.dim).jvec
    t = config.t
    g = theta.size
    ch, sh = np.cos(b * t / 2), np.sin(b * t / 2)
    ct, st = np.cos(theta), np.sin(theta)
    zeros = np.zeros(g)
    if config.kind is ModelKind.TWO_PARAM:
        n_theta = np.stack([ct, zeros, st], axis=1)
        n1 = np.stack([ch * st, -sh, -ch * ct], axis=1)
        vecs = np.stack([n_theta, n1], axis=1)
        pref = np.stack([-t * np.ones(g), 2 * sh], axis=1)
    else:
        cp, sp = np.cos(config.model_phi), np.sin(config.model_phi)
        n_theta = np.stack([ct * cp, ct * sp, st], axis=1)
        n1 = np.stack([sh * sp + ch * st * cp, -sh * cp + ch * st * sp, -ch * ct], axis=1)
        n2 = np.stack([ch * sp - sh * st * cp, -ch * cp - sh * st * sp, sh * ct], axis=1)
        vecs = np.stack([n_theta, n1, n2], axis=1)
        pref = np.stack([-t * np.ones(g), 2 * sh, 2 * sh * ct], axis=1)
    return np.einsum("glk,kij->glij", vecs, jvec) * pref[:, :, None, None]


def run_scan(config: ScanConfig) -> ScanResult:
    """Evaluate R, Delta and T = R - Delta over the (theta, B) grid.

    Cells with a singular QFIM (relative eigenvalue ratio below
    ``config.rel_tol``) are flagged and carry no bound values.
    """
    thetas = np.linspace(*config.theta_range, config.theta_count)
    bs = np.linspace(*config.effective_b_range, config.b_count)
    th_grid, b_grid = np.meshgrid(thetas, bs, indexing="ij")
    theta = th_grid.ravel()
    b = b_grid.ravel()
    gens = _grid_generator_stack(config, theta, b)
    psi = config.probe_state()
    q, d = batched_qfim_uhlmann(gens, psi)

    evals = np.linalg.eigvalsh(q)
    lam_max = evals[..., -1]
    singular = (lam_max <= 0) | (evals[..., 0] < config.rel_tol * lam_max)
    det_q = np.linalg.det(q)
    r_ai = np.full(theta.size, np.nan)
    delta = np.full(theta.size, np.nan)
    regular = ~singular
    if regular.any():
        q_reg, d_reg = q[regular], d[regular]
        q_inv = np.linalg.inv(q_reg)
        lam = np.linalg.eigvals(1j * q_inv @ d_reg)
        scale = np.maximum(np.abs(lam).max(axis=-1), 1e-300)
        if (np.abs(lam.imag).max(axis=-1) > 1e-8 * scale).any():
            raise NumericalFailure("incompatibility spectrum not numerically real on grid")
        r_ai[regular] = np.abs(lam.real).max(axis=-1)
        if config.weight is None:
            sandwich = q_inv @ d_reg @ q_inv
            c_sld = np.trace(q_inv, axis1=-2, axis2=-1)
        else:
            w = np.asarray(config.weight, dtype=float)
            w_evals, w_vecs = np.linalg.eigh(w)
            if w_evals[0] <= 0:
                raise InvalidInput("weight matrix must be positive definite")
            w_sqrt = (w_vecs * np.sqrt(w_evals)) @ w_vecs.T
            sandwich = w_sqrt @ q_inv @ d_reg @ q_inv @ w_sqrt
            c_sld = np.trace(w @ q_inv, axis1=-2, axis2=-1)
        gap = np.linalg.svd(sandwich, compute_uv=False).sum(axis=-1)
        delta[regular] = gap / c_sld
    return ScanResult(
        config=config, theta=theta, b=b, r_ai=r_ai, delta=delta, det_q=det_q, singular=singular
    )


def shrinkage_fractions(res_a: ScanResult, res_b: ScanResult, threshold: float = 0.05):
    """Fraction of regular cells with T below ``threshold``, per grid.

    Returns ``(f_a, f_b)``; a grid with no regular cells reports ``None``.
    """
    if res_a.shape != res_b.shape:
        raise InvalidInput(f"grid shapes differ: {res_a.shape} vs {res_b.shape}")

    def frac(res: ScanResult):
        regular = ~res.singular
        if not regular.any():
            return None
        return float((res.t_gap[regular] < threshold).sum() / regular.sum())

    return frac(res_a), frac(res_b)


@dataclass(frozen=True)
class ScalingResult:
    """Gamma values and fitted log-log slopes, one slope per probe angle."""

    kind: ModelKind
    baseline_dim: int
    alphas: tuple[float, ...]
    dims: tuple[int, ...]
    gammas: dict = field(hash=False)
    slopes: dict = field(hash=False)

    HEADER = ("alpha", "N", "Gamma", "slope")

    def rows(self):
        for alpha in self.alphas:
            for n in self.dims:
                yield (alpha, n, self.gammas[alpha].get(n), self.slopes[alpha])

    def write_csv(self, path) -> None:
        _write_csv(path, self.HEADER, self.rows())


def scaling_table(
    kind: ModelKind,
    alphas,
    dims,
    point: ModelPoint,
    probe_phi: float = 0.0,
    rel_tol: float = 1e-10,
) -> ScalingResult:
    """Gamma = Tr(Q_N Q_baseline^-1) across dimensions, with fitted slopes.

    The baseline is the qubit (N = 2) for the two-parameter model.  The
    three-parameter model has a singular qubit QFIM, so the smallest
    nonsingular dimension N = 4 serves as baseline instead; its slope is
    fitted against log N (versus log(N - 1) for two parameters).  An alpha
    whose baseline QFIM is singular yields empty Gamma and slope fields.
    """
    dims = tuple(int(n) for n in dims)
    if any(n < 4 for n in dims):
        raise InvalidInput("scaling dimensions must be >= 4")
    alphas = tuple(float(a) for a in alphas)
    baseline_dim = 2 if kind is ModelKind.TWO_PARAM else 4
    baseline_rep = build_spin_rep(baseline_dim)
    gammas: dict = {}
    slopes: dict = {}
    for alpha in alphas:
        base_gens = closed_generators(baseline_rep, kind, point)
        base_probe = make_probe(ProbeSpec(dim=baseline_dim, alpha=alpha, phi=probe_phi))
        base = incompat_report(base_gens, base_probe, rel_tol=rel_tol)
        per_alpha: dict = {}
        if base.singular:
            gammas[alpha] = {n: None for n in dims}
            slopes[alpha] = None
            continue
        base_inv = np.linalg.inv(base.qfim)
        for n in dims:
            rep = build_spin_rep(n)
            gens = closed_generators(rep, kind, point)
            probe = make_probe(ProbeSpec(dim=n, alpha=alpha, phi=probe_phi))
            rep_n = incompat_report(gens, probe, rel_tol=rel_tol)
            per_alpha[n] = float(np.trace(rep_n.qfim @ base_inv))
        gammas[alpha] = per_alpha
        x = np.array(dims, dtype=float)
        x = x - 1.0 if kind is ModelKind.TWO_PARAM else x
        y = np.array([per_alpha[n] for n in dims])
        slopes[alpha] = float(np.polyfit(np.log(x), np.log(y), 1)[0])
    return ScalingResult(
        kind=kind,
        baseline_dim=baseline_dim,
        alphas=alphas,
        dims=dims,
        gammas=gammas,
        slopes=slopes,
    )


@dataclass(frozen=True)
class RankExperimentConfig:
    """Monte-Carlo check of the outcome-count rank bound on the FIM."""

    n_params: int
    n_outcomes: int
    trials: int = 1000
    seed: int = 0
    lam: np.ndarray | None = None

    def __post_init__(self):
        if self.n_params < 1:
            raise InvalidInput("need at least one parameter")
        if self.n_outcomes < 2:
            raise InvalidInput("need at least two outcomes")
        if self.trials < 1:
            raise InvalidInput("need at least one trial")

    def lam_point(self) -> np.ndarray:
        if self.lam is None:
            return np.zeros(self.n_params)
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (self.n_params,):
            raise InvalidInput(f"evaluation point must have {self.n_params} components")
        return lam


def _softmax_family(a, b, lam):
    """Probabilities and analytic gradients of p_i  propto  exp(a_i + b_i . lam)."""
    z = a + b @ lam
    z -= z.max()
    p = np.exp(z)
    p /= p.sum()
    grads = (p[None, :] * (b.T - (p @ b)[:, None]))  # (d, n): d p_i / d lam_j
    return p, grads


def fim_rank_experiment(config: RankExperimentConfig) -> dict:
    """Sample softmax-affine families; verify rank(F) <= min(d, n - 1).

    Each trial draws standard-normal offsets and slopes from a seed derived
    from (seed, trial index), so trial i is independent of evaluation
    order.  The FIM is computed two ways: the direct weighted-gradient sum
    and the product decomposition that eliminates the redundant last
    outcome; their agreement is recorded as the decomposition residual.
    """
    d, n = config.n_params, config.n_outcomes
    lam = config.lam_point()
    rank_bound = min(d, n - 1)
    max_rank = 0
    violations = 0
    full_rank = 0
    max_resid = 0.0
    max_det_norm = 0.0
    for trial in range(config.trials):
        rng = np.random.default_rng((config.seed, d, n, trial))
        a = rng.standard_normal(n)
        b = rng.standard_normal((n, d))
        p, grads = _softmax_family(a, b, lam)
        f = classical_fim(p, grads)
        # decomposition route: F = eta . dtil with the last outcome eliminated
        dmat = grads  # (d, n)
        eta = dmat[:, :-1] / p[:-1] + (dmat[:, :-1].sum(axis=1) / p[-1])[:, None]
        f_decomp = eta @ dmat[:, :-1].T
        scale = max(np.linalg.norm(f), 1e-300)
        max_resid = max(max_resid, float(np.linalg.norm(f - f_decomp) / scale))
        svals = np.linalg.svd(f, compute_uv=False)
        rank = int((svals > 1e-10 * max(svals[0], 1e-300)).sum())
        max_rank = max(max_rank, rank)
        violations += rank > rank_bound
        full_rank += rank == d
        max_det_norm = max(
            max_det_norm, float(abs(np.linalg.det(f)) / np.linalg.norm(f) ** d)
        )
    return {
        "n_params": d,
        "n_outcomes": n,
        "trials": config.trials,
        "seed": config.seed,
        "lam": [float(v) for v in lam],
        "rank_bound": rank_bound,
        "max_rank": max_rank,
        "rank_violations": int(violations),
        "full_rank_fraction": full_rank / config.trials,
        "max_decomposition_residual": max_resid,
        "max_normalized_det": max_det_norm,
    }


def _route_residuals(rep, kind, point, closed: GeneratorSet) -> dict:
    """Max relative spectral-norm deviation of the oracle routes."""
    series = series_generators(rep, kind, point)
    numeric = numeric_generators(rep, kind, point)

    def rel(a, b):
        return float(
            np.linalg.norm(a - b, 2) / max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1e-12)
        )

    return {
        "series_vs_closed": max(
            rel(series.matrices[i], closed.matrices[i]) for i in range(closed.n_params)
        ),
        "numeric_vs_closed": max(
            rel(numeric.matrices[i], closed.matrices[i]) for i in range(closed.n_params)
        ),
    }


def metrics_report(
    kind: ModelKind,
    dim: int,
    spec: ProbeSpec,
    point: ModelPoint,
    weight=None,
    rel_tol: float = 1e-10,
) -> dict:
    """Machine-readable report for one (model, probe, point).

    Carries the QFIM, Uhlmann matrix, determinant, bounds, incompatibility,
    the singularity flag and the generator cross-route residuals.  Singular
    points produce a partial report with null bound fields.
    """
    rep = build_spin_rep(dim)
    probe = make_probe(spec)
    gens = closed_generators(rep, kind, point)
    report = incompat_report(gens, probe, weight=weight, rel_tol=rel_tol)
    doc = {
        "model": kind.value,
        "dim": int(dim),
        "probe": {"alpha": float(spec.alpha), "phi": float(spec.phi)},
        "point": {
            "B": float(point.b),
            "theta": float(point.theta),
            "phi": None if point.phi is None else float(point.phi),
            "t": float(point.t),
        },
        "labels": list(report.labels),
        "Q": [[float(x) for x in row] for row in report.qfim],
        "D": [[float(x) for x in row] for row in report.uhlmann],
        "det_q": float(report.det_q),
        "singular": bool(report.singular),
        "c_sld": None if report.c_sld is None else float(report.c_sld),
        "c_h": None if report.c_h is None else float(report.c_h),
        "delta": None if report.delta is None else float(report.delta),
        "r_ai": None if report.r_ai is None else float(report.r_ai),
        "generator_route_residuals": _route_residuals(rep, kind, point, gens),
    }
    return doc
