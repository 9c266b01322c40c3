"""Independent oracles and verification reports.

These checks deliberately avoid the code paths they validate: the ordering
check enumerates decoding orders by brute force, the projection checks pit the
analytic water level against a dense grid scan and random feasible
competitors, and the single-user capacity oracle is a classical water-filling
computation over channel eigenmodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    build_instance,
    evaluate_objective,
    feasibility_check,
    generate_rayleigh_channels,
    ordering_oracle,
    random_feasible_covariances,
)
from .projection import dual_psi, project_sum_power

__all__ = [
    "grid_psi_max",
    "grid_psi_scan",
    "sample_feasible_competitors",
    "waterfilling_capacity",
    "Theorem1Report",
    "verify_theorem1",
    "ProjectionReport",
    "verify_projection",
]

DEFAULT_GRID_POINTS = 10_000_000


def _psi_at(mus: np.ndarray, lam: np.ndarray, P: float, const: float) -> np.ndarray:
    diff = np.maximum(lam[None, :] - np.asarray(mus, dtype=float)[:, None], 0.0)
    return -0.5 * np.sum(diff * diff, axis=1) - np.asarray(mus) * P + const


def grid_psi_scan(
    eigenvalues: np.ndarray, P: float, num_points: int, chunk: int = 1_000_000
) -> tuple[float, float]:
    """Literal scan of psi over the uniform grid plus breakpoints.

    Reference implementation of the grid oracle; cost grows linearly with
    ``num_points``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    const = 0.5 * float(np.dot(lam, lam))
    hi = max(float(lam.max()), 0.0)
    points = np.linspace(0.0, hi, num_points)
    breakpoints = np.clip(lam, 0.0, hi)
    best_mu, best_psi = 0.0, -np.inf
    for start in range(0, num_points, chunk):
        mus = points[start : start + chunk]
        psi = _psi_at(mus, lam, P, const)
        j = int(np.argmax(psi))
        if psi[j] > best_psi:
            best_mu, best_psi = float(mus[j]), float(psi[j])
    psi_b = _psi_at(breakpoints, lam, P, const)
    j = int(np.argmax(psi_b))
    if psi_b[j] > best_psi:
        best_mu, best_psi = float(breakpoints[j]), float(psi_b[j])
    return best_mu, best_psi


def grid_psi_max(
    eigenvalues: np.ndarray, P: float, num_points: int = DEFAULT_GRID_POINTS
) -> tuple[float, float]:
    """Exact maximum of psi over the uniform grid plus breakpoints.

    Equals ``grid_psi_scan`` on the same sample set: psi is concave between
    consecutive breakpoints, so within each piece the best grid point is one
    of the two neighbours of the unconstrained vertex or a piece edge. Only
    those candidates are evaluated, which keeps the 1e7-point oracle cheap.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if num_points < 2:
        raise ValueError("need at least two grid points")
    const = 0.5 * float(np.dot(lam, lam))
    hi = max(float(lam.max()), 0.0)
    if hi == 0.0:
        psi0 = float(_psi_at(np.zeros(1), lam, P, const)[0])
        return 0.0, psi0
    h = hi / (num_points - 1)

    desc = np.sort(lam)[::-1]
    prefix = np.concatenate([[0.0], np.cumsum(desc)])
    edges = np.concatenate([[0.0], np.clip(desc[::-1], 0.0, hi), [hi]])

    candidates = [0.0, hi]
    candidates.extend(np.clip(lam, 0.0, hi).tolist())
    for count in range(1, desc.size + 1):
        vertex = (prefix[count] - P) / count
        for t in (np.floor(vertex / h), np.ceil(vertex / h)):
            if 0 <= t <= num_points - 1:
                candidates.append(t * h)
    for edge in edges:
        for t in (np.floor(edge / h), np.ceil(edge / h)):
            if 0 <= t <= num_points - 1:
                candidates.append(t * h)

    mus = np.asarray(candidates)
    psi = _psi_at(mus, lam, P, const)
    j = int(np.argmax(psi))
    return float(mus[j]), float(psi[j])


def sample_feasible_competitors(
    K: int, n_r: int, P: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Random members of Omega_+(P), stacked as (count, K, n_r, n_r)."""
    G = rng.standard_normal((count, K, n_r, n_r)) + 1j * rng.standard_normal(
        (count, K, n_r, n_r)
    )
    Z = G @ np.conj(np.swapaxes(G, -1, -2))
    totals = np.real(np.trace(Z, axis1=-2, axis2=-1)).sum(axis=-1)
    fills = rng.uniform(0.05, 1.0, size=count)
    return Z * (fills * P / totals)[:, None, None, None]


def waterfilling_capacity(H: np.ndarray, power: float) -> float:
    """Single-user MIMO capacity max logdet(I + H^H Q H), Tr Q <= power, in nats.

    Classical water-filling over the eigenmodes of H H^H: allocate
    p_i = max(level - 1/g_i, 0) with the level chosen to spend the budget.
    """
    H = np.asarray(H, dtype=complex)
    gains = np.linalg.eigvalsh(H @ np.conj(H.T))
    gains = np.sort(gains[gains > 1e-14])[::-1]
    if gains.size == 0:
        return 0.0
    # Try the top-m modes; the water level is feasible once every kept
    # allocation is non-negative.
    for m in range(gains.size, 0, -1):
        level = (power + np.sum(1.0 / gains[:m])) / m
        p = level - 1.0 / gains[:m]
        if p[-1] >= 0:
            return float(np.sum(np.log1p(p * gains[:m])))
    return 0.0


@dataclass(frozen=True)
class Theorem1Report:
    samples: int
    max_discrepancy: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_discrepancy <= self.tolerance


def verify_theorem1(
    K: int,
    n_t: int,
    n_r: int,
    seed: int,
    samples: int,
    power: float = 10.0,
    tolerance: float = 1e-9,
) -> Theorem1Report:
    """Compare the ascending-order objective against decoding-order enumeration."""
    channels = generate_rayleigh_channels(K, n_t, n_r, seed)
    rng = np.random.default_rng(seed + 1)
    weights = rng.uniform(0.1, 2.0, size=K)
    instance = build_instance(channels, weights, power)
    worst = 0.0
    for _ in range(samples):
        Q = random_feasible_covariances(K, n_r, power, rng)
        direct = evaluate_objective(instance, Q)
        best, _ = ordering_oracle(instance, Q)
        worst = max(worst, abs(direct - best))
    return Theorem1Report(samples=samples, max_discrepancy=worst, tolerance=tolerance)


@dataclass(frozen=True)
class ProjectionReport:
    samples: int
    competitor_margin: float   # min over samples of (best competitor - projection) distance gap
    grid_value_gap: float      # max |psi(mu*) - grid maximum|
    idempotence_gap: float     # max Frobenius gap between projecting once and twice
    kkt_residual: float        # max |mu* * (trace - P)|
    all_feasible: bool
    sweep_bound_ok: bool

    def ok(
        self,
        value_tol: float = 1e-9,
        idem_tol: float = 1e-10,
        kkt_tol: float = 1e-8,
    ) -> bool:
        return (
            self.competitor_margin >= 0.0
            and self.grid_value_gap <= value_tol
            and self.idempotence_gap <= idem_tol
            and self.kkt_residual <= kkt_tol
            and self.all_feasible
            and self.sweep_bound_ok
        )


def verify_projection(
    K: int,
    n_r: int,
    seed: int,
    samples: int,
    power: float = 10.0,
    competitors: int = 1000,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> ProjectionReport:
    """Stress the projection with random mixed-sign Hermitian inputs."""
    rng = np.random.default_rng(seed)
    margin = np.inf
    value_gap = 0.0
    idem_gap = 0.0
    kkt = 0.0
    feasible = True
    sweep_ok = True
    for _ in range(samples):
        G = rng.standard_normal((K, n_r, n_r)) + 1j * rng.standard_normal((K, n_r, n_r))
        D = 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))
        D *= rng.uniform(0.5, 3.0)
        outcome = project_sum_power(D, power)

        feasible &= feasibility_check(outcome.projected, power).feasible
        sweep_ok &= outcome.active_index <= K * n_r

        dist = np.linalg.norm((outcome.projected - D).ravel())
        Z = sample_feasible_competitors(K, n_r, power, competitors, rng)
        competitor_dists = np.linalg.norm(
            (Z - D[None]).reshape(competitors, -1), axis=1
        )
        margin = min(margin, float(competitor_dists.min() - dist))

        lam = np.sort(np.linalg.eigvalsh(D).ravel())[::-1]
        _, psi_grid = grid_psi_max(lam, power, grid_points)
        psi_star = dual_psi(outcome.water_level, lam, power, float(np.dot(lam, lam)))
        value_gap = max(value_gap, abs(psi_star - psi_grid))

        twice = project_sum_power(outcome.projected, power)
        idem_gap = max(
            idem_gap, float(np.linalg.norm((twice.projected - outcome.projected).ravel()))
        )
        kkt = max(kkt, abs(outcome.water_level * (outcome.trace_after - power)))
    return ProjectionReport(
        samples=samples,
        competitor_margin=float(margin),
        grid_value_gap=value_gap,
        idempotence_gap=idem_gap,
        kkt_residual=kkt,
        all_feasible=bool(feasible),
        sweep_bound_ok=bool(sweep_ok),
    )
