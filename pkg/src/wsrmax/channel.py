"""Problem instances and rate evaluation for the dual MIMO-MAC.

A problem instance bundles the per-user channel matrices, non-negative user
weights and a total transmit power budget. The objective evaluated here is
the weighted sum rate rewritten over the ascending-weight user ordering,

    F(Q) = sum_i d_i * logdet(I + sum_{j>=i} H_{p(j)}^H Q_{p(j)} H_{p(j)}),

where p sorts the weights ascending and d_i are the consecutive weight
differences. All rates are in nats.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import logdet_hpd_stack

__all__ = [
    "ChannelSet",
    "WeightProfile",
    "ProblemInstance",
    "FeasibilityReport",
    "ascending_permutation",
    "build_instance",
    "evaluate_objective",
    "mac_user_rates",
    "dpc_user_rates",
    "feasibility_check",
    "generate_rayleigh_channels",
    "random_feasible_covariances",
    "ordering_oracle",
    "load_instance",
    "save_instance",
]

# PSD / trace slack allowed when declaring a covariance set feasible.
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class ChannelSet:
    """K per-user channel matrices stacked as a complex (K, n_r, n_t) array."""

    channels: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.channels, dtype=complex)
        if H.ndim != 3:
            raise ValueError(f"channels must be (K, n_r, n_t), got shape {H.shape}")
        if min(H.shape) < 1:
            raise ValueError(f"channel dimensions must be positive, got {H.shape}")
        if not np.all(np.isfinite(H.view(float))):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "channels", H)

    @property
    def K(self) -> int:
        return self.channels.shape[0]

    @property
    def n_r(self) -> int:
        return self.channels.shape[1]

    @property
    def n_t(self) -> int:
        return self.channels.shape[2]


@dataclass(frozen=True)
class WeightProfile:
    """User weights with their ascending permutation and consecutive diffs.

    ``permutation[i]`` is the (0-based) user occupying position i of the
    ascending order; ``diffs[i]`` is the weight gap to the previous position,
    with the position before the first defined as weight zero.
    """

    weights: np.ndarray
    permutation: np.ndarray
    diffs: np.ndarray


def ascending_permutation(weights) -> WeightProfile:
    """Sort user weights ascending (stable on ties) and take consecutive diffs."""
    u = np.asarray(weights, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("weights must be a non-empty vector")
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise ValueError("weights must be finite and non-negative")
    perm = np.argsort(u, kind="stable")
    sorted_u = u[perm]
    diffs = np.empty_like(sorted_u)
    diffs[0] = sorted_u[0]
    diffs[1:] = np.diff(sorted_u)
    return WeightProfile(weights=u.copy(), permutation=perm, diffs=diffs)


@dataclass(frozen=True)
class ProblemInstance:
    channels: ChannelSet
    weights: WeightProfile
    power: float
    label: str = ""

    def __post_init__(self):
        if self.weights.weights.size != self.channels.K:
            raise ValueError(
                f"{self.weights.weights.size} weights for {self.channels.K} users"
            )
        if not self.power > 0:
            raise ValueError(f"power budget must be positive, got {self.power}")

    @property
    def K(self) -> int:
        return self.channels.K


def build_instance(channels, weights, power: float, label: str = "") -> ProblemInstance:
    """Assemble a ProblemInstance from raw arrays."""
    cs = channels if isinstance(channels, ChannelSet) else ChannelSet(np.asarray(channels))
    wp = weights if isinstance(weights, WeightProfile) else ascending_permutation(weights)
    return ProblemInstance(channels=cs, weights=wp, power=float(power), label=label)


def _check_covariances(instance: ProblemInstance, Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=complex)
    K, n_r = instance.channels.K, instance.channels.n_r
    if Q.shape != (K, n_r, n_r):
        raise ValueError(f"covariances must have shape {(K, n_r, n_r)}, got {Q.shape}")
    return Q


def _interference_suffix_sums(H: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Running sums A_i = I + sum_{j>=i} H_j^H Q_j H_j, accumulated from the tail.

    One H^H Q H term is added per position, K accumulations total.
    """
    terms = np.conj(np.swapaxes(H, -1, -2)) @ Q @ H  # (K, n_t, n_t)
    suffix = np.cumsum(terms[::-1], axis=0)[::-1]
    return suffix + np.eye(H.shape[-1])


def evaluate_objective(instance: ProblemInstance, Q: np.ndarray) -> float:
    """Weighted sum rate F(Q) in nats, via the ascending-order running sum."""
    Q = _check_covariances(instance, Q)
    H = instance.channels.channels
    perm = instance.weights.permutation
    d = instance.weights.diffs
    A = _interference_suffix_sums(H[perm], Q[perm])
    active = d != 0.0
    if not np.any(active):
        return 0.0
    return float(np.dot(d[active], logdet_hpd_stack(A[active])))


def mac_user_rates(instance: ProblemInstance, Q: np.ndarray) -> np.ndarray:
    """Per-user successive-decoding rates under the ascending-weight order.

    Position i of the ascending order gets
    logdet(I + sum_{j>=i}) - logdet(I + sum_{j>=i+1}); results are returned
    indexed by original user.
    """
    Q = _check_covariances(instance, Q)
    H = instance.channels.channels
    perm = instance.weights.permutation
    A = _interference_suffix_sums(H[perm], Q[perm])
    logdets = np.concatenate([logdet_hpd_stack(A), [0.0]])
    rates = np.empty(instance.K)
    rates[perm] = logdets[:-1] - logdets[1:]
    return rates


def dpc_user_rates(channels: ChannelSet, downlink: np.ndarray) -> np.ndarray:
    """Dirty-paper-coding rates for downlink covariances, encoding order as given.

    ``downlink`` stacks K Hermitian n_t x n_t covariance matrices; user i sees
    interference from users encoded after it.
    """
    H = channels.channels
    G = np.asarray(downlink, dtype=complex)
    if G.shape != (channels.K, channels.n_t, channels.n_t):
        raise ValueError(
            f"downlink covariances must be {(channels.K, channels.n_t, channels.n_t)},"
            f" got {G.shape}"
        )
    suffix = np.cumsum(G[::-1], axis=0)[::-1]  # T_i = sum_{j>=i} G_j
    suffix_next = np.concatenate([suffix[1:], np.zeros_like(suffix[:1])])
    eye = np.eye(channels.n_r)
    Hh = np.conj(np.swapaxes(H, -1, -2))
    signal = eye + H @ suffix @ Hh
    interference = eye + H @ suffix_next @ Hh
    return logdet_hpd_stack(signal) - logdet_hpd_stack(interference)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    trace_slack: float
    min_eigenvalue: float


def feasibility_check(Q: np.ndarray, P: float) -> FeasibilityReport:
    """Report whether the blocks are PSD with total trace within the budget."""
    Q = np.asarray(Q, dtype=complex)
    min_eig = float(np.min(np.linalg.eigvalsh(Q)))
    total = float(np.real(np.trace(Q, axis1=-2, axis2=-1)).sum())
    feasible = min_eig >= -FEASIBILITY_TOL and total <= P + FEASIBILITY_TOL
    return FeasibilityReport(
        feasible=feasible, trace_slack=P - total, min_eigenvalue=min_eig
    )


def generate_rayleigh_channels(K: int, n_t: int, n_r: int, seed: int) -> ChannelSet:
    """Unit-variance circularly-symmetric complex Gaussian channels (PCG64 seeded)."""
    if min(K, n_t, n_r) < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)
    shape = (K, n_r, n_t)
    H = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelSet(H)


def random_feasible_covariances(
    K: int, n_r: int, power: float, rng: np.random.Generator, fill: float | None = None
) -> np.ndarray:
    """Random PSD blocks scaled so the total trace is ``fill * power``.

    ``fill`` defaults to a uniform draw in (0, 1]; pass 1.0 to land on the
    trace boundary.
    """
    G = rng.standard_normal((K, n_r, n_r)) + 1j * rng.standard_normal((K, n_r, n_r))
    Q = G @ np.conj(np.swapaxes(G, -1, -2))
    total = float(np.real(np.trace(Q, axis1=-2, axis2=-1)).sum())
    if fill is None:
        fill = float(rng.uniform(0.05, 1.0))
    return Q * (fill * power / total)


def ordering_oracle(instance: ProblemInstance, Q: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Maximum weighted sum rate over all successive decoding orders.

    Enumerates every ordering's polymatroid vertex rates and returns the best
    weighted sum with its ordering (0-based users, decoded-last first as in the
    ascending construction). Guarded to K <= 8.
    """
    if instance.K > 8:
        raise ValueError(f"ordering enumeration is limited to K <= 8, got {instance.K}")
    Q = _check_covariances(instance, Q)
    H = instance.channels.channels
    u = instance.weights.weights
    terms = np.conj(np.swapaxes(H, -1, -2)) @ Q @ H  # per-user H^H Q H
    eye = np.eye(instance.channels.n_t)
    best_obj = -np.inf
    best_order: tuple[int, ...] = tuple(range(instance.K))
    for order in itertools.permutations(range(instance.K)):
        idx = np.asarray(order)
        A = np.cumsum(terms[idx][::-1], axis=0)[::-1] + eye
        logdets = np.concatenate([logdet_hpd_stack(A), [0.0]])
        obj = float(np.dot(u[idx], logdets[:-1] - logdets[1:]))
        if obj > best_obj:
            best_obj = obj
            best_order = order
    return best_obj, best_order


# ---------------------------------------------------------------------------
# Instance files: UTF-8 JSON, channels stored as [re, im] pairs.

def save_instance(instance: ProblemInstance, path) -> None:
    H = instance.channels.channels
    doc = {
        "K": instance.channels.K,
        "nt": instance.channels.n_t,
        "nr": instance.channels.n_r,
        "power": instance.power,
        "weights": instance.weights.weights.tolist(),
        "channels": np.stack([H.real, H.imag], axis=-1).tolist(),
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_instance(path) -> ProblemInstance:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    arr = np.asarray(doc["channels"], dtype=float)
    K, nt, nr = int(doc["K"]), int(doc["nt"]), int(doc["nr"])
    if arr.shape != (K, nr, nt, 2):
        raise ValueError(f"channel payload has shape {arr.shape}, expected {(K, nr, nt, 2)}")
    H = arr[..., 0] + 1j * arr[..., 1]
    return build_instance(H, doc["weights"], float(doc["power"]), label=Path(path).stem)
