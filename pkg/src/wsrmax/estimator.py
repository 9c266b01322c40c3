"""Scikit-learn style front end for the weighted sum-rate solver."""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .channel import build_instance, evaluate_objective, mac_user_rates
from .optimizer import OptimizerConfig, cgp_solve, gp_solve
from .validation import check_channel_array, check_user_weights

__all__ = ["WeightedSumRateMaximizer"]


class WeightedSumRateMaximizer(BaseEstimator):
    """Maximize the weighted sum rate of a MIMO broadcast channel.

    Solves the equivalent dual multiple-access problem over per-user uplink
    covariance matrices with a shared trace budget, using projected
    (conjugate) gradient ascent with Armijo backtracking.

    Parameters
    ----------
    power : float, default=10.0
        Total transmit power budget (sum of covariance traces).
    algorithm : {"cgp", "gp"}, default="cgp"
        Conjugate gradient projection or the plain gradient projection
        baseline.
    beta : float, default=0.5
        Armijo backtracking contraction factor, in (0, 1).
    sigma : float, default=0.1
        Armijo sufficient-increase fraction, in (0, 1).
    tol : float, default=1e-6
        Termination threshold on the largest elementwise covariance change.
    max_iter : int, default=1000
        Iteration budget.
    max_armijo_trials : int, default=40
        Backtracking budget per iteration.
    reset_period : int or None, default=None
        Conjugacy restart period; None means K * n_r^2.

    Attributes
    ----------
    covariances_ : ndarray of shape (K, n_r, n_r)
        Optimal uplink covariance blocks.
    objective_ : float
        Final weighted sum rate in nats.
    user_rates_ : ndarray of shape (K,)
        Per-user rates in nats at the solution, original user order.
    n_iter_ : int
        Iterations performed.
    status_ : str
        "converged", "max_iters" or "line_search_stalled".
    trace_ : list of IterationRecord
        Per-iteration diagnostics.

    Examples
    --------
    >>> from wsrmax import generate_rayleigh_channels
    >>> H = generate_rayleigh_channels(4, 4, 2, seed=7).channels
    >>> est = WeightedSumRateMaximizer(power=10.0).fit(H)
    >>> est.objective_ > 0
    True
    """

    def __init__(
        self,
        power: float = 10.0,
        algorithm: str = "cgp",
        beta: float = 0.5,
        sigma: float = 0.1,
        tol: float = 1e-6,
        max_iter: int = 1000,
        max_armijo_trials: int = 40,
        reset_period: int | None = None,
    ):
        self.power = power
        self.algorithm = algorithm
        self.beta = beta
        self.sigma = sigma
        self.tol = tol
        self.max_iter = max_iter
        self.max_armijo_trials = max_armijo_trials
        self.reset_period = reset_period

    def _config(self) -> OptimizerConfig:
        return OptimizerConfig(
            beta=self.beta,
            sigma=self.sigma,
            epsilon=self.tol,
            max_iters=self.max_iter,
            max_armijo_trials=self.max_armijo_trials,
            deflection=self.algorithm == "cgp",
            reset_period=self.reset_period,
        )

    def fit(self, X, y=None, user_weights=None, Q0=None):
        """Solve for the optimal covariances of the channel set ``X``.

        Parameters
        ----------
        X : array-like of shape (K, n_r, n_t)
            Complex channel matrices, one per user.
        y : ignored
        user_weights : array-like of shape (K,), optional
            Non-negative rate weights; equal weights when omitted.
        Q0 : array-like of shape (K, n_r, n_r), optional
            Feasible starting covariances.
        """
        if self.algorithm not in ("cgp", "gp"):
            raise ValueError(f"algorithm must be 'cgp' or 'gp', got {self.algorithm!r}")
        H = check_channel_array(X)
        w = check_user_weights(user_weights, H.shape[0])
        instance = build_instance(H, w, self.power)
        solver = cgp_solve if self.algorithm == "cgp" else gp_solve
        result = solver(instance, self._config(), Q0=Q0)
        self.instance_ = instance
        self.covariances_ = result.covariances
        self.objective_ = result.final_objective
        self.user_rates_ = mac_user_rates(instance, result.covariances)
        self.n_iter_ = result.n_iterations
        self.status_ = result.status
        self.trace_ = result.trace
        return self

    def score(self, X=None, y=None) -> float:
        """Weighted sum rate (nats) of the fitted covariances.

        With ``X`` given, the fitted covariances are re-evaluated on those
        channels under the training weights.
        """
        if not hasattr(self, "covariances_"):
            raise AttributeError("estimator is not fitted")
        if X is None:
            return self.objective_
        H = check_channel_array(X)
        instance = build_instance(H, self.instance_.weights.weights, self.power)
        return evaluate_objective(instance, self.covariances_)
