"""State evolution and section/codeword error-rate predictions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp

from .core import CodeParams
from .powalloc import LN2, PowerAllocation

# relative slack when comparing section power against the decoding threshold;
# the iterative allocation places block powers exactly on it
THRESHOLD_RTOL = 1e-9


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class SETrajectory:
    tau2_seq: np.ndarray
    x_seq: np.ndarray
    converged: bool

    @property
    def T(self) -> int:
        return len(self.tau2_seq) - 1

    @property
    def tau2_final(self) -> float:
        return float(self.tau2_seq[-1])

    def to_csv(self) -> str:
        rows = ["t,tau2,x"]
        rows += [f"{t},{tau2!r},{x!r}" for t, (tau2, x)
                 in enumerate(zip(self.tau2_seq.tolist(), self.x_seq.tolist()))]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class ErrorPrediction:
    esec: float
    ecw: float
    per_section: np.ndarray
    quad_error: float = 0.0

    def to_dict(self) -> dict:
        return {"esec": self.esec, "ecw": self.ecw,
                "per_section": self.per_section.tolist(),
                "quad_error": self.quad_error}


def se_x_asymptotic(tau2: float, pa: PowerAllocation, R: float) -> float:
    """Power-weighted fraction of sections above the large-system threshold."""
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    thr = 2 * R * tau2 * LN2
    passing = pa.L * pa.P_ell >= thr * (1 - THRESHOLD_RTOL)
    return float(pa.P_ell[passing].sum() / pa.P)


def _unique_powers(P_ell):
    vals, inverse, counts = np.unique(P_ell, return_inverse=True, return_counts=True)
    return vals, counts


def _correct_weight(c, U):
    """Softmax weight on entry 0 when entry 0 carries the signal.

    ``c`` is sqrt(n P_l)/tau, ``U`` an (S, M) block of standard normals.
    """
    e = c * U
    e[:, 0] += c * c
    return np.exp(e[:, 0] - logsumexp(e, axis=1))


def _mc_weighted_correct(c_vals, weights, M, samples, seed, chunk):
    """Per-sample ``sum_k weights[k] * correct_weight(c_vals[k], U)``.

    One block of normals is shared by all sections, so per-sample totals are
    i.i.d. and their spread gives the standard error of the mean.
    """
    rng = np.random.default_rng(seed)
    totals = np.empty(samples)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        U = rng.standard_normal((m, M))
        acc = np.zeros(m)
        for c, w in zip(c_vals, weights):
            acc += w * _correct_weight(c, U)
        totals[done: done + m] = acc
        done += m
    return totals


def _chunk_for(M):
    return max(1, min(4096, (1 << 22) // M))


def se_x_montecarlo(tau: float, pa: PowerAllocation, n: int, M: int, samples: int,
                    seed: int = 0) -> MCEstimate:
    """Monte-Carlo estimate of the expected power-weighted correct mass x(tau)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    vals, counts = _unique_powers(pa.P_ell)
    c_vals = np.sqrt(n * vals) / tau
    totals = _mc_weighted_correct(c_vals, counts * vals / pa.P, M, samples, seed, _chunk_for(M))
    return MCEstimate(float(totals.mean()), float(totals.std(ddof=1) / np.sqrt(samples))
                      if samples > 1 else float("nan"), samples)


def se_trajectory(pa: PowerAllocation, params: CodeParams, mode: str = "asymptotic",
                  tol: float | None = None, max_T: int | None = None,
                  samples: int = 1000, seed: int = 0) -> SETrajectory:
    """Iterate tau2_t = sigma2 + P (1 - x(tau_{t-1})) from tau2_0 = sigma2 + P.

    Stops once successive tau2 differ by less than ``tol`` (default
    ``1e-6 * (sigma2 + P)``); converged means tau2_T <= sigma2 + tol.
    """
    sigma2, P = params.sigma2, pa.P
    tol = 1e-6 * (sigma2 + P) if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    max_T = params.L + 1 if max_T is None else max_T

    def x_of(tau2):
        if mode == "asymptotic":
            return se_x_asymptotic(tau2, pa, params.R)
        if mode == "montecarlo":
            return se_x_montecarlo(np.sqrt(tau2), pa, params.n, params.M, samples, seed).value
        raise ValueError(f"unknown mode {mode!r}")

    tau2_seq = [sigma2 + P]
    x_seq = [x_of(tau2_seq[0])]
    for _ in range(max_T):
        tau2 = sigma2 + P * (1 - x_seq[-1])
        tau2_seq.append(tau2)
        x_seq.append(x_of(tau2) if tau2 > 0 else 1.0)
        if abs(tau2_seq[-1] - tau2_seq[-2]) < tol or tau2 <= 0:
            break
    tau2_arr = np.array(tau2_seq)
    return SETrajectory(tau2_arr, np.array(x_seq), bool(tau2_arr[-1] <= sigma2 + tol))


def predict_se_esec(tau_T: float, pa: PowerAllocation, n: int, M: int, samples: int,
                    seed: int = 0) -> MCEstimate:
    """Monte-Carlo section error prediction: one minus the mean softmax mass on the
    transmitted entry at noise level ``tau_T``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if M == 1:
        return MCEstimate(0.0, 0.0, samples)
    vals, counts = _unique_powers(pa.P_ell)
    c_vals = np.sqrt(n * vals) / tau_T
    totals = 1.0 - _mc_weighted_correct(c_vals, counts / pa.L, M, samples, seed, _chunk_for(M))
    stderr = float(totals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("nan")
    return MCEstimate(float(totals.mean()), stderr, samples)


def mc_hard_section_errors(tau: float, pa: PowerAllocation, n: int, M: int, samples: int,
                           seed: int = 0) -> MCEstimate:
    """Monte-Carlo probability that the largest entry of ``beta + tau*Z`` in a
    uniformly chosen section is not the transmitted one."""
    if M == 1:
        return MCEstimate(0.0, 0.0, samples)
    vals, counts = _unique_powers(pa.P_ell)
    c_vals = np.sqrt(n * vals) / tau
    rng = np.random.default_rng(seed)
    chunk = _chunk_for(M)
    totals = np.empty(samples)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        U = rng.standard_normal((m, M))
        rivals = U[:, 1:].max(axis=1)
        acc = np.zeros(m)
        for c, cnt in zip(c_vals, counts):
            acc += cnt * (U[:, 0] + c <= rivals)
        totals[done: done + m] = acc / pa.L
        done += m
    return MCEstimate(float(totals.mean()), float(totals.std(ddof=1) / np.sqrt(samples)), samples)


_GL_ORDER = 8
_U_LIMIT = 12.0


def normal_expectation_rule(quad_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for E[g(U)], U ~ N(0,1).

    Composite 8-point Gauss-Legendre on [-12, 12] with the normal density
    folded into the weights. Panels are narrow enough to resolve the steep
    step of Phi(c+u)^(M-1) at large M, which plain Gauss-Hermite does not.
    """
    panels = max(1, quad_points // _GL_ORDER)
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(-_U_LIMIT, _U_LIMIT, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel() * np.exp(-nodes ** 2 / 2) / np.sqrt(2 * np.pi)
    return nodes, weights


def _section_error_probs(c, M, quad_points):
    nodes, weights = normal_expectation_rule(quad_points)
    # 1 - Phi(c+u)^(M-1), kept accurate when it is tiny
    log_phi = log_ndtr(c[:, None] + nodes[None, :])
    return -(np.expm1((M - 1) * log_phi) @ weights)


def predict_esec_closed(pa: PowerAllocation, sigma: float, n: int, M: int,
                        quad_points: int = 256) -> ErrorPrediction:
    """Closed-form section and codeword error predictions at ``tau_T = sigma``.

    Section l fails with probability ``1 - E_U[Phi(sqrt(n P_l)/sigma + U)^(M-1)]``
    for a standard normal U. ``quad_error`` is the largest change in any
    section probability when the number of nodes is doubled.
    """
    if quad_points < 1:
        raise ValueError("quad_points must be >= 1")
    if M == 1:
        zeros = np.zeros(pa.L)
        return ErrorPrediction(0.0, 0.0, zeros)
    c = np.sqrt(n * pa.P_ell) / sigma
    p_err = np.clip(_section_error_probs(c, M, quad_points), 0.0, 1.0)
    p_fine = np.clip(_section_error_probs(c, M, 2 * quad_points), 0.0, 1.0)
    quad_error = float(np.max(np.abs(p_fine - p_err)))
    if quad_error > 1e-8:
        warnings.warn(f"quadrature did not converge (change {quad_error:.2e} on doubling nodes)",
                      RuntimeWarning, stacklevel=2)
    esec = float(p_err.mean())
    with np.errstate(divide="ignore"):
        ecw = float(-np.expm1(np.sum(np.log1p(-p_err))))
    return ErrorPrediction(esec, ecw, p_err, quad_error)
