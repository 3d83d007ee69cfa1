"""SPARC encoder and AMP decoder with online noise-variance tracking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CodeParams, message_from_indices, section_amplitudes
from .design import DesignOperator
from .powalloc import PowerAllocation

_TINY = np.finfo(float).tiny


class DecoderDivergence(RuntimeError):
    """An AMP iterate became non-finite."""


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 64
    # None selects the smallest section power; 0 disables early termination
    early_stop: float | None = None
    tau_mode: str = "online"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.early_stop is not None and self.early_stop < 0:
            raise ValueError("early_stop must be >= 0")
        if self.tau_mode not in ("online", "offline"):
            raise ValueError(f"unknown tau_mode {self.tau_mode!r}")


@dataclass
class DecoderState:
    beta: np.ndarray
    z: np.ndarray
    tau2_trace: np.ndarray
    iterations_run: int
    termination: str
    n_active: int

    @property
    def tau2_final(self) -> float:
        return float(self.tau2_trace[-1])


def encode(beta, op: DesignOperator) -> np.ndarray:
    return op.forward(beta)


def denoise(s, tau2: float, pa: PowerAllocation | np.ndarray, n: int) -> np.ndarray:
    """Section-wise softmax estimate of beta from ``s = beta + tau*noise``."""
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    P_ell = pa.P_ell if isinstance(pa, PowerAllocation) else np.asarray(pa, dtype=float)
    amps = section_amplitudes(P_ell, n)
    s = np.asarray(s, dtype=float)
    L = amps.size
    if s.size % L:
        raise ValueError("length of s is not a multiple of the section count")
    e = s.reshape(L, -1) * (amps / tau2)[:, None]
    e -= e.max(axis=1, keepdims=True)
    np.exp(e, out=e)
    e *= (amps / e.sum(axis=1))[:, None]
    return e.ravel()


def _schedule(pa, params):
    from .analysis import se_trajectory

    return se_trajectory(pa, params, mode="asymptotic").tau2_seq


def amp_decode(y, op: DesignOperator, pa: PowerAllocation, params: CodeParams,
               cfg: DecoderConfig | None = None, *, n_active: int | None = None,
               callback=None) -> DecoderState:
    """Run AMP on ``y``.

    ``n_active`` restricts decoding to the first sections; the rest are held
    at zero and their power is left out of the Onsager term. ``callback`` is
    called as ``callback(t, s, tau2)`` with each effective observation.
    """
    cfg = cfg or DecoderConfig()
    y = np.asarray(y, dtype=float)
    n, M = params.n, params.M
    if y.shape != (n,) or op.shape != (n, params.L * M) or pa.L != params.L:
        raise ValueError("inconsistent dimensions between y, operator, allocation and params")
    L_act = params.L if n_active is None else int(n_active)
    if not 1 <= L_act <= params.L:
        raise ValueError("n_active out of range")

    P_act = pa.P_ell[:L_act]
    P_total = float(P_act.sum())
    threshold = float(P_act[-1]) if cfg.early_stop is None else cfg.early_stop
    schedule = _schedule(pa, params) if cfg.tau_mode == "offline" else None
    n_coords = L_act * M

    beta = np.zeros(params.L * M)
    z = np.zeros(n)
    trace = []
    tau2_prev = None
    iterations = 0
    termination = "max_iterations"
    for t in range(cfg.max_iterations):
        resid = y - op.forward(beta)
        if t == 0:
            z = resid
        else:
            z = resid + (z / tau2_prev) * (P_total - beta @ beta / n)
        if schedule is None:
            tau2 = float(z @ z) / n
        else:
            tau2 = float(schedule[min(t, len(schedule) - 1)])
        if not (np.isfinite(tau2) and np.all(np.isfinite(z))):
            raise DecoderDivergence(f"non-finite residual at iteration {t} (tau2={tau2})")
        trace.append(tau2)
        if tau2 <= _TINY:
            # residual vanished: beta already reproduces y exactly
            termination = "converged"
            break
        s = beta + op.adjoint(z)
        if callback is not None:
            callback(t, s, tau2)
        beta = np.zeros_like(beta)
        beta[:n_coords] = denoise(s[:n_coords], tau2, P_act, n)
        if not np.all(np.isfinite(beta)):
            raise DecoderDivergence(f"non-finite estimate at iteration {t}")
        iterations += 1
        if t > 0 and threshold > 0 and abs(tau2 - tau2_prev) < threshold:
            termination = "converged"
            break
        tau2_prev = tau2

    return DecoderState(beta=beta, z=z, tau2_trace=np.array(trace),
                        iterations_run=iterations, termination=termination,
                        n_active=L_act)


def hard_decision(state, pa: PowerAllocation, n: int) -> np.ndarray:
    """Largest entry of each section set to sqrt(n P_l); lowest index wins ties."""
    beta = state.beta if isinstance(state, DecoderState) else np.asarray(state)
    L = pa.L
    idx = beta.reshape(L, -1).argmax(axis=1)
    return message_from_indices(idx, section_amplitudes(pa.P_ell, n), beta.size // L)


def estimate_remaining_errors(state: DecoderState, pa: PowerAllocation, sigma2: float,
                              slack: float | None = None) -> int:
    """Estimate how many sections are still wrong from the final tau2.

    The excess ``tau2_T - sigma2`` approximates the power of the wrongly
    decoded sections; since powers are non-increasing the count is the
    largest k whose k smallest section powers fit in that excess. ``slack``
    (default half the smallest power) absorbs estimator noise; it is a
    heuristic.
    """
    if slack is None:
        slack = 0.5 * pa.P_last
    excess = state.tau2_final - sigma2
    if excess <= 0:
        return 0
    smallest = np.cumsum(pa.P_ell[::-1])
    budget = (excess + slack) * (1 + 1e-12)
    return int(np.searchsorted(smallest, budget, side="right"))
