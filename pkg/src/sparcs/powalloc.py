"""Power allocation schemes for SPARC sections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-section powers ``P_ell`` (non-increasing, summing to ``P``)."""

    P_ell: np.ndarray
    scheme: str
    params: dict = field(default_factory=dict)
    flatten_block: int | None = None

    def __post_init__(self):
        arr = np.array(self.P_ell, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "P_ell", arr)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("P_ell must be a non-empty vector")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("section powers must be finite and non-negative")
        if np.any(np.diff(arr) > 1e-12 * arr[0]):
            raise ValueError("power allocation must be non-increasing")

    @property
    def L(self) -> int:
        return self.P_ell.size

    @property
    def P(self) -> float:
        return float(self.P_ell.sum())

    @property
    def P_last(self) -> float:
        return float(self.P_ell[-1])

    def to_csv(self) -> str:
        lines = ["section,power"]
        lines += [f"{i + 1},{p!r}" for i, p in enumerate(self.P_ell.tolist())]
        return "\n".join(lines) + "\n"


def min_required_power(tau2: float, R: float, L: int) -> float:
    """Smallest per-section power that clears the large-system decoding threshold."""
    if tau2 <= 0 or R < 0 or L < 1:
        raise ValueError("need tau2 > 0, R >= 0, L >= 1")
    return 2.0 * LN2 * R * tau2 / L


def flat(L: int, P: float) -> PowerAllocation:
    if L < 1 or P <= 0:
        raise ValueError("need L >= 1 and P > 0")
    return PowerAllocation(np.full(L, P / L), "flat")


def exponential(L: int, P: float, C: float) -> PowerAllocation:
    if L < 1 or P <= 0 or C <= 0:
        raise ValueError("need L >= 1, P > 0, C > 0")
    ell = np.arange(1, L + 1)
    scale = P * np.expm1(2 * C * LN2 / L) / -np.expm1(-2 * C * LN2)
    return PowerAllocation(scale * 2.0 ** (-2 * C * ell / L), "exponential", {"C": C})


def modified_exponential(L: int, P: float, C: float, a: float, f: float) -> PowerAllocation:
    """Exponential decay with steepness ``a``, flattened after the first ``f*L`` sections."""
    if not 0 <= f <= 1 or a < 0:
        raise ValueError("need 0 <= f <= 1 and a >= 0")
    if L < 1 or P <= 0 or C <= 0:
        raise ValueError("need L >= 1, P > 0, C > 0")
    ell = np.arange(1, L + 1)
    shape = np.where(ell <= f * L + 1e-9, 2.0 ** (-2 * a * C * ell / L), 2.0 ** (-2 * a * C * f))
    return PowerAllocation(P * shape / shape.sum(), "modified_exponential",
                           {"C": C, "a": a, "f": f})


def iterative(L: int, B: int, sigma2: float, P: float, R_PA: float) -> PowerAllocation:
    """Block-wise greedy allocation of the minimum decodable power.

    Each block of ``L/B`` sections gets the threshold power for the noise
    level left by the blocks before it, until splitting the remaining power
    equally beats that threshold; then the rest is flat. If the loop ends
    without flattening the result is rescaled to sum to ``P``.
    """
    if B < 1 or L % B:
        raise ValueError(f"B={B} must divide L={L}")
    if R_PA < 0 or P <= 0 or sigma2 < 0:
        raise ValueError("need R_PA >= 0, P > 0, sigma2 >= 0")
    params = {"B": B, "R_PA": R_PA, "sigma2": sigma2}
    if R_PA == 0:
        return PowerAllocation(np.full(L, P / L), "iterative", params)

    k = L // B
    P_ell = np.zeros(L)
    flatten_block = None
    for b in range(B):
        P_remain = P - P_ell[: b * k].sum()
        if P_remain <= 0:
            # budget already exhausted by earlier blocks; leave the tail empty
            break
        tau2 = sigma2 + P_remain
        P_block = 2 * LN2 * R_PA * tau2 / L
        if P_remain / (L - b * k) > P_block:
            P_ell[b * k:] = P_remain / (L - b * k)
            flatten_block = b
            break
        P_ell[b * k: (b + 1) * k] = P_block
    if flatten_block is None:
        P_ell *= P / P_ell.sum()
    return PowerAllocation(P_ell, "iterative", params, flatten_block=flatten_block)


def default_r_pa(R: float) -> float:
    """R_PA = R above rate 1, otherwise 0 (flat allocation)."""
    return R if R > 1 else 0.0


def rpa_grid(R: float, steps: int, step: float = 0.02) -> np.ndarray:
    """R_PA values ``R*(1 + k*step)`` for ``k = -steps..steps`` (negatives dropped)."""
    ks = np.arange(-steps, steps + 1)
    vals = R * (1 + step * ks)
    return vals[vals >= 0]


def make_allocation(scheme: str, L: int, P: float, sigma2: float, R: float, *,
                    B: int | None = None, R_PA: float | None = None,
                    a: float | None = None, f: float | None = None) -> PowerAllocation:
    """Build an allocation by name with the package defaults filled in."""
    C = 0.5 * math.log2(1 + P / sigma2) if sigma2 > 0 else math.inf
    if scheme == "flat":
        return flat(L, P)
    if scheme == "exponential":
        return exponential(L, P, C)
    if scheme in ("modexp", "modified_exponential"):
        a = R / C if a is None else a
        f = R / C if f is None else f
        return modified_exponential(L, P, C, a, min(f, 1.0))
    if scheme == "iterative":
        return iterative(L, L if B is None else B, sigma2, P,
                         default_r_pa(R) if R_PA is None else R_PA)
    raise ValueError(f"unknown power allocation scheme {scheme!r}")
