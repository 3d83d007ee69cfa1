"""Code dimensions, bit/index mapping and error metrics.

Bits map to column indices big-endian: the first bit of each log2(M)-bit
chunk is the most significant bit of the 0-based index inside its section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def is_power_of_2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


def log2_int(M: int) -> int:
    if not is_power_of_2(M):
        raise ValueError(f"M must be a power of two, got {M}")
    return M.bit_length() - 1


def derive_code_length(L: int, M: int, R: float) -> tuple[int, float]:
    """Return ``(n, realized_rate)`` with ``n = round(L*log2(M)/R)``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if R <= 0:
        raise ValueError("R must be positive")
    nbits = L * log2_int(M)
    n = max(1, int(round(nbits / R)))
    return n, nbits / n


def ebn0_to_snr(ebn0_db: float, R: float) -> float:
    if R <= 0:
        raise ValueError("R must be positive")
    return 2.0 * R * 10.0 ** (ebn0_db / 10.0)


def snr_to_ebn0(snr: float, R: float) -> float:
    if R <= 0 or snr <= 0:
        raise ValueError("R and snr must be positive")
    return 10.0 * math.log10(snr / (2.0 * R))


def capacity(snr: float) -> float:
    """AWGN capacity in bits per real channel use."""
    return 0.5 * math.log2(1.0 + snr)


@dataclass(frozen=True)
class CodeParams:
    """Dimensional parameters of a SPARC.

    ``R`` is the realized rate ``L*log2(M)/n``; use :meth:`from_rate` to pick
    ``n`` from a nominal rate.
    """

    L: int
    M: int
    n: int
    R: float
    P: float
    sigma2: float

    def __post_init__(self):
        if self.L < 1 or self.n < 1:
            raise ValueError("L and n must be positive")
        log2_int(self.M)
        if self.P <= 0:
            raise ValueError("P must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        nbits = self.L * self.logM
        if abs(self.n * self.R - nbits) > 1e-6 * nbits:
            raise ValueError(
                f"n*R = {self.n * self.R} does not match L*log2(M) = {nbits}")

    @classmethod
    def from_rate(cls, L: int, M: int, R: float, P: float, sigma2: float) -> "CodeParams":
        n, R_real = derive_code_length(L, M, R)
        return cls(L=L, M=M, n=n, R=R_real, P=P, sigma2=sigma2)

    @classmethod
    def from_snr(cls, L: int, M: int, R: float, snr: float, sigma2: float = 1.0) -> "CodeParams":
        return cls.from_rate(L, M, R, P=snr * sigma2, sigma2=sigma2)

    @property
    def logM(self) -> int:
        return log2_int(self.M)

    @property
    def n_bits(self) -> int:
        return self.L * self.logM

    @property
    def snr(self) -> float:
        return self.P / self.sigma2 if self.sigma2 > 0 else math.inf

    @property
    def C(self) -> float:
        return capacity(self.snr)


def bits_to_indices(bits, M: int) -> np.ndarray:
    logM = log2_int(M)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % logM:
        raise ValueError(f"bit count {bits.size} is not a multiple of log2(M)={logM}")
    if logM == 0:
        return np.zeros(0, dtype=np.int64)
    weights = 1 << np.arange(logM - 1, -1, -1, dtype=np.int64)
    return bits.reshape(-1, logM) @ weights


def indices_to_bits(indices, M: int) -> np.ndarray:
    logM = log2_int(M)
    indices = np.asarray(indices, dtype=np.int64).ravel()
    shifts = np.arange(logM - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def message_from_indices(indices, section_values, M: int) -> np.ndarray:
    """Build beta with ``section_values[l]`` at ``indices[l]`` of section l."""
    indices = np.asarray(indices, dtype=np.int64).ravel()
    L = indices.size
    if np.any(indices < 0) or np.any(indices >= M):
        raise ValueError("section index out of range")
    beta = np.zeros((L, M))
    beta[np.arange(L), indices] = section_values
    return beta.ravel()


def section_amplitudes(P_ell, n: int) -> np.ndarray:
    """Non-zero value sqrt(n*P_l) of every section."""
    return np.sqrt(n * np.asarray(P_ell, dtype=float))


def bits_to_message(bits, pa, params: CodeParams) -> np.ndarray:
    """Map ``L*log2(M)`` bits to the length-``M*L`` message vector."""
    bits = np.asarray(bits).ravel()
    if bits.size != params.n_bits:
        raise ValueError(f"expected {params.n_bits} bits, got {bits.size}")
    idx = bits_to_indices(bits, params.M)
    return message_from_indices(idx, section_amplitudes(pa.P_ell, params.n), params.M)


def message_indices(beta, M: int) -> np.ndarray:
    """Position of the largest entry in each section (lowest index on ties)."""
    beta = np.asarray(beta)
    if beta.size % M:
        raise ValueError("message length is not a multiple of M")
    return beta.reshape(-1, M).argmax(axis=1)


def message_to_bits(beta, M: int) -> np.ndarray:
    return indices_to_bits(message_indices(beta, M), M)


@dataclass(frozen=True)
class ErrorMetrics:
    section_errors: int
    bit_errors: int
    L: int
    n_bits: int

    @property
    def esec(self) -> float:
        return self.section_errors / self.L

    @property
    def ber(self) -> float:
        return self.bit_errors / self.n_bits if self.n_bits else 0.0

    @property
    def cw_error(self) -> bool:
        return self.section_errors > 0


def measure_errors(beta_hat, beta_true, bits_hat, bits_true, M: int) -> ErrorMetrics:
    beta_hat = np.asarray(beta_hat)
    beta_true = np.asarray(beta_true)
    bits_hat = np.asarray(bits_hat).ravel()
    bits_true = np.asarray(bits_true).ravel()
    if beta_hat.shape != beta_true.shape or beta_hat.size % M:
        raise ValueError("message vectors have mismatched dimensions")
    if bits_hat.shape != bits_true.shape:
        raise ValueError("bit sequences have mismatched lengths")
    sec = int(np.count_nonzero(message_indices(beta_hat, M) != message_indices(beta_true, M)))
    bit = int(np.count_nonzero(bits_hat != bits_true))
    return ErrorMetrics(section_errors=sec, bit_errors=bit,
                        L=beta_true.size // M, n_bits=bits_true.size)
