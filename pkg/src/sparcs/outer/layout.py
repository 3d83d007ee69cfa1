"""Partition of SPARC sections between unprotected user bits and an outer LDPC code.

Bit order along the message: unprotected user bits, then the systematic LDPC
codeword (``k_ldpc`` protected user bits followed by the parity bits). Section
counts are exact rationals because ``n_ldpc`` and ``k_ldpc`` need not be
multiples of log2(M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..core import CodeParams, log2_int


@dataclass(frozen=True)
class OuterCodeLayout:
    n_ldpc: int
    k_ldpc: int
    L: int
    M: int

    def __post_init__(self):
        if not self.n_ldpc > self.k_ldpc >= 1:
            raise ValueError("need n_ldpc > k_ldpc >= 1")
        if self.L_ldpc > self.L:
            raise ValueError(
                f"outer code needs {float(self.L_ldpc):.2f} sections but the SPARC has {self.L}")

    @property
    def logM(self) -> int:
        return log2_int(self.M)

    @property
    def L_parity(self) -> Fraction:
        return Fraction(self.n_ldpc - self.k_ldpc, self.logM)

    @property
    def L_protected(self) -> Fraction:
        return Fraction(self.k_ldpc, self.logM)

    @property
    def L_ldpc(self) -> Fraction:
        return self.L_protected + self.L_parity

    @property
    def L_user(self) -> Fraction:
        return self.L - self.L_parity

    @property
    def L_unprotected(self) -> Fraction:
        return self.L_user - self.L_protected

    @property
    def has_boundary_section(self) -> bool:
        """True when one section mixes unprotected and LDPC bits."""
        return self.L_unprotected.denominator != 1

    @property
    def n_first_stage_sections(self) -> int:
        """Sections re-decoded after the outer code: unprotected plus any boundary section."""
        return math.ceil(self.L_unprotected)

    @property
    def first_ldpc_section(self) -> int:
        """0-based index of the first section made only of LDPC bits."""
        return self.n_first_stage_sections

    @property
    def n_bits(self) -> int:
        return self.L * self.logM

    @property
    def n_user_bits(self) -> int:
        return self.n_bits - (self.n_ldpc - self.k_ldpc)

    @property
    def ldpc_bit_offset(self) -> int:
        """Position of the first LDPC codeword bit in the message bit string."""
        return self.n_bits - self.n_ldpc

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.L_parity, self.L_user, self.L_protected, self.L_ldpc, self.L_unprotected)

    def code_params(self, R_user: float, P: float, sigma2: float) -> CodeParams:
        """SPARC parameters for a user rate ``R_user``; ``n = round(user_bits / R_user)``."""
        if R_user <= 0:
            raise ValueError("R_user must be positive")
        n = max(1, round(self.n_user_bits / R_user))
        return CodeParams(L=self.L, M=self.M, n=n, R=self.n_bits / n, P=P, sigma2=sigma2)

    def user_rate(self, n: int) -> float:
        return self.n_user_bits / n


def plan_layout(L: int, M: int, n_ldpc: int, k_ldpc: int) -> OuterCodeLayout:
    return OuterCodeLayout(n_ldpc=n_ldpc, k_ldpc=k_ldpc, L=L, M=M)
