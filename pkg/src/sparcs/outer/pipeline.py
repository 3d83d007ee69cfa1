"""SPARC decoding with a partial LDPC outer code.

Stage 1 runs AMP on every section. Stage 2 turns the AMP section weights of
the LDPC sections into bit LLRs and runs min-sum. If min-sum finds a valid
codeword, stage 3 subtracts the LDPC sections' contribution from ``y`` and
re-runs AMP over the unprotected sections only; otherwise the stage-1 hard
decision is returned unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..codec import DecoderConfig, DecoderState, amp_decode, hard_decision
from ..core import (CodeParams, bits_to_indices, indices_to_bits, log2_int,
                    message_from_indices, message_to_bits, section_amplitudes)
from ..powalloc import PowerAllocation
from .layout import OuterCodeLayout
from .ldpc import LdpcCode, llrs_from_probabilities, minsum_decode


def section_to_bit_posteriors(beta_sections) -> np.ndarray:
    """P(bit b of the column index is 1) from non-negative section weights.

    Accepts one section of length M or an (S, M) array. Bit 0 is the most
    significant bit. Bit b sums the weights in every other run of
    ``M / 2^(b+1)`` consecutive columns, starting from the second run, which is
    the index-stride loop written as a reshape. All-zero sections give 1/2.
    """
    w = np.asarray(beta_sections, dtype=float)
    single = w.ndim == 1
    w = np.atleast_2d(w)
    S, M = w.shape
    logM = log2_int(M)
    if np.any(w < 0):
        raise ValueError("section weights must be non-negative")
    c = w.sum(axis=1)
    out = np.full((S, logM), 0.5)
    ok = c > 0
    wn = w[ok] / c[ok][:, None]
    for b in range(logM):
        out[ok, b] = wn.reshape(-1, 1 << b, 2, M >> (b + 1))[:, :, 1, :].sum(axis=(1, 2))
    return out[0] if single else out


def bit_llrs(beta, layout: OuterCodeLayout) -> np.ndarray:
    """LLRs of the LDPC codeword bits from the stage-1 AMP estimate."""
    L, M, logM = layout.L, layout.M, layout.logM
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (L * M,):
        raise ValueError("estimate does not match the layout")
    first = layout.ldpc_bit_offset // logM  # includes any boundary section
    p1 = section_to_bit_posteriors(beta.reshape(L, M)[first:]).ravel()
    p1 = p1[layout.ldpc_bit_offset - first * logM:]
    return llrs_from_probabilities(p1)


def build_beta_ldpc(codeword_bits, layout: OuterCodeLayout, pa: PowerAllocation,
                    params: CodeParams) -> np.ndarray:
    """Message vector holding only the sections fully covered by the LDPC codeword."""
    bits = np.asarray(codeword_bits)
    if bits.shape != (layout.n_ldpc,):
        raise ValueError(f"expected {layout.n_ldpc} codeword bits, got shape {bits.shape}")
    if (layout.L, layout.M) != (params.L, params.M) or pa.L != params.L:
        raise ValueError("layout does not match the code parameters")
    L, M, logM = layout.L, layout.M, layout.logM
    first = layout.first_ldpc_section
    tail = bits[layout.n_ldpc - (L - first) * logM:]
    beta = np.zeros(L * M)
    amps = section_amplitudes(pa.P_ell[first:], params.n)
    beta[first * M:] = message_from_indices(bits_to_indices(tail, M), amps, M)
    return beta


@dataclass
class PipelineDiagnostics:
    stage1: DecoderState
    ldpc_valid: bool
    ldpc_bits: np.ndarray
    stage3: DecoderState | None = None
    # filled when the transmitted message is supplied
    section_errors: dict = field(default_factory=dict)

    @property
    def tau2_traces(self) -> dict:
        out = {"stage1": self.stage1.tau2_trace}
        if self.stage3 is not None:
            out["stage3"] = self.stage3.tau2_trace
        return out

    @property
    def iterations_run(self) -> int:
        return self.stage1.iterations_run + (self.stage3.iterations_run if self.stage3 else 0)


def _count_section_errors(beta_hat, beta_true, M, sections=slice(None)):
    a = beta_hat.reshape(-1, M)[sections].argmax(axis=1)
    b = beta_true.reshape(-1, M)[sections].argmax(axis=1)
    return int(np.count_nonzero(a != b))


def three_stage_decode(y, op, pa: PowerAllocation, params: CodeParams, layout: OuterCodeLayout,
                       code: LdpcCode, cfg: DecoderConfig | None = None, *,
                       stage1: DecoderState | None = None, minsum_iters: int = 50,
                       minsum_scale: float = 0.75, beta_true=None):
    """Decode ``y`` with AMP, the outer code and a second AMP pass.

    Returns ``(bits, diagnostics)`` where ``bits`` is the full ``L log2 M``-bit
    message estimate. A precomputed ``stage1`` state skips the first AMP run.
    """
    if code.n != layout.n_ldpc or code.k != layout.k_ldpc:
        raise ValueError("outer code does not match the layout")
    if (layout.L, layout.M) != (params.L, params.M):
        raise ValueError("layout does not match the code parameters")
    cfg = cfg or DecoderConfig()
    M, logM = params.M, params.logM
    if stage1 is None:
        stage1 = amp_decode(y, op, pa, params, cfg)
    beta1 = hard_decision(stage1, pa, params.n)

    cw, valid = minsum_decode(code, bit_llrs(stage1.beta, layout), minsum_iters, minsum_scale)
    diag = PipelineDiagnostics(stage1=stage1, ldpc_valid=bool(valid), ldpc_bits=cw)

    if not valid:
        beta_final = beta1
        bits = message_to_bits(beta1, M)
    else:
        beta_ldpc = build_beta_ldpc(cw, layout, pa, params)
        y_res = np.asarray(y, dtype=float) - op.forward(beta_ldpc)
        n_act = layout.n_first_stage_sections
        stage3 = amp_decode(y_res, op, pa, params, cfg, n_active=n_act)
        diag.stage3 = stage3
        beta3 = hard_decision(stage3, pa, params.n)
        bits = message_to_bits(beta3, M)
        bits[layout.ldpc_bit_offset:] = cw
        idx = bits_to_indices(bits, M)
        beta_final = message_from_indices(idx, section_amplitudes(pa.P_ell, params.n), M)

    if beta_true is not None:
        beta_true = np.asarray(beta_true)
        ldpc_secs = slice(layout.ldpc_bit_offset // logM, None)
        diag.section_errors = {
            "stage1": _count_section_errors(beta1, beta_true, M),
            "stage1_ldpc_sections": _count_section_errors(beta1, beta_true, M, ldpc_secs),
            "final": _count_section_errors(beta_final, beta_true, M),
        }
        if valid:
            true_cw = indices_to_bits(beta_true.reshape(-1, M).argmax(axis=1), M)[
                layout.ldpc_bit_offset:]
            diag.section_errors["ldpc_bit_errors"] = int(np.count_nonzero(true_cw != cw))
    return bits, diag
