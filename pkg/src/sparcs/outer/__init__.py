"""Partial outer LDPC code: section layout, bit posteriors, min-sum and three-stage decoding."""

from .layout import OuterCodeLayout, plan_layout
from .ldpc import (LdpcCode, format_alist, ldpc_encode, llrs_from_probabilities, make_ldpc_code,
                   minsum_decode, parse_alist, read_alist, syndrome, write_alist)
from .pipeline import (PipelineDiagnostics, bit_llrs, build_beta_ldpc,
                       section_to_bit_posteriors, three_stage_decode)

__all__ = [
    "OuterCodeLayout", "plan_layout",
    "LdpcCode", "format_alist", "ldpc_encode", "llrs_from_probabilities", "make_ldpc_code",
    "minsum_decode", "parse_alist", "read_alist", "syndrome", "write_alist",
    "PipelineDiagnostics", "bit_llrs", "build_beta_ldpc", "section_to_bit_posteriors",
    "three_stage_decode",
]
