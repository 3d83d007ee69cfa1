"""Sparse superposition codes for the AWGN channel with AMP decoding."""

from .analysis import (ErrorPrediction, MCEstimate, SETrajectory, mc_hard_section_errors,
                       predict_esec_closed, predict_se_esec, se_trajectory, se_x_asymptotic,
                       se_x_montecarlo)
from .codec import (DecoderConfig, DecoderDivergence, DecoderState, amp_decode, denoise, encode,
                    estimate_remaining_errors, hard_decision)
from .core import (CodeParams, ErrorMetrics, bits_to_message, capacity, ebn0_to_snr,
                   measure_errors, message_to_bits, snr_to_ebn0)
from .design import DesignOperator, GaussianOperator, HadamardOperator, new_operator
from .powalloc import (PowerAllocation, exponential, flat, iterative, make_allocation,
                       modified_exponential)
from .sim import TrialConfig, TrialRecord, awgn, run_trials

__version__ = "0.1.0"
