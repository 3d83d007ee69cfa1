import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparcs import core, powalloc


@pytest.mark.parametrize("L, M, R, n", [(1024, 512, 1.5, 6144), (2, 2, 1.0, 2), (896, 256, 1.0, 7168)])
def test_derive_code_length(L, M, R, n):
    got, realized = core.derive_code_length(L, M, R)
    assert got == n
    assert realized == pytest.approx(L * math.log2(M) / n)


@pytest.mark.parametrize("R, M", [(0.0, 4), (-1.0, 4), (1.0, 3), (1.0, 0)])
def test_derive_code_length_rejects(R, M):
    with pytest.raises(ValueError):
        core.derive_code_length(4, M, R)


@given(L=st.integers(1, 4096), k=st.integers(1, 16), R=st.floats(0.1, 3.0))
def test_realized_rate_close_to_nominal(L, k, R):
    if L * k < 1000:
        return
    n, realized = core.derive_code_length(L, 2 ** k, R)
    assert abs(realized - R) / R <= 1e-3


def test_ebn0_to_snr_examples():
    assert core.ebn0_to_snr(10 * math.log10(5), 1.5) == pytest.approx(15.0)
    assert core.ebn0_to_snr(0.0, 0.5) == pytest.approx(1.0)
    assert core.ebn0_to_snr(5.7, 1.5) == pytest.approx(2 * 1.5 * 10 ** 0.57)
    assert core.ebn0_to_snr(5.7, 1.5) == pytest.approx(11.146, abs=5e-4)
    assert core.snr_to_ebn0(core.ebn0_to_snr(3.3, 1.2), 1.2) == pytest.approx(3.3)
    with pytest.raises(ValueError):
        core.ebn0_to_snr(1.0, 0.0)


def test_code_params_derived_quantities():
    p = core.CodeParams.from_snr(1024, 512, 1.5, 15.0)
    assert (p.n, p.snr, p.C, p.logM, p.n_bits) == (6144, 15.0, 2.0, 9, 9216)
    with pytest.raises(ValueError):
        core.CodeParams(L=4, M=4, n=8, R=2.0, P=1.0, sigma2=1.0)
    with pytest.raises(ValueError):
        core.CodeParams(L=4, M=6, n=8, R=1.0, P=1.0, sigma2=1.0)
    assert core.CodeParams(L=4, M=4, n=8, R=1.0, P=1.0, sigma2=0.0).snr == math.inf


def _params(L, M):
    return core.CodeParams(L=L, M=M, n=L * max(1, int(math.log2(M))), R=1.0 if M > 1 else 0.0,
                           P=float(L), sigma2=1.0)


@pytest.mark.parametrize("L, M, bits, idx", [
    (1, 4, "00", [0]), (1, 4, "11", [3]), (2, 4, "0110", [1, 2]),
])
def test_bits_to_message_examples(L, M, bits, idx):
    p = core.CodeParams(L=L, M=M, n=2 * L, R=1.0, P=float(L), sigma2=1.0)
    pa = powalloc.flat(L, p.P)
    beta = core.bits_to_message([int(c) for c in bits], pa, p)
    assert list(np.flatnonzero(beta) % M) == idx
    assert np.allclose(beta[np.flatnonzero(beta)], math.sqrt(p.n * p.P / L))


def test_bits_to_message_length_mismatch():
    p = core.CodeParams(L=2, M=4, n=4, R=1.0, P=2.0, sigma2=1.0)
    with pytest.raises(ValueError):
        core.bits_to_message([0, 1, 1], powalloc.flat(2, 2.0), p)


@pytest.mark.parametrize("L, M", [(L, M) for L in (1, 2) for M in (2, 4, 8, 16)])
def test_round_trip_exhaustive(L, M):
    logM = int(math.log2(M))
    p = core.CodeParams(L=L, M=M, n=L * logM, R=1.0, P=3.0, sigma2=1.0)
    pa = powalloc.exponential(L, 3.0, 1.0)
    for bits in itertools.product((0, 1), repeat=L * logM):
        beta = core.bits_to_message(bits, pa, p)
        assert np.count_nonzero(beta) == L
        assert tuple(core.message_to_bits(beta, M)) == bits


@settings(max_examples=50)
@given(L=st.integers(1, 64), k=st.integers(1, 10), seed=st.integers(0, 2 ** 32 - 1))
def test_round_trip_random(L, k, seed):
    M = 2 ** k
    p = core.CodeParams(L=L, M=M, n=L * k, R=1.0, P=1.0, sigma2=1.0)
    bits = np.random.default_rng(seed).integers(0, 2, L * k)
    beta = core.bits_to_message(bits, powalloc.flat(L, 1.0), p)
    np.testing.assert_array_equal(core.message_to_bits(beta, M), bits)


def test_measure_errors_examples():
    M = 4
    beta = core.message_from_indices([1, 2], [1.0, 1.0], M)
    bits = core.indices_to_bits([1, 2], M)
    m = core.measure_errors(beta, beta, bits, bits, M)
    assert (m.section_errors, m.esec, m.ber, m.cw_error) == (0, 0.0, 0.0, False)

    wrong = core.message_from_indices([0, 3], [1.0, 1.0], M)
    m = core.measure_errors(wrong, beta, core.indices_to_bits([0, 3], M), bits, M)
    assert m.esec == 1.0

    half = core.message_from_indices([1, 3], [1.0, 1.0], M)
    hb = core.indices_to_bits([1, 3], M)
    m = core.measure_errors(half, beta, hb, bits, M)
    assert m.esec == 0.5 and m.cw_error and m.bit_errors == 1 and m.ber == 0.25

    with pytest.raises(ValueError):
        core.measure_errors(beta[:4], beta, bits, bits, M)
