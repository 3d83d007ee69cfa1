"""Seeded Monte-Carlo simulation of SPARCs over the AWGN channel.

Trial ``t`` of every Eb/N0 point uses ``seed = base_seed + t``. Its message
bits, channel noise and design-operator seed come from three child streams of
``numpy.random.SeedSequence(seed)``, so each record depends only on the
configuration and its seed, never on worker count or scheduling.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .codec import DecoderConfig, amp_decode, hard_decision
from .core import CodeParams, bits_to_message, ebn0_to_snr, measure_errors, message_to_bits
from .design import new_operator
from .powalloc import make_allocation

CSV_FIELDS = ("ebn0_db", "trials", "esec_mean", "ber_mean", "cwer",
              "cwer_ci_lo", "cwer_ci_hi", "avg_iters")


def awgn(x, sigma2: float, seed) -> np.ndarray:
    """``x`` plus i.i.d. N(0, sigma2) noise drawn from ``default_rng(seed)``."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    x = np.asarray(x, dtype=float)
    if sigma2 == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    return x + rng.normal(0.0, math.sqrt(sigma2), size=x.shape)


@dataclass(frozen=True)
class TrialConfig:
    L: int
    M: int
    R: float  # user rate in bits per channel use
    ebn0_db: tuple = (6.0,)
    trials: int = 100
    base_seed: int = 0
    pa_scheme: str = "iterative"
    R_PA: float | None = None
    B: int | None = None
    pa_a: float | None = None
    pa_f: float | None = None
    operator: str = "hadamard"
    fixed_operator: bool = False
    max_iterations: int = 64
    early_stop: float | None = None
    tau_mode: str = "online"
    sigma2: float = 1.0
    outer: str | None = None  # alist path of an outer LDPC code
    minsum_iters: int = 50

    def __post_init__(self):
        grid = self.ebn0_db
        grid = (grid,) if isinstance(grid, (int, float)) else tuple(float(v) for v in grid)
        object.__setattr__(self, "ebn0_db", grid)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not grid:
            raise ValueError("Eb/N0 grid must not be empty")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if not 0 <= self.base_seed < 2 ** 64:
            raise ValueError("base_seed must fit in 64 bits")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        self.decoder_config()

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(self.max_iterations, self.early_stop, self.tau_mode)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["ebn0_db"] = list(self.ebn0_db)
        return d


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    ebn0_db: float
    section_errors: int
    bit_errors: int
    cw_error: bool
    iterations_run: int
    tau2_final: float
    stage_diagnostics: dict | None = None
    aborted: str | None = None


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class PointAggregate:
    """Error counts at one Eb/N0; ``merge`` of two disjoint runs equals the joint run."""

    ebn0_db: float
    L: int
    n_user_bits: int
    trials: int = 0
    section_errors: int = 0
    bit_errors: int = 0
    cw_errors: int = 0
    iterations: int = 0
    aborted: int = 0
    histogram: Counter = field(default_factory=Counter)

    def add(self, rec: TrialRecord) -> None:
        self.trials += 1
        self.section_errors += rec.section_errors
        self.bit_errors += rec.bit_errors
        self.cw_errors += int(rec.cw_error)
        self.iterations += rec.iterations_run
        self.aborted += rec.aborted is not None
        self.histogram[rec.section_errors] += 1

    def merge(self, other: "PointAggregate") -> "PointAggregate":
        if (self.ebn0_db, self.L, self.n_user_bits) != (other.ebn0_db, other.L, other.n_user_bits):
            raise ValueError("cannot merge aggregates of different configurations")
        return PointAggregate(self.ebn0_db, self.L, self.n_user_bits,
                              self.trials + other.trials,
                              self.section_errors + other.section_errors,
                              self.bit_errors + other.bit_errors,
                              self.cw_errors + other.cw_errors,
                              self.iterations + other.iterations,
                              self.aborted + other.aborted,
                              self.histogram + other.histogram)

    @property
    def esec_mean(self) -> float:
        return self.section_errors / (self.trials * self.L)

    @property
    def ber_mean(self) -> float:
        return self.bit_errors / (self.trials * self.n_user_bits)

    @property
    def cwer(self) -> float:
        return self.cw_errors / self.trials

    @property
    def cwer_ci(self) -> tuple[float, float]:
        return wilson_interval(self.cw_errors, self.trials)

    @property
    def avg_iters(self) -> float:
        return self.iterations / self.trials

    def row(self) -> dict:
        lo, hi = self.cwer_ci
        return {"ebn0_db": self.ebn0_db, "trials": self.trials, "esec_mean": self.esec_mean,
                "ber_mean": self.ber_mean, "cwer": self.cwer, "cwer_ci_lo": lo,
                "cwer_ci_hi": hi, "avg_iters": self.avg_iters}

    def to_dict(self) -> dict:
        d = self.row()
        d.update(aborted=self.aborted,
                 histogram={str(k): v for k, v in sorted(self.histogram.items())})
        return d


@dataclass
class SimulationResult:
    config: TrialConfig
    points: list
    records: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for p in self.points:
            w.writerow(p.row())
        return buf.getvalue()

    def to_json(self, include_records: bool = False) -> str:
        out = {"config": self.config.to_dict(), "points": [p.to_dict() for p in self.points]}
        if include_records:
            out["records"] = [dataclasses.asdict(r) for r in self.records]
        return json.dumps(out, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


@functools.lru_cache(maxsize=8)
def _load_outer(path: str):
    from .outer import LdpcCode

    return LdpcCode.from_alist(path)


@dataclass(frozen=True)
class PointSetup:
    """Everything a trial at one Eb/N0 needs, shared read-only by all its trials."""

    params: CodeParams
    pa: object
    layout: object = None
    code: object = None

    @property
    def n_user_bits(self) -> int:
        return self.layout.n_user_bits if self.layout is not None else self.params.n_bits


def setup_point(cfg: TrialConfig, ebn0_db: float) -> PointSetup:
    layout = code = None
    if cfg.outer is not None:
        from .outer import plan_layout

        code = _load_outer(cfg.outer)
        layout = plan_layout(cfg.L, cfg.M, code.n, code.k)
        params = layout.code_params(cfg.R, 1.0, cfg.sigma2)
        R_user = layout.user_rate(params.n)
    else:
        params = CodeParams.from_rate(cfg.L, cfg.M, cfg.R, 1.0, cfg.sigma2)
        R_user = params.R
    snr = ebn0_to_snr(ebn0_db, R_user)
    params = dataclasses.replace(params, P=snr * cfg.sigma2)
    pa = make_allocation(cfg.pa_scheme, cfg.L, params.P, cfg.sigma2, params.R,
                         B=cfg.B, R_PA=cfg.R_PA, a=cfg.pa_a, f=cfg.pa_f)
    return PointSetup(params, pa, layout, code)


def _trial_streams(cfg: TrialConfig, seed: int):
    msg_ss, noise_ss, op_ss = np.random.SeedSequence(seed).spawn(3)
    op_seed = cfg.base_seed if cfg.fixed_operator else int(op_ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(msg_ss), noise_ss, op_seed


def run_one_trial(cfg: TrialConfig, setup: PointSetup, ebn0_db: float, seed: int) -> TrialRecord:
    params, pa, layout = setup.params, setup.pa, setup.layout
    rng, noise_ss, op_seed = _trial_streams(cfg, seed)
    user = rng.integers(0, 2, setup.n_user_bits, dtype=np.uint8)
    if layout is not None:
        off = layout.ldpc_bit_offset
        bits = np.concatenate([user[:off], setup.code.encode(user[off:])])
    else:
        bits = user
    beta = bits_to_message(bits, pa, params)
    op = new_operator(cfg.operator, params.n, params.L, params.M, op_seed)
    y = awgn(op.forward(beta), params.sigma2, noise_ss)

    diag = None
    aborted = None
    iters, tau2 = 0, float("nan")
    try:
        if layout is not None:
            from .outer import three_stage_decode

            bits_hat, d = three_stage_decode(y, op, pa, params, layout, setup.code,
                                             cfg.decoder_config(), minsum_iters=cfg.minsum_iters,
                                             beta_true=beta)
            iters = d.iterations_run
            tau2 = float(d.stage1.tau2_final)
            diag = {"ldpc_valid": d.ldpc_valid, **d.section_errors}
        else:
            state = amp_decode(y, op, pa, params, cfg.decoder_config())
            bits_hat = message_to_bits(hard_decision(state, pa, params.n), params.M)
            iters, tau2 = state.iterations_run, state.tau2_final
    except (ArithmeticError, RuntimeError, FloatingPointError) as exc:
        # an aborted trial counts as decoding the all-zero message
        aborted = f"{type(exc).__name__}: {exc}"
        bits_hat = np.zeros_like(bits)

    beta_hat = bits_to_message(bits_hat, pa, params)
    n_user = setup.n_user_bits
    m = measure_errors(beta_hat, beta, bits_hat[:n_user], user, params.M)
    cw_error = m.bit_errors > 0 if layout is not None else m.cw_error
    return TrialRecord(seed=seed, ebn0_db=ebn0_db, section_errors=m.section_errors,
                       bit_errors=m.bit_errors, cw_error=bool(cw_error), iterations_run=iters,
                       tau2_final=tau2, stage_diagnostics=diag, aborted=aborted)


def _run_chunk(cfg: TrialConfig, ebn0_db: float, seeds: list) -> list:
    setup = setup_point(cfg, ebn0_db)
    return [run_one_trial(cfg, setup, ebn0_db, s) for s in seeds]


def trial_seeds(cfg: TrialConfig) -> list:
    return [cfg.base_seed + t for t in range(cfg.trials)]


def run_trials(cfg: TrialConfig, workers: int = 1, keep_records: bool = True,
               chunk_size: int = 8) -> SimulationResult:
    """Run every trial at every Eb/N0 and aggregate; results are ordered by (point, trial)."""
    seeds = trial_seeds(cfg)
    if seeds[-1] >= 2 ** 64:
        raise ValueError("base_seed + trials overflows 64 bits")
    jobs = [(e, seeds[i:i + chunk_size]) for e in cfg.ebn0_db
            for i in range(0, len(seeds), chunk_size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_run_chunk, [cfg] * len(jobs), *zip(*jobs)))
    else:
        chunks = [_run_chunk(cfg, e, s) for e, s in jobs]

    setups = {e: setup_point(cfg, e) for e in cfg.ebn0_db}
    points = {e: PointAggregate(e, cfg.L, setups[e].n_user_bits) for e in cfg.ebn0_db}
    records = []
    for chunk in chunks:
        for rec in chunk:
            points[rec.ebn0_db].add(rec)
        if keep_records:
            records.extend(chunk)
    return SimulationResult(cfg, [points[e] for e in cfg.ebn0_db], records)
