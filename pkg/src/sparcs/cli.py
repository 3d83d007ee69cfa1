"""Command-line interface: ``sparcs {pa,se,predict,encode,decode,simulate}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, codec, core, design, powalloc, sim


def _code_args(p, need_M=True):
    p.add_argument("--L", type=int, required=True, help="number of sections")
    if need_M:
        p.add_argument("--M", type=int, required=True, help="columns per section (power of two)")
    p.add_argument("--R", type=float, required=True, help="rate in bits per channel use")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--snr", type=float, help="P / sigma2 (linear)")
    g.add_argument("--ebn0", type=float, help="Eb/N0 in dB")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--pa", default="iterative",
                   choices=["flat", "exponential", "modexp", "iterative"])
    p.add_argument("--rpa", type=float, default=None, help="R_PA for the iterative allocation")
    p.add_argument("--B", type=int, default=None, help="blocks for the iterative allocation")
    p.add_argument("--pa-a", type=float, default=None)
    p.add_argument("--pa-f", type=float, default=None)


def _params(args, M=None):
    M = args.M if M is None else M
    n, R = core.derive_code_length(args.L, M, args.R)
    snr = args.snr if args.snr is not None else core.ebn0_to_snr(args.ebn0, R)
    return core.CodeParams(L=args.L, M=M, n=n, R=R, P=snr * args.sigma2, sigma2=args.sigma2)


def _allocation(args, params):
    return powalloc.make_allocation(args.pa, params.L, params.P, params.sigma2, params.R,
                                    B=args.B, R_PA=args.rpa, a=args.pa_a, f=args.pa_f)


def _decoder_args(p):
    p.add_argument("--max-iter", type=int, default=64)
    p.add_argument("--early-stop", type=float, default=None,
                   help="stop when |tau2 change| is below this (default: smallest section power, 0 disables)")
    p.add_argument("--tau-mode", choices=["online", "offline"], default="online")


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_pa(args):
    params = _params(args, M=2)
    _emit(_allocation(args, params).to_csv(), args.out)


def cmd_se(args):
    params = _params(args)
    pa = _allocation(args, params)
    traj = analysis.se_trajectory(pa, params, mode=args.mode, samples=args.samples, seed=args.seed)
    _emit(traj.to_csv(), args.out)


def cmd_predict(args):
    params = _params(args)
    pa = _allocation(args, params)
    pred = analysis.predict_esec_closed(pa, np.sqrt(params.sigma2), params.n, params.M,
                                        quad_points=args.quad_points)
    traj = analysis.se_trajectory(pa, params)
    out = {"L": params.L, "M": params.M, "n": params.n, "R": params.R, "snr": params.snr,
           "C": params.C, "se_converged": traj.converged, "se_iterations": traj.T,
           "se_tau2_final": traj.tau2_final, "esec": pred.esec, "ecw": pred.ecw,
           "quad_error": pred.quad_error}
    if args.per_section:
        out["per_section"] = pred.per_section.tolist()
    _emit(json.dumps(out, indent=2) + "\n", args.out)


def _read_vector(path):
    path = Path(path)
    return np.load(path) if path.suffix == ".npy" else np.loadtxt(path, ndmin=1)


def _write_vector(path, x):
    if path is None or path == "-":
        np.savetxt(sys.stdout, x, fmt="%.17g")
    elif str(path).endswith(".npy"):
        np.save(path, x)
    else:
        np.savetxt(path, x, fmt="%.17g")


def cmd_encode(args):
    params = _params(args)
    pa = _allocation(args, params)
    if args.bits is not None:
        bits = np.array([int(c) for c in args.bits.strip()], dtype=np.uint8)
        if np.any(bits > 1):
            raise ValueError("--bits must contain only 0 and 1")
    else:
        bits = np.random.default_rng(args.message_seed).integers(0, 2, params.n_bits, dtype=np.uint8)
    op = design.new_operator(args.operator, params.n, params.L, params.M, args.seed)
    x = codec.encode(core.bits_to_message(bits, pa, params), op)
    if args.noise_seed is not None:
        x = sim.awgn(x, params.sigma2, args.noise_seed)
    _write_vector(args.out, x)
    if args.bits_out:
        Path(args.bits_out).write_text("".join(map(str, bits.tolist())) + "\n")


def cmd_decode(args):
    params = _params(args)
    pa = _allocation(args, params)
    y = _read_vector(args.input)
    op = design.new_operator(args.operator, params.n, params.L, params.M, args.seed)
    cfg = codec.DecoderConfig(args.max_iter, args.early_stop, args.tau_mode)
    state = codec.amp_decode(y, op, pa, params, cfg)
    bits = core.message_to_bits(codec.hard_decision(state, pa, params.n), params.M)
    out = {"bits": "".join(map(str, bits.tolist())), "iterations": state.iterations_run,
           "termination": state.termination, "tau2_trace": state.tau2_trace.tolist(),
           "estimated_section_errors": codec.estimate_remaining_errors(state, pa, params.sigma2)}
    _emit(json.dumps(out, indent=2) + "\n", args.out)


_SIM_FLAGS = {
    # flag: (config field, type)
    "L": ("L", int), "M": ("M", int), "R": ("R", float), "trials": ("trials", int),
    "seed": ("base_seed", int), "pa": ("pa_scheme", str), "rpa": ("R_PA", float),
    "B": ("B", int), "pa_a": ("pa_a", float), "pa_f": ("pa_f", float),
    "operator": ("operator", str), "max_iter": ("max_iterations", int),
    "early_stop": ("early_stop", float), "tau_mode": ("tau_mode", str),
    "sigma2": ("sigma2", float), "outer": ("outer", str), "minsum_iters": ("minsum_iters", int),
}


def _sim_config(args) -> sim.TrialConfig:
    d = {}
    if args.config:
        d.update(json.loads(Path(args.config).read_text()))
    for flag, (name, _) in _SIM_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            d[name] = v
    if args.ebn0 is not None:
        d["ebn0_db"] = args.ebn0
    if args.fixed_operator:
        d["fixed_operator"] = True
    missing = [k for k in ("L", "M", "R") if k not in d]
    if missing:
        raise ValueError(f"missing required settings: {', '.join(missing)}")
    return sim.TrialConfig.from_dict(d)


def cmd_simulate(args):
    cfg = _sim_config(args)
    if args.rpa_sweep:
        R_user = cfg.R
        results = []
        for r_pa in powalloc.rpa_grid(R_user, args.rpa_sweep):
            c = sim.TrialConfig.from_dict({**cfg.to_dict(), "R_PA": float(r_pa)})
            results.append((float(r_pa), sim.run_trials(c, workers=args.workers,
                                                       keep_records=args.records)))
        _emit_sweep(results, args)
        return
    res = sim.run_trials(cfg, workers=args.workers, keep_records=args.records)
    if args.out and args.out.endswith(".json"):
        _emit(res.to_json(include_records=args.records) + "\n", args.out)
    else:
        _emit(res.to_csv(), args.out)


def _emit_sweep(results, args):
    if args.out and args.out.endswith(".json"):
        blob = [{"R_PA": r, **json.loads(res.to_json(args.records))} for r, res in results]
        _emit(json.dumps(blob, indent=2) + "\n", args.out)
        return
    lines = ["r_pa," + ",".join(sim.CSV_FIELDS)]
    for r, res in results:
        lines += [f"{r!r},{row}" for row in res.to_csv().splitlines()[1:]]
    _emit("\n".join(lines) + "\n", args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparcs", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pa", help="print a power allocation as CSV")
    _code_args(p, need_M=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pa)

    p = sub.add_parser("se", help="state-evolution trajectory as CSV")
    _code_args(p)
    p.add_argument("--mode", choices=["asymptotic", "montecarlo"], default="asymptotic")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_se)

    p = sub.add_parser("predict", help="closed-form section and codeword error predictions")
    _code_args(p)
    p.add_argument("--quad-points", type=int, default=256)
    p.add_argument("--per-section", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("encode", help="encode bits to a (optionally noisy) codeword")
    _code_args(p)
    p.add_argument("--operator", default="hadamard", choices=["hadamard", "gaussian"])
    p.add_argument("--seed", type=int, default=0, help="design operator seed")
    p.add_argument("--bits", help="message as a 0/1 string (random if omitted)")
    p.add_argument("--message-seed", type=int, default=0)
    p.add_argument("--noise-seed", type=int, default=None, help="add channel noise with this seed")
    p.add_argument("--bits-out", help="write the message bits to this file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="AMP-decode a received vector")
    _code_args(p)
    p.add_argument("input", help="received vector (.npy or whitespace-separated text)")
    p.add_argument("--operator", default="hadamard", choices=["hadamard", "gaussian"])
    p.add_argument("--seed", type=int, default=0, help="design operator seed")
    _decoder_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte-Carlo error-rate sweep over Eb/N0")
    p.add_argument("--config", help="JSON file with TrialConfig field names")
    p.add_argument("--L", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--R", type=float, help="user rate")
    p.add_argument("--ebn0", type=float, nargs="+", help="Eb/N0 grid in dB")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="base seed; trial t uses seed + t")
    p.add_argument("--pa", choices=["flat", "exponential", "modexp", "iterative"])
    p.add_argument("--rpa", type=float)
    p.add_argument("--B", type=int)
    p.add_argument("--pa-a", type=float)
    p.add_argument("--pa-f", type=float)
    p.add_argument("--operator", choices=["hadamard", "gaussian"])
    p.add_argument("--fixed-operator", action="store_true",
                   help="reuse one design operator for all trials")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--early-stop", type=float)
    p.add_argument("--tau-mode", choices=["online", "offline"])
    p.add_argument("--sigma2", type=float)
    p.add_argument("--outer", help="alist file of an outer LDPC code")
    p.add_argument("--minsum-iters", type=int)
    p.add_argument("--rpa-sweep", type=int, default=0,
                   help="also run R_PA = R(1 + 0.02k) for k = -N..N")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--records", action="store_true", help="keep per-trial records in JSON output")
    p.add_argument("--out", help="output path ending in .csv or .json (default: CSV to stdout)")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"sparcs {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
