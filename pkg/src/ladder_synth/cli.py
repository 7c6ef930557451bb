"""Command line: ``ladder-synth {compile,simulate,tomo,fringe,reproduce}``.

Exit codes: 0 success, 2 input error (bad file, index range, digest
mismatch), 3 numerical failure (no root, fit failure, unphysical coherence).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as lio
from .compiler import CLEARING, compile_clearing, compile_generation
from .coupling import DEFAULT_OMEGA0, CouplingModel, eta_from_ratio, pair_rate
from .errors import InputError, LadderError, NumericError
from .simulate import NoiseModel, run_program, simulate_fringe_scan
from .state import DOWN, UP, JointState, fidelity_pure, ground_state, make_state, populations
from .tomography import (
    coherence_from_fringe,
    fidelity_estimate,
    fringe_contrast,
    rabi_tomography,
    target_probability,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

PSI_T = [("down", 0, 0.64), ("up", 2, 0.77)]


def parse_angle(text: str) -> float:
    """``'0.5pi'``, ``'pi/2'``, ``'1.5708'`` -> radians."""
    t = text.strip().lower().replace(" ", "")
    try:
        if "pi" in t:
            num, _, rest = t.partition("pi")
            num = num.rstrip("*") or "1"
            val = float(num) * math.pi
            if rest.startswith("/"):
                val /= float(rest[1:])
            elif rest:
                raise ValueError(text)
            return val
        return float(t)
    except ValueError as exc:
        raise InputError(f"cannot parse angle {text!r}") from exc


def parse_noise(items, **defaults) -> NoiseModel:
    kw = dict(defaults)
    fields = {"decay_osc": float, "prep_error": float, "amp_jitter": float, "phase_jitter": float,
              "seed": int, "per_component_decay": lambda v: v.lower() in ("1", "true", "yes")}
    for item in items or ():
        for part in item.split(","):
            key, sep, val = part.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in fields:
                raise InputError(f"bad noise setting {part!r}; keys: {sorted(fields)}")
            kw[key] = None if val.lower() == "none" else fields[key](val)
    return NoiseModel(**kw)


def _model_from_args(args) -> CouplingModel:
    if args.calibrate_ratio is not None:
        ratio, a, b = args.calibrate_ratio
        eta = eta_from_ratio(float(ratio), (int(a), 1), (int(b), 1))
    else:
        eta = args.eta
    return CouplingModel(omega0=args.omega0, eta=eta)


def _load_source(path, force=False):
    """State, embedded target and model from a target spec or program document."""
    doc = lio._load_json(path)
    if lio.is_program_document(doc):
        prog = lio.parse_program(doc, force=force)
        n_max = prog.target.n_max if prog.target is not None else max(
            [max(p.ref_pair, p.ref_up) for p in prog.pulses] or [0])
        start = prog.target if prog.direction == CLEARING else ground_state(n_max)
        if start is None:
            raise InputError("clearing program without an embedded target")
        traj = run_program(start, prog, prog.model, force=force)
        return traj[-1], prog.target, prog.model
    return lio.parse_target(doc), None, None


def _print_table(table, out=sys.stdout):
    print(f"{'':>6}" + "".join(f"{'n=' + str(n):>10}" for n in range(table.n_max + 1)), file=out)
    for spin in (DOWN, UP):
        print(f"{spin.label:>6}" + "".join(f"{table.p[spin, n]:>10.4f}" for n in range(table.n_max + 1)), file=out)


# -- commands ----------------------------------------------------------------


def cmd_compile(args) -> int:
    target = lio.parse_target(args.target)
    model = _model_from_args(args)
    prog = compile_clearing(target, model) if args.direction == CLEARING else compile_generation(target, model)
    if args.out:
        Path(args.out).write_text(lio.emit_program(prog))
    print(f"eta = {model.eta:.10f}   omega0 = {model.omega0:.6g} rad/s   {args.direction}")
    print(prog.table())
    print(f"effective pulses: {len(prog.effective)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    prog = lio.parse_program(args.program, force=args.force)
    noise = parse_noise(args.noise, prep_error=0.0) if args.noise else None
    n_max = prog.target.n_max if prog.target is not None else max(
        [max(p.ref_pair, p.ref_up) for p in prog.pulses] or [0])
    if prog.direction == CLEARING:
        if prog.target is None:
            raise InputError("clearing program without an embedded target")
        start, goal = prog.target, ground_state(n_max)
    else:
        start, goal = ground_state(n_max), prog.target
    traj = run_program(start, prog, prog.model, noise=noise, force=args.force)
    if args.trajectory:
        lio.trajectory_csv(traj, args.trajectory)
    print(f"steps: {len(traj)}")
    if goal is not None:
        print(f"final fidelity: {fidelity_pure(traj[-1], goal):.12f}")
    _print_table(populations(traj[-1]))
    return EXIT_OK


def cmd_tomo(args) -> int:
    state, embedded, model = _load_source(args.source, force=args.force)
    if model is None:
        model = _model_from_args(args)
    target = lio.parse_target(args.target) if args.target else embedded
    deltas = [int(x) for x in args.deltas.split(",")]
    noise = parse_noise(args.noise, decay_osc=args.decay_osc, prep_error=args.prep_error, seed=args.seed)
    res = rabi_tomography(state, model, deltas, shots=args.shots, noise=noise, points=args.points,
                          n_osc=args.n_osc)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for dn, d in res.datasets.items():
        lio.rabi_csv(d, out / f"rabi_dn{dn:+d}.csv")
    for dn, f in res.fits.items():
        (out / f"fit_dn{dn:+d}.json").write_text(json.dumps(lio.fit_report(f), indent=2) + "\n")
    if not res.ok:
        for dn, exc in res.errors.items():
            print(f"fit failed for delta_n={dn:+d}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    lio.population_csv(res.table, out / "populations.csv")
    _print_table(res.table)
    print(f"total: {res.table.total():.6f}")
    if target is not None:
        print(f"target-state probability: {target_probability(res.table, target):.4f}")
    return EXIT_OK


def cmd_fringe(args) -> int:
    state, embedded, model = _load_source(args.source, force=args.force)
    if model is None:
        model = _model_from_args(args)
    if args.target:
        target = lio.parse_target(args.target)
    elif embedded is not None and len(embedded.support()) == 2:
        target = embedded
    else:
        target = make_state(2, PSI_T)
    area = parse_angle(args.area)
    phases = np.linspace(0.0, 2 * math.pi, args.phases, endpoint=False)
    noise = parse_noise(args.noise, prep_error=args.prep_error, seed=args.seed)
    d = simulate_fringe_scan(state, area, phases, noise, model, mixture_mode=args.mixture, shots=args.shots)
    if args.out:
        lio.fringe_csv(d, args.out)
    fit = fringe_contrast(d)
    coh, s_coh = coherence_from_fringe(fit, area, args.calibration)
    if args.coherence is not None:
        coh, s_coh = args.coherence, 0.0
    rep = fidelity_estimate(populations(state), coh, target, sigma_coh=s_coh)
    print(f"contrast: {fit.contrast:.6f} +- {fit.sigma_contrast:.2g}")
    print(f"offset:   {fit.offset:.6f}")
    print(f"phase0:   {fit.phase0:.6f}")
    print(f"rho11 = {rep.rho_elements['rho11']:.6f}  rho22 = {rep.rho_elements['rho22']:.6f}  "
          f"Re rho12 = {rep.rho_elements['coh_re']:.6f}")
    print(f"fidelity: {rep.f:.12f} +- {rep.sigma_f:.2g}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .reproduce import reproduce

    text = reproduce(Path(args.out_dir), seed=args.seed, omega0=args.omega0)
    print(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_model_flags(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--eta", type=float, help="Lamb-Dicke parameter")
    g.add_argument("--calibrate-ratio", nargs=3, metavar=("R", "A", "B"),
                   help="choose eta so that Omega(A,A+1)/Omega(B,B+1) = R")
    p.add_argument("--omega0", type=float, default=DEFAULT_OMEGA0, help="base Rabi frequency (rad/s)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ladder-synth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a target spec into a pulse program")
    p.add_argument("target")
    _add_model_flags(p, required=True)
    p.add_argument("--direction", choices=["generation", "clearing"], default="generation")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="run a program and write its trajectory")
    p.add_argument("program")
    p.add_argument("--trajectory")
    p.add_argument("--noise", action="append", help="KEY=VALUE, e.g. amp_jitter=0.01 seed=7", nargs="+")
    p.add_argument("--force", action="store_true", help="skip digest checks")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tomo", help="synthetic Rabi tomography of a state")
    p.add_argument("source", help="target spec or program document")
    _add_model_flags(p)
    p.add_argument("--target")
    p.add_argument("--shots", type=int, default=600)
    p.add_argument("--points", type=int, default=120)
    p.add_argument("--n-osc", type=float, default=12.0)
    p.add_argument("--deltas", default="0,1,-1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decay-osc", type=float, default=9.0)
    p.add_argument("--prep-error", type=float, default=0.001)
    p.add_argument("--noise", action="append", nargs="+")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("fringe", help="coherence fringe and fidelity estimate")
    p.add_argument("source", help="target spec or program document")
    _add_model_flags(p)
    p.add_argument("--target", help="two-term target (default 0.64|down,0> + 0.77|up,2>)")
    p.add_argument("--area", default="0.5pi")
    p.add_argument("--phases", type=int, default=32)
    p.add_argument("--mixture", action="store_true")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prep-error", type=float, default=0.0)
    p.add_argument("--noise", action="append", nargs="+")
    p.add_argument("--calibration", type=float, help="contrast calibration factor (default sin(area))")
    p.add_argument("--coherence", type=float, help="use this Re(rho12) instead of the fitted one")
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("reproduce", help="run the full pipeline and write a comparison report")
    p.add_argument("--out-dir", default="reproduce-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega0", type=float, default=DEFAULT_OMEGA0)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "noise", None):
        args.noise = [x for group in args.noise for x in group]
    if hasattr(args, "calibrate_ratio") and args.command != "compile":
        if args.eta is None and args.calibrate_ratio is None:
            args.calibrate_ratio = ("0.60", "3", "0")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LadderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
