"""JSON documents (targets, programs, fit reports) and CSV records.

Numbers in CSV files are written with 12 significant digits; JSON floats
use Python's shortest round-trip repr so documents parse back bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .compiler import CLEARING, GENERATION, PulseProgram
from .coupling import CouplingModel, Pulse
from .errors import DigestMismatch, InputError
from .simulate import FringeDataset, RabiDataset
from .state import DOWN, UP, JointState, PopulationTable, SpinLabel, make_state

CSV_FMT = "{:.12g}"


def _num(x) -> str:
    return CSV_FMT.format(float(x))


def _load_json(source) -> dict:
    if isinstance(source, dict):
        return source
    try:
        if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
            text = Path(source).read_text()
        else:
            text = str(source)
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON document: {exc}") from exc


# -- target spec -------------------------------------------------------------


def _parse_entries(doc: dict):
    try:
        n_max = int(doc["n_max"])
        raw = doc["amplitudes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"target spec needs 'n_max' and 'amplitudes': {exc}") from exc
    seen = set()
    entries = []
    for item in raw:
        try:
            spin = SpinLabel.parse(item["spin"])
            n = int(item["n"])
            amp = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad amplitude entry {item!r}") from exc
        if (spin, n) in seen:
            raise InputError(f"duplicate amplitude for ({spin.label}, {n})")
        seen.add((spin, n))
        entries.append((spin, n, amp))
    return n_max, entries


def parse_target(source) -> JointState:
    """Target spec document -> normalized state."""
    n_max, entries = _parse_entries(_load_json(source))
    return make_state(n_max, entries)


def _exact_state(doc: dict) -> JointState:
    n_max, entries = _parse_entries(doc)
    if any(n < 0 or n > n_max for _, n, _ in entries):
        raise InputError("embedded target index out of range")
    amps = np.zeros((2, n_max + 1), dtype=np.complex128)
    for spin, n, amp in entries:
        amps[spin, n] = amp
    return JointState(amps)


def target_to_dict(s: JointState) -> dict:
    amps = []
    for n in range(s.n_max + 1):
        for spin in (DOWN, UP):
            a = s.amps[spin, n]
            if a != 0:
                amps.append({"spin": spin.label, "n": n, "re": float(a.real), "im": float(a.imag)})
    return {"n_max": s.n_max, "amplitudes": amps}


def emit_target(s: JointState) -> str:
    return json.dumps(target_to_dict(s), indent=2) + "\n"


# -- programs ----------------------------------------------------------------


def program_to_dict(p: PulseProgram) -> dict:
    doc = {
        "model": p.model.as_dict() if p.model is not None else None,
        "direction": p.direction,
        "pulses": [
            {"delta_n": q.delta_n, "ref_pair": q.ref_pair, "area": q.area, "phase": q.phase, "noop": q.noop}
            for q in p.pulses
        ],
        "target_digest": p.target_digest,
    }
    if p.target is not None:
        doc["target"] = target_to_dict(p.target)
    return doc


def emit_program(p: PulseProgram) -> str:
    return json.dumps(program_to_dict(p), indent=2) + "\n"


def parse_program(source, force: bool = False) -> PulseProgram:
    """Program document -> :class:`PulseProgram`, verifying the target digest."""
    doc = _load_json(source)
    try:
        mdoc = doc["model"]
        model = CouplingModel(**{k: float(mdoc[k]) for k in ("omega0", "eta", "trap_freq", "hyperfine_split")})
        direction = doc["direction"]
        pulses = tuple(
            Pulse(int(q["delta_n"]), int(q["ref_pair"]), float(q["area"]), float(q["phase"]), bool(q.get("noop", False)))
            for q in doc["pulses"]
        )
        digest = str(doc["target_digest"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed program document: {exc}") from exc
    if direction not in (CLEARING, GENERATION):
        raise InputError(f"unknown direction {direction!r}")
    target = None
    if doc.get("target") is not None:
        target = _exact_state(doc["target"])
        if not force and target.digest() != digest:
            raise DigestMismatch("embedded target does not match target_digest")
    return PulseProgram(pulses, direction, digest, model.digest(), model, target)


def is_program_document(doc: dict) -> bool:
    return isinstance(doc, dict) and "pulses" in doc


# -- CSV ---------------------------------------------------------------------


def _write_csv(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def trajectory_csv(traj, path=None) -> str:
    """One block per step (1-based), every basis state of the step."""
    rows = []
    for step, s in enumerate(traj, 1):
        for spin in (DOWN, UP):
            for n in range(s.n_max + 1):
                a = s.amps[spin, n]
                rows.append([step, spin.label, n, _num(a.real), _num(a.imag), _num(abs(a) ** 2)])
    return _write_csv(path, ["step", "spin", "n", "re", "im", "prob"], rows)


def read_trajectory_csv(path) -> dict:
    """``{step: {(spin_label, n): prob}}``."""
    out: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(int(row["step"]), {})[(row["spin"], int(row["n"]))] = float(row["prob"])
    return out


def rabi_csv(d: RabiDataset, path=None) -> str:
    rows = [[_num(t), _num(p), d.shots] for t, p in zip(d.times, d.p_down)]
    return _write_csv(path, ["time", "p_down", "shots"], rows)


def fringe_csv(d: FringeDataset, path=None) -> str:
    rows = [[_num(ph), _num(p), d.shots] for ph, p in zip(d.phases, d.p_down)]
    return _write_csv(path, ["phase", "p_down", "shots"], rows)


def _read_columns(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [row for row in reader if row]
    if len(header) != 3:
        raise InputError(f"{path}: expected 3 columns, found {header}")
    x = np.array([float(r[0]) for r in data])
    p = np.array([float(r[1]) for r in data])
    shots = int(data[0][2]) if data else 0
    return x, p, shots


def read_rabi_csv(path, delta_n: int) -> RabiDataset:
    t, p, shots = _read_columns(path)
    return RabiDataset(delta_n, t, p, shots)


def read_fringe_csv(path, area: float = math.pi / 2) -> FringeDataset:
    ph, p, shots = _read_columns(path)
    return FringeDataset(ph, p, shots, area)


def population_csv(table: PopulationTable, path=None) -> str:
    rows = [[spin.label, n, _num(p), _num(sig)] for spin, n, p, sig in table.rows()]
    return _write_csv(path, ["spin", "n", "p", "sigma"], rows)


def read_population_csv(path) -> PopulationTable:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n_max = max(int(r["n"]) for r in rows)
    p = np.zeros((2, n_max + 1))
    sig = np.zeros_like(p)
    for r in rows:
        s = SpinLabel.parse(r["spin"])
        p[s, int(r["n"])] = float(r["p"])
        sig[s, int(r["n"])] = float(r["sigma"])
    return PopulationTable(p, sig)


def fit_report(fit) -> dict:
    return {
        "delta_n": fit.delta_n,
        "omega_base": fit.omega_base,
        "tau": None if math.isinf(fit.tau) else fit.tau,
        "offset": fit.offset,
        "components": [{"n": n, "amplitude": a, "phase": ph} for n, a, ph in fit.components],
        "residual_rms": fit.residual_rms,
        "chi2": fit.chi2,
        "degenerate": fit.degenerate,
    }
