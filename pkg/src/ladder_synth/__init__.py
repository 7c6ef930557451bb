"""Synthesis of arbitrary spin-oscillator states by alternating carrier and
sideband pulses, with exact simulation, synthetic Rabi tomography and
coherence-fringe fidelity estimation.

Typical use::

    from ladder_synth import CouplingModel, compile_generation, make_state, run_program, ground_state

    model = CouplingModel.from_ratio(0.60)
    target = make_state(3, [("down", 0, 1), ("down", 3, 1)])
    prog = compile_generation(target, model)
    final = run_program(ground_state(3), prog, model)[-1]
"""

from .compiler import PulseProgram, compile_clearing, compile_generation, invert_program, solve_clear
from .coupling import CouplingModel, Pulse, eta_from_ratio, laguerre, pair_rate, rabi_rate
from .errors import (
    CompileError,
    DigestMismatch,
    FitError,
    InputError,
    LadderError,
    NoRootError,
    NumericError,
    UnderdeterminedError,
    UnphysicalCoherence,
)
from .simulate import (
    FringeDataset,
    NoiseModel,
    RabiDataset,
    apply_pulse,
    run_program,
    simulate_fringe_scan,
    simulate_rabi_scan,
)
from .state import DOWN, UP, JointState, PopulationTable, fidelity_pure, ground_state, make_state, populations
from .tomography import (
    coherence_from_fringe,
    fidelity_estimate,
    fit_rabi,
    fringe_contrast,
    invert_populations,
    rabi_tomography,
)

__version__ = "0.1.0"

__all__ = [
    "CompileError", "CouplingModel", "DOWN", "DigestMismatch", "FitError", "FringeDataset", "InputError",
    "JointState", "LadderError", "NoRootError", "NoiseModel", "NumericError", "PopulationTable", "Pulse",
    "PulseProgram", "RabiDataset", "UP", "UnderdeterminedError", "UnphysicalCoherence", "apply_pulse",
    "coherence_from_fringe", "compile_clearing", "compile_generation", "eta_from_ratio", "fidelity_estimate",
    "fidelity_pure", "fit_rabi", "fringe_contrast", "ground_state", "invert_populations", "invert_program",
    "laguerre", "make_state", "pair_rate", "populations", "rabi_rate", "rabi_tomography", "run_program",
    "simulate_fringe_scan", "simulate_rabi_scan", "solve_clear",
]
