"""
Building |down>(|0> + |3>)/sqrt(2) from the motional ground state
=================================================================

"""

# The synthesis works backwards.  We start from the state we want, find a
# pulse that empties its highest rung, and repeat until only |down, 0> is
# left.  Running that list in reverse (every phase advanced by pi) builds
# the state from the ground state.

import math

import numpy as np

from ladder_synth import CouplingModel, compile_clearing, compile_generation, ground_state, make_state, run_program
from ladder_synth.state import DOWN, UP, populations

# The coupling strength of each sideband depends on n through a Laguerre
# polynomial.  We pick eta so the (3,4) sideband runs at 0.60 of the (0,1) one.

model = CouplingModel.from_ratio(0.60)
print(f"eta = {model.eta:.6f}")

target = make_state(3, [("down", 0, 1), ("down", 3, 1)])

# Clearing first.  Each row is one pulse; the areas are in units of pi.

clearing = compile_clearing(target, model)
print("\nclearing sequence")
print(clearing.table())

# Now the generation program, which is what an experiment would play.

prog = compile_generation(target, model)
print("\ngeneration sequence")
print(prog.table())

# Simulate it.  The trajectory has one state per pulse boundary.  Watch the
# up-spin rows: population passes through |up, n> on the way even though
# the target has none there.

traj = run_program(ground_state(3), prog, model)
print("\nstep   " + "  ".join(f"{s}{n}" .rjust(6) for s in ("d", "u") for n in range(4)))
for i, s in enumerate(traj, 1):
    p = populations(s).p
    print(f"{i:>4}   " + "  ".join(f"{p[spin, n]:6.3f}" for spin in (DOWN, UP) for n in range(4)))

final = traj[-1]
print(f"\nP(down 0) = {abs(final.amps[DOWN, 0])**2:.12f}")
print(f"P(down 3) = {abs(final.amps[DOWN, 3])**2:.12f}")

# The relative phase matters too: the generated state matches the target
# up to a global phase only.

ov = np.vdot(target.amps, final.amps)
print(f"|<target|final>|^2 = {abs(ov)**2:.12f}, global phase = {math.degrees(np.angle(ov)):.2f} deg")

# Optional picture of the trajectory.

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, len(traj), figsize=(14, 2.6), sharey=True)
    for ax, (i, s) in zip(axes, enumerate(traj, 1)):
        p = populations(s).p
        ax.bar(np.arange(4) - 0.2, p[DOWN], 0.4, label="down")
        ax.bar(np.arange(4) + 0.2, p[UP], 0.4, label="up")
        ax.set_title(f"step {i}")
        ax.set_xticks(range(4))
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig("psi03_trajectory.png", dpi=120)
    print("wrote psi03_trajectory.png")
