"""
Population tomography from three Rabi-flopping scans
====================================================

"""

# We cannot see Fock populations directly, only P(down) after a pulse of
# variable length.  Each populated pair oscillates at its own frequency, so
# fitting a scan separates the pairs, and combining the carrier with both
# first sidebands pins down every cell of the table.

import numpy as np

from ladder_synth import CouplingModel, NoiseModel, compile_generation, ground_state, make_state, run_program
from ladder_synth.io import fit_report
from ladder_synth.state import DOWN, UP, populations
from ladder_synth.tomography import rabi_tomography, target_probability

model = CouplingModel.from_ratio(0.60)
target = make_state(3, [("down", 0, 1), ("down", 3, 1)])
state = run_program(ground_state(3), compile_generation(target, model), model)[-1]

# 600 shots per point, a signal envelope that decays over nine oscillations
# of the lowest pair, and a little preparation error.

noise = NoiseModel(decay_osc=9.0, prep_error=0.001, seed=4)
res = rabi_tomography(state, model, deltas=(0, 1, -1), shots=600, noise=noise)

for dn, fit in res.fits.items():
    rep = fit_report(fit)
    amps = ", ".join(f"{c['amplitude']:.3f}" for c in rep["components"])
    print(f"delta_n = {dn:+d}   omega_base = {rep['omega_base']:.1f} rad/s   amplitudes [{amps}]"
          f"   rms = {rep['residual_rms']:.4f}")

# The inverted table, with one-sigma uncertainties.

table = res.table
print("\n        " + "".join(f"{'n=' + str(n):>16}" for n in range(4)))
for spin in (DOWN, UP):
    cells = "".join(f"{table.p[spin, n]:>8.3f} +-{table.sigma[spin, n]:.3f}" for n in range(4))
    print(f"{spin.label:>6}  {cells}")

print(f"\nP on the target support = {target_probability(table, target):.3f}")
print(f"largest error vs truth  = {np.abs(table.p - populations(state).p).max():.3f}")

# How often does a cell land within 0.03 of the truth?  Twenty repeats.

hits = 0
for seed in range(20):
    r = rabi_tomography(state, model, noise=NoiseModel(decay_osc=9.0, seed=seed))
    hits += int(np.sum(np.abs(r.table.p - populations(state).p) <= 0.03))
print(f"cells within 0.03: {hits}/160")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from ladder_synth.tomography import rabi_signal
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=False)
    for ax, (dn, d) in zip(axes, res.datasets.items()):
        ax.plot(d.times * 1e6, d.p_down, ".", ms=3)
        tt = np.linspace(d.times[0], d.times[-1], 2000)
        ax.plot(tt * 1e6, rabi_signal(res.fits[dn], tt), lw=1)
        ax.set_ylabel(f"P(down), dn={dn:+d}")
    axes[-1].set_xlabel("pulse length (us)")
    fig.tight_layout()
    fig.savefig("rabi_scans.png", dpi=120)
    print("wrote rabi_scans.png")
