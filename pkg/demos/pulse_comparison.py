# %% [markdown]
# # Classical versus single-photon scattering on a slow Probe
#
# A narrow Emitter (0.09 MHz) feeds a broader Probe (1 MHz). We compare the
# scattered single-photon field with the field a decaying coherent pulse of
# Rabi amplitude 0.3 MHz would scatter. SVG files land next to this script.

# %%
from pathlib import Path

import numpy as np

from qscatter import DriveSpec, RateSet
from qscatter.classical import evolve_bloch, series_sum
from qscatter.comparison import EpsilonConfig, epsilon, peak_shift, resonant_pair
from qscatter.core import angular_to_mhz, mhz_to_angular
from qscatter.quantum import quantum_closed_form
from qscatter import svg

out = Path(__file__).with_suffix("")
out.mkdir(exist_ok=True)
rates = RateSet.from_mhz(0.09, 1.0)
omega = mhz_to_angular(0.3)
grid = EpsilonConfig().grid(rates, 2001)
t_ns = grid.values * 1e3

# %%
v_q = quantum_closed_form(rates, DriveSpec(), grid, scattered_only=True)
v_cl = evolve_bloch(rates, DriveSpec(omega0=omega), grid).field
first = series_sum(1, rates, DriveSpec(omega0=omega), grid)
third = series_sum(3, rates, DriveSpec(omega0=omega), grid)

print(f"epsilon            {epsilon(v_cl, v_q):.4f}")
print(f"peak shift         {peak_shift(v_cl, v_q) * 1e3:+.1f} ns")
print(f"|ODE - series N=3| {np.max(np.abs(v_cl.samples - third.samples)):.2e}")

# %%
(out / "envelopes.svg").write_text(svg.line_chart(
    [("single photon", t_ns, v_q.samples.real),
     ("coherent pulse", t_ns, v_cl.samples.real),
     ("first order", t_ns, first.samples.real),
     ("third order", t_ns, third.samples.real)],
    "t (ns)", "Re V (sqrt(rad/us))", "scattered envelopes"))

# %% [markdown]
# Stronger pulses saturate the Probe, so the mismatch grows with amplitude
# past the optimum.

# %%
f_mhz = np.linspace(0.05, 0.8, 31)
eps = [epsilon(*resonant_pair(rates, mhz_to_angular(f))) for f in f_mhz]
best = f_mhz[int(np.argmin(eps))]
print(f"coarse optimum     {best:.3f} MHz (sqrt(gamma_e gamma_p) = {angular_to_mhz(rates.omega_star):.3f} MHz)")
(out / "epsilon_vs_omega.svg").write_text(svg.line_chart(
    [("epsilon", f_mhz, eps)], "Omega0 (MHz)", "epsilon", "mismatch versus pulse amplitude"))
