# %% [markdown]
# # Mismatch over the (gamma_e, gamma_p) plane at fixed pulse amplitude
#
# Rows are integrated as one vectorised Bloch system. Set QSCATTER_THREADS
# to spread rows over processes.

# %%
from pathlib import Path

import numpy as np

from qscatter import svg
from qscatter.comparison import rate_grid_sweep
from qscatter.core import angular_to_mhz, mhz_to_angular

out = Path(__file__).with_suffix("")
out.mkdir(exist_ok=True)
axis = np.linspace(0.1, 3.0, 20)
sweep = rate_grid_sweep(mhz_to_angular(axis), mhz_to_angular(axis), mhz_to_angular(1.0),
                        n_points=1001, workers=2)
norm = sweep.epsilon_normalized

# %%
i, j = np.unravel_index(np.argmax(norm), norm.shape)
print(f"max at gamma_e={axis[i]:.2f} MHz, gamma_p={axis[j]:.2f} MHz")
print("diagonal:", np.round(np.diag(norm), 3))

# %%
he, hp = sweep.harmonic_locus()
de, dp = sweep.diagonal()
(out / "heatmap.svg").write_text(svg.heatmap(
    axis, axis, norm, "gamma_p (MHz)", "gamma_e (MHz)", "normalized epsilon, Omega0 = 1 MHz",
    overlays=[("harmonic", angular_to_mhz(hp), angular_to_mhz(he)),
              ("diagonal", angular_to_mhz(dp), angular_to_mhz(de))]))
