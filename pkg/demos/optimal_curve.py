# %% [markdown]
# # Best pulse amplitude and residual mismatch versus rate ratio
#
# For each ratio gamma_e / gamma_p the amplitude is tuned by golden section.
# The harmonic curve 2r/(r+1) is drawn for comparison.

# %%
from pathlib import Path

import numpy as np

from qscatter import svg
from qscatter.comparison import harmonic_ratio_curve, optimal_curve
from qscatter.core import mhz_to_angular

out = Path(__file__).with_suffix("")
out.mkdir(exist_ok=True)
ratios = np.geomspace(0.05, 20, 15)
points = optimal_curve(ratios, mhz_to_angular(1.0), n_points=1001)

# %%
for p in points:
    print(f"r={p.ratio:7.3f}  omega*/gamma_p={p.omega_star_over_gamma_p:.4f}  "
          f"eps_min={p.epsilon_min_normalized:.3f}  {'ok' if p.converged else p.message}")

# %%
(out / "optimal_curve.svg").write_text(svg.line_chart(
    [("omega* / gamma_p", ratios, [p.omega_star_over_gamma_p for p in points]),
     ("2r/(r+1)", ratios, harmonic_ratio_curve(ratios)),
     ("eps_min (normalized)", ratios, [p.epsilon_min_normalized for p in points])],
    "gamma_e / gamma_p", "", "optimal amplitude", logx=True))
