# %% [markdown]
# # Fundamental solution of the biharmonic operator
#
# The outgoing fundamental solution of $\Delta^2 - \kappa^4$ combines an
# oscillating Hankel (or exponential) part with an evanescent Macdonald part.
# This notebook evaluates it in two and three dimensions, checks its value on
# the diagonal and measures how fast it decays in frequency.

# %%
import numpy as np

from biharmonic_rp import complex_wavenumber
from biharmonic_rp.greens import phi, phi_diagonal, phi_radial

# %% [markdown]
# ## The complex wavenumber
#
# With damping $\sigma$ the wavenumber solves $\kappa^4 = k^2 + i\sigma k$.
# For large $k$ the real part approaches $\sqrt{k}$ and the imaginary part
# decays like $\sigma / (4\sqrt{k})$.

# %%
for k in (1.0, 1e2, 1e4, 1e6):
    wn = complex_wavenumber(k, 1.0)
    print(f"k={k:8.0e}  kappa_r/sqrt(k)={wn.kappa_r / np.sqrt(k):.6f}"
          f"  sqrt(k) kappa_i={np.sqrt(k) * wn.kappa_i:.6f}")

# %% [markdown]
# ## Radial profile
#
# Unlike the Helmholtz kernel, $\Phi$ is bounded at $r = 0$. Small radii
# approach the closed-form diagonal value.

# %%
wn = complex_wavenumber(25.0, 1.0)
r = np.array([1e-8, 1e-4, 1e-2, 0.1, 1.0, 3.0])
for d in (2, 3):
    print(f"d={d}: diagonal {complex(phi_diagonal(wn, d)):.6e}")
    for ri, v in zip(r, phi_radial(r, wn, d)):
        print(f"   r={ri:7.0e}  Phi={complex(v):.6e}")

# %% [markdown]
# ## Decay in frequency
#
# On a set at positive distance from a source region, $\sup|\Phi|$ falls like
# $k^{-5/4}$ in two dimensions and $k^{-1}$ in three.

# %%
ks = np.logspace(2, 4, 9)
for d in (2, 3):
    x = np.zeros(d)
    x[0] = 2.0
    y = np.zeros(d)
    sup = [abs(complex(phi(x, y, complex_wavenumber(k, 1.0), d))) for k in ks]
    slope = np.polyfit(np.log(ks), np.log(sup), 1)[0]
    print(f"d={d}: log-log slope {slope:.3f}")
