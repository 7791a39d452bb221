# %% [markdown]
# # Forward scattering and the Born series
#
# The total field solves the Lippmann-Schwinger equation $u = K u + \Phi$ on
# the support $D$. The Born series expands it in powers of the potential; it
# converges once the frequency is large enough that $\|K\| < 1$.

# %%
import numpy as np

from biharmonic_rp import complex_wavenumber
from biharmonic_rp.forward import (
    ScatterGrid,
    backscatter,
    born_partial_sum,
    contraction_ratio,
    locate_k0,
    solve_direct,
)
from biharmonic_rp.randfield import StrengthProfile, grid_for_box, sample_field
from biharmonic_rp.forward import potential_on_grid

box = ((-0.5, -0.5), (0.5, 0.5))
grid = ScatterGrid.from_box(*box, 24)
mu = StrengthProfile.bumps([(0.1, -0.05)], [0.4], [4.0], box)
rho = potential_on_grid(sample_field(mu, 1.5, grid_for_box(*grid.box, grid.h), seed=3), grid)
x = np.array([2.0, 0.0])

# %% [markdown]
# ## Contraction and the threshold frequency
#
# The operator norm of $K$ falls with $k$; the threshold $k_0$ is where it
# crosses one.

# %%
for k in (0.1, 1.0, 10.0, 100.0):
    print(f"k={k:6.1f}  ||K|| ~ {contraction_ratio(rho, grid, complex_wavenumber(k, 1.0)):.3f}")
k0 = locate_k0(rho, grid, 1.0, 0.05, 400.0)
print("k0 =", round(k0, 3))

# %% [markdown]
# ## Partial sums against the direct solve
#
# Past $4 k_0$ the error of the partial sums decreases term by term.

# %%
wn = complex_wavenumber(4 * k0, 1.0)
u = solve_direct(rho, grid, x, [x], wn).receivers[0].u
_, terms = born_partial_sum(8, rho, grid, x, x, wn, return_terms=True)
print(np.abs(u - np.cumsum(terms)) / abs(u))

# %% [markdown]
# ## Backscattering split
#
# The batched solver returns $u^s = u_1 + u_2 + b$ where $b$ collects every
# term of order three and higher.

# %%
out = backscatter(rho[None], grid, [x], complex_wavenumber(100.0, 1.0))
for key in ("us", "u1", "u2", "b"):
    print(key, complex(out[key][0, 0]))
