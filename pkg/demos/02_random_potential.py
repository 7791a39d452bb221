# %% [markdown]
# # Rough random potentials
#
# The potential is a centred Gaussian field whose covariance operator has
# principal symbol $\mu(x)|\xi|^{-m}$ with $d-1 < m \le d$. It is drawn by
# spectral synthesis on a periodic grid and multiplied by $\sqrt{\mu}$.

# %%
import numpy as np

from biharmonic_rp.randfield import (
    StrengthProfile,
    empirical_covariance,
    fit_covariance_constant,
    generate_ensemble,
    grid_for_box,
    sample_field,
)

box = ((-0.5, -0.5), (0.5, 0.5))
mu = StrengthProfile.bumps([(0.1, -0.05)], [0.4], [4.0], box)
grid = grid_for_box(*box, 1.0 / 32)

# %% [markdown]
# ## One realization
#
# Values vanish outside the support of $\mu$ and are rough inside.

# %%
f = sample_field(mu, 1.5, grid, seed=1)
print("grid", grid.shape, "std inside", f.values[f.values != 0].std())
print("zero outside the bump:", np.all(f.values[mu(grid.nodes()) == 0] == 0))

# %% [markdown]
# ## Covariance as a function of the lag
#
# For $m < d$ the covariance behaves like $|h|^{m-d}$ near the diagonal, so a
# log-log fit over small lags has slope close to $m - d$. This coarse grid
# and small ensemble give only a rough slope; the acceptance suite uses a
# finer grid and 2000 draws.

# %%
ens = generate_ensemble(StrengthProfile.constant(1.0, box), 1.5, grid, master_seed=5, count=300)
lags = np.arange(2, 9) * grid.h
est = empirical_covariance(ens, [(0.0, 0.0), (0.1, -0.1)], lags)
for e in est:
    print(f"lag {e.lag:.4f}  covariance {e.estimate:8.3f} +- {e.stderr:.3f}")
fit = fit_covariance_constant(est, 1.0, 1.5, 2)
print(f"fitted slope {fit.slope:.3f} (target -0.5), constant {fit.constant:.3f}")
