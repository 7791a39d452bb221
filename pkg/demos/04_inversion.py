# %% [markdown]
# # Recovering the strength from exact data
#
# At high frequency the weighted backscattered intensity converges to
# $T_d(x) = c_d \int \mu(z) |x - z|^{-2(d-1)} dz$. Recovering $\mu$ from $T_d$
# is a linear first-kind problem, solved here with a nonnegative Tikhonov
# objective.

# %%
from biharmonic_rp.forward import ScatterGrid
from biharmonic_rp.inversion import (
    assemble_forward_map,
    circle_points,
    recover_strength,
    ring_points,
)
from biharmonic_rp.randfield import StrengthProfile

box = ((-0.5, -0.5), (0.5, 0.5))
mu = StrengthProfile.bumps([(0.1, -0.05)], [0.4], [4.0], box)
grid = ScatterGrid.from_box(*box, 16)
truth = mu(grid.nodes).reshape(grid.shape)

# %% [markdown]
# ## One circle is not enough
#
# Data on a single circle cannot separate profiles with the same angular
# moments, so the recovery stays far from the truth.

# %%
for name, pts in (("circle", circle_points(60, 2.0)),
                  ("rings", ring_points([1.25, 1.5, 2.0, 2.5, 3.0], 12))):
    fmap = assemble_forward_map(pts, grid)
    est = recover_strength(fmap, fmap @ truth, 1e-10, mu_true=truth)
    print(f"{name:6s}  relative error {est.rel_error_vs_truth:.3f}  Pearson {est.pearson(truth):.3f}")

# %% [markdown]
# ## Effect of the regularization weight

# %%
fmap = assemble_forward_map(ring_points([1.25, 1.5, 2.0, 2.5, 3.0], 12), grid)
for lam in (1e-10, 1e-6, 1e-2, 1.0):
    est = recover_strength(fmap, fmap @ truth, lam, mu_true=truth)
    print(f"lam={lam:7.0e}  error {est.rel_error_vs_truth:.3f}  residual {est.data_residual:.2e}")
