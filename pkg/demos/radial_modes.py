# %% [markdown]
# # Radial problems and angular multiplicity
#
# On the unit disk with f = -30 the operator separates into angular modes nu.
# Each nu > 0 carries two spherical harmonics, so its crossings count twice.
# The instants are Bessel zeros j_{nu,k} / sqrt(30).

# %%
from conjscan import Grid, radial_problem, verify_smale_identity
from conjscan.config import load_config
from conjscan.inertia import mode_morse_indices

disk = radial_problem(2, 1.0, -30.0, (0, 1, 2))
grid = Grid(2001)
print("per-mode index at r = 1:", {k: v for k, v in mode_morse_indices(disk, 1.0, grid).items() if v})

# %%
report = verify_smale_identity(disk, grid)
for c in report.crossings:
    print(f"r0 = {c.r0:.8f}   modes = {c.modes}   m = {c.multiplicity}   signature = {c.signature}")
print(f"identity: {report.smale_lhs} = {report.smale_rhs};  at least "
      f"{report.bifurcation_lower_bound} distinct bifurcation instants")

# %% [markdown]
# The shipped curvature demo is a ball in three dimensions. Its second instant
# comes from the nu = 1 mode, which has three harmonics.

# %%
ball = load_config("demo_curvature").problem
report = verify_smale_identity(ball, Grid(1001))
for c in report.crossings:
    print(f"r0 = {c.r0:.8f}   modes = {c.modes}   m = {c.multiplicity}")
print("lower bound:", report.bifurcation_lower_bound)
