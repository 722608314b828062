# %% [markdown]
# # Nonlinear branches bifurcate from the conjugate instants
#
# Shoot -u'' - (2.5 pi)^2 u + u^3 = 0 from u(0) = 0 with slope s. The zeros of
# u_s are radii carrying nontrivial solutions. As s shrinks they settle on the
# linear conjugate instants while the solution amplitude goes to zero.

# %%
from conjscan import Grid, scan_conjugate_instants, verify_bifurcation_theorem
from conjscan.config import load_config
from conjscan.nonlinear import branch_radii, shoot

problem = load_config("demo_interval").problem
for s in (1.0, 1e-1, 1e-2, 1e-3, 1e-4):
    radii = branch_radii(problem, s)
    amps = [shoot(problem, r, s).amplitude for r in radii]
    print(f"s = {s:7.0e}   radii = {[f'{r:.9f}' for r in radii]}   amplitudes = {[f'{a:.2e}' for a in amps]}")

# %%
scan = scan_conjugate_instants(problem, Grid(2001))
report = verify_bifurcation_theorem(problem, scan)
print("conjugate instants:", [round(c.r0, 8) for c in scan])
print("limit radii:       ", [round(r, 8) for r in report.limits])
print("holds:", report.holds, report.issues)
