# %% [markdown]
# # Conjugate instants on a shrinking interval
#
# Take -u'' - (2.5 pi)^2 u on (0, r) with Dirichlet ends. The kernel appears
# whenever 2.5 pi r is a multiple of pi, so at r = 0.4 and r = 0.8. The scan
# counts negative eigenvalues of the rescaled Galerkin pencil on a radius
# grid and bisects each jump.

# %%
import math

import numpy as np

from conjscan import Grid, certify_conjugate_instant, interval_problem, morse_index, verify_smale_identity

problem = interval_problem(1.0, -(2.5 * math.pi) ** 2)
grid = Grid(2001)

# %% Morse index as a step function of the radius
for r in np.linspace(0.1, 1.0, 10):
    print(f"r = {r:.1f}   morse index = {morse_index(problem, r, grid)}")

# %% Scan, certify and compare both sides of the counting identity
report = verify_smale_identity(problem, grid)
for c in report.crossings:
    print(f"r0 = {c.r0:.10f}  m = {c.multiplicity}  signature = {c.signature}  "
          f"gamma = {c.gamma_derivative[0, 0]:.4f}  (exact {-2 * c.r0 * (2.5 * math.pi) ** 2:.4f})")
print("index at r = 1:", report.smale_lhs, "  sum of multiplicities:", report.smale_rhs)

# %% The two crossing-form evaluations converge together as the mesh is refined
for n in (251, 501, 1001, 2001):
    g = Grid(n)
    r0 = verify_smale_identity(problem, g).crossings[0].r0
    rep = certify_conjugate_instant(problem, None, r0, g)
    print(f"N = {n:5d}   r0 error = {abs(r0 - 0.4):.2e}   form disagreement = {rep.forms_rel_disagreement:.2e}")
