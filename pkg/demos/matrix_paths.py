# %% [markdown]
# # Morse index jumps along symmetric matrix paths
#
# For a path A(t) with regular crossings, the index at t = 0 minus the index
# at t = 1 equals the sum of crossing-form signatures. A tangency is not a
# regular crossing, and no isolation window can be certified around it.

# %%
import numpy as np

from conjscan import diagonal_path, find_crossings, random_path, verify_isolation_bound, verify_morse_jump
from conjscan.errors import ConjscanError
from conjscan.matrix_lab import lab_batch

path = random_path(seed=5, dimension=16)
for c in find_crossings(path):
    bound = verify_isolation_bound(path, c.t0)
    print(f"t0 = {c.t0:.8f}  dim = {c.dim}  signature = {c.signature:+d}  "
          f"isolation: eps = {bound.epsilon:g}, C = {bound.constant:.3g}")
jump = verify_morse_jump(path)
print(f"index drop {jump.lhs} = signature sum {jump.rhs}")

# %%
rows = lab_batch(range(100))
print(f"{sum(r['holds'] for r in rows)} of {len(rows)} paths satisfy the jump formula, "
      f"{sum(r['crossings'] for r in rows)} crossings in total")

# %% A planted tangency
tangent = diagonal_path([lambda t: (t - 0.5) ** 2, lambda t: 1.0], [lambda t: 2 * (t - 0.5), lambda t: 0.0])
print(verify_morse_jump(tangent).skipped)
try:
    verify_isolation_bound(tangent, 0.5)
except ConjscanError as exc:
    print(exc.code)
