# %% [markdown]
# # From approximate to exact extensions
#
# An oracle realizes a one-point extension only up to a tolerance.  Asking for
# tighter and tighter realizations, and gluing each new point to the previous
# ones, gives a sequence w_0, w_1, ... whose successive gaps shrink
# geometrically.  Every bound below is checked exactly.

# %%
import random

from metric_fraisse.fraisse import (
    NoisyOracle,
    cauchy_violations,
    extension_chain,
    preset_constant,
)
from metric_fraisse.generators import random_target

target = random_target(random.Random(1), "diversity", 1)
chain = extension_chain(target, NoisyOracle(1), preset_constant("diversity", 1), 10)
print(" p  tolerance  d_inf      d(w_p, z)  d(w_p-1, w_p)")
for s in chain.steps:
    print(f"{s.p:2d}  {str(s.tolerance):9}  {str(s.d_inf):9}  {str(s.d_z):9}  {s.d_succ}")
print("Cauchy violations:", cauchy_violations(chain))

# %% [markdown]
# Processes on two states with a two-point base use c = 1/2 * 2^3 = 4, so the
# oracle is asked for a quarter of the schedule.

# %%
target = random_target(random.Random(2), "process", 2, 2)
c = preset_constant("process", 2, 2)
chain = extension_chain(target, NoisyOracle(2), c, 8)
print("c =", c, " all bounds hold:", chain.ok)
print([str(s.d_z) for s in chain.steps])
