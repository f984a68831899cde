# %% [markdown]
# # L1 diversities and their cuts
#
# Nonnegative sums of cut indicators are exactly the L1 diversities, and the
# weights can be read back off the table by Moebius inversion.

# %%
import random

from metric_fraisse import diversity as div
from metric_fraisse import l1cut
from metric_fraisse.generators import agreeing_cut_pair, random_cut_weights

w = l1cut.CutWeights((1, 2, 3), 1, {frozenset({2}): 2, frozenset({3}): 1})
D = l1cut.cut_diversity(w)
print([D.delta(s) for s in ([1, 2], [1, 3], [2, 3], [1, 2, 3])])
print(l1cut.decompose(D))

# %% [markdown]
# When the table is not a cut combination the answer says why.

# %%
twos = div.from_table([1, 2, 3], {frozenset(s): 2 for s in ([1, 2], [1, 3], [2, 3], [1, 2, 3])})
print(l1cut.decompose(twos).describe())

# %% [markdown]
# Random round trips, then gluing two L1 extensions split by split.

# %%
rng = random.Random(0)
for _ in range(200):
    w = random_cut_weights(rng, "abcdef"[: rng.randint(2, 6)])
    assert l1cut.decompose(l1cut.cut_diversity(w)) == w
print("200 round trips exact")

w1, w2 = agreeing_cut_pair(rng, 3)
r = l1cut.amalgamate_l1(l1cut.cut_diversity(w1), l1cut.cut_diversity(w2))
print("d(z1, z2) =", r.z_distance, " bound =", r.bound)
print(r.weights)
