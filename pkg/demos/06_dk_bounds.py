# %% [markdown]
# # Sandwiching d_K between computable numbers
#
# d_K is an infimum over all joint embeddings and is not computed here.
# d_inf / n is a lower bound; an explicit joint structure gives an upper one.

# %%
import random

from metric_fraisse import diversity as div
from metric_fraisse import stochastic as sto
from metric_fraisse.foundation import EnumeratedTuple, d_infty, dK_lower_bound
from metric_fraisse.generators import random_diversity, random_process

rng = random.Random(5)
A = random_diversity(rng, ["p", "q", "r"])
B = random_diversity(rng, ["u", "v", "w"])
a = EnumeratedTuple.of(A, ["p", "q", "r"])
b = EnumeratedTuple.of(B, ["u", "v", "w"])
emb = div.dK_upper_embedding(a, b)
print(f"{dK_lower_bound(a, b)} <= d_K <= {emb.bound}   (d_inf = {d_infty(a, b)}, via {emb.method})")

# %% [markdown]
# The step-by-step gluing is greedy and can overshoot d_inf.  When it does,
# the largest joint table under the forced caps is used instead.

# %%
from fractions import Fraction

fs = frozenset
pa = div.from_table(["x", "y"], {fs("xy"): Fraction(11, 3)})
pb = div.from_table(["u", "v", "w"], {fs("uv"): Fraction(10, 3), fs("uw"): 7,
                                      fs("vw"): Fraction(31, 6), fs("uvw"): 8})
a = EnumeratedTuple.of(pa, ["x", "x", "y"])
b = EnumeratedTuple.of(pb, ["u", "v", "w"])
print("d_inf          ", d_infty(a, b))
print("greedy chain   ", div.chain_embedding(a, b).bound)
print("closure        ", div.dK_upper_embedding(a, b).bound)

# %% [markdown]
# For processes the whole vectors are coupled at once.

# %%
P = random_process(rng, ["s", "t"], (0, 1))
Q = random_process(rng, ["s", "t"], (0, 1))
a = EnumeratedTuple.of(P, ["s", "t"])
b = EnumeratedTuple.of(Q, ["s", "t"])
emb = sto.dK_upper_embedding(a, b)
print(f"{dK_lower_bound(a, b)} <= d_K <= {emb.bound} <= 4 * {d_infty(a, b)}")
