# %% [markdown]
# # Finite processes as metric structures
#
# Index points of a finite-state process are at distance P(X(s) != X(t)).
# Couplings do the gluing: the best coupling of two laws mismatches with
# probability exactly their total variation distance.

# %%
from fractions import Fraction

from metric_fraisse import stochastic as sto
from metric_fraisse.foundation import EnumeratedTuple, d_infty

h = Fraction(1, 2)
p, q = [h, h], [Fraction(1, 4), Fraction(3, 4)]
c = sto.optimal_coupling(p, q)
print("joint:", c.joint)
print("mismatch", c.mismatch, "= total variation", sto.total_variation(p, q))

# %% [markdown]
# Two extensions of the same coin a: w copies it, z flips it.

# %%
P1 = sto.FiniteProcess(["a", "w"], [0, 1], {(0, 0): h, (1, 1): h}, semi=True)
P2 = sto.FiniteProcess(["a", "z"], [0, 1], {(0, 1): h, (1, 0): h})
J = sto.amalgamate(P1, P2)
print(J)
print("d(w, z) =", J.distance(1, 2))
gap = d_infty(EnumeratedTuple.of(P1, ["a", "w"]), EnumeratedTuple.of(P2, ["a", "z"]))
print("d_inf =", gap, " bound 1/2 |S|^2 d_inf =", h * 4 * gap)

# %% [markdown]
# The amalgam keeps both inputs as marginals.

# %%
assert sto.marginal(J, ["a", "w"]) == P1
assert sto.marginal(J, ["a", "z"]) == P2
print(sto.induced_metric(J))
