# %% [markdown]
# # Gluing two diversities over a common base
#
# A diversity assigns a value to every finite set of points, not just to pairs.
# Two one-point extensions of the same base can always be glued, and the
# minimal glue puts the two new points no further apart than the largest
# discrepancy between the extensions.

# %%
from metric_fraisse import diversity as div
from metric_fraisse.foundation import EnumeratedTuple, d_infty

fs = frozenset
base = {fs("xy"): 2}
D1 = div.from_table(["x", "y", "z1"], base | {fs(["x", "z1"]): 1, fs(["y", "z1"]): 1,
                                              fs(["x", "y", "z1"]): 2})
D2 = div.from_table(["x", "y", "z2"], base | {fs(["x", "z2"]): 2, fs(["y", "z2"]): 2,
                                              fs(["x", "y", "z2"]): 3})
print(D1)
print(D2)

# %% [markdown]
# The amalgam lives on x, y, z1, z2.  Restricting it recovers each input.

# %%
J = div.amalgamate_one_point(D1, D2)
for S in (["z1", "z2"], ["x", "z1", "z2"], ["y", "z1", "z2"], ["x", "y", "z1", "z2"]):
    print(f"delta{{{', '.join(S)}}} = {J.delta(S)}")
assert div.restrict(J, D1.points) == D1 and div.restrict(J, D2.points) == D2

gap = d_infty(EnumeratedTuple.of(D1, ["x", "y", "z1"]), EnumeratedTuple.of(D2, ["x", "y", "z2"]))
print("d(z1, z2) =", J.delta(["z1", "z2"]), " vs  d_inf of the extensions =", gap)

# %% [markdown]
# Identical extensions glue at distance zero.  The result is only a
# semidiversity; the quotient merges the duplicate point.

# %%
twin = div.amalgamate_one_point(D1, D1.relabel({"z1": "z2"}))
print(twin, "->", div.quotient(twin))

# %% [markdown]
# The validator names a witness when something breaks.

# %%
bad = div.from_table("xyz", {fs("xy"): 1, fs("xz"): 1, fs("yz"): 1, fs("xyz"): 3}, check=False)
print(div.find_violation(bad).message)
