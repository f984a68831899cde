# %% [markdown]
# # Finite L1 metrics do not amalgamate
#
# Two 5-point L1 metrics share the base {a, b, c, e}.  Any metric gluing
# them is fixed up to gamma = d(z1, z2), the triangle inequality pins gamma
# to [1, 2], and the pentagonal inequality on {a, b, c} | {z1, z2} fails for
# every gamma in that range.

# %%
from metric_fraisse import l1cut

m1, m2 = l1cut.nap_inputs()
print(m1)
print(m2)
r = l1cut.nap_counterexample()
print("both inputs L1:", r.inputs_l1)
print("gamma range:", r.gamma_low, "..", r.gamma_high)
print(f"pentagonal form: {r.form_constant} + {r.form_slope} * gamma")

# %% [markdown]
# The complete bipartite graph K(2,3) is the classic non-L1 metric; the exact
# simplex hands back a Farkas certificate, which is the pentagonal inequality.

# %%
k = l1cut.k23_metric()
print("pentagonal value:", l1cut.pentagonal_value(k, "abc", ("z1", "z2")))
res = l1cut.is_l1_metric(k)
for pair, y in sorted(res.certificate.items()):
    print(pair, y)
