# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Chern-Simons transgression
#
# Two connections on the same bundle are joined by the affine path over the
# cylinder carrier. Integrating the Chern form of the path along the fibre
# gives a form whose differential is the difference of the two characters.

# %%
from uthchern import (
    Chart,
    MatrixConn,
    SuperBundle,
    TrueForm,
    chern_form,
    chern_simons,
    exterior_d,
    tangent_carrier,
)

R2 = Chart(("x", "y"))
T = tangent_carrier(R2)

# %% [markdown]
# ## A line bundle
#
# From the trivial connection to one with theta = x dy.

# %%
L = SuperBundle(R2, 1, 0)
c0 = MatrixConn(T, L, {})
c1 = MatrixConn(T, L, {1: L.endmap([["x"]])})
cs = chern_simons(c0, c1, 1)
print("cs     =", cs)
print("d cs   =", exterior_d(cs))
print("Ch diff =", chern_form(c1, 1) - chern_form(c0, 1))
print(cs == TrueForm(T, 1, {(1,): "x"}))

# %% [markdown]
# ## A super bundle on R^4
#
# On R^2 the p = 2 forms vanish for degree reasons, so this runs on R^4.

# %%
R4 = Chart(("x", "y", "z", "w"))
T4 = tangent_carrier(R4)
E = SuperBundle(R4, 2, 1)
n0 = MatrixConn(T4, E, {
    1: E.endmap([["x", 0, 0], [0, 0, 0], [0, 0, 0]]),
    2: E.endmap([[0, 0, 0], [0, "w", 0], [0, 0, 0]]),
    3: E.endmap([[0, 0, 0], ["x*y", 0, 0], [0, 0, "y"]]),
})
n1 = MatrixConn(T4, E, {
    0: E.endmap([[0, "y", 0], [0, 0, 0], [0, 0, "x"]]),
    1: E.endmap([["x*y", 0, 0], [0, "x", 0], [0, 0, 0]]),
    3: E.endmap([[0, 0, 0], ["z", "w", 0], [0, 0, "x"]]),
})
for p in (1, 2):
    diff = chern_form(n1, p) - chern_form(n0, p)
    print(p, diff, "| d cs == diff:", exterior_d(chern_simons(n0, n1, p)) == diff)
