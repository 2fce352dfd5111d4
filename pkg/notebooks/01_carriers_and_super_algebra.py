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
# # Carriers and super linear algebra
#
# Everything here is exact: coefficients are polynomials over the rationals in
# the chart coordinates. A carrier is a Lie-Rinehart algebra given by a frame,
# an anchor and structure functions.

# %%
from uthchern import (
    Chart,
    SuperBundle,
    aff1_carrier,
    carrier_check,
    parse_poly,
    scommutator,
    supertrace,
    tangent_carrier,
)

R2 = Chart(("x", "y"))

# %% [markdown]
# ## Polynomials

# %%
f = parse_poly("x^2*y - 3/2*y + 1", R2)
print(f, "|", f.derive(0), "|", f.derive(1))

# %% [markdown]
# ## Carriers
#
# The tangent carrier of R^2 and the affine Lie algebroid aff(1) over the line,
# with anchor e1 -> d/dx, e2 -> x d/dx and [e1, e2] = e1.

# %%
T = tangent_carrier(R2)
C = aff1_carrier()
print(carrier_check(T).summary())
print(carrier_check(C).summary())

# %% [markdown]
# Changing the structure constant to x breaks the anchor-morphism identity,
# and the report shows the residual instead of raising.

# %%
from uthchern import Carrier

broken = Carrier(C.chart, C.rank, C.anchor, {(0, 1): [parse_poly("x", C.chart), parse_poly("0", C.chart)]}, "broken")
print(carrier_check(broken).summary())

# %% [markdown]
# ## Super bundles
#
# A rank (2, 1) bundle. Odd endomorphisms swap the even and odd blocks; the
# supertrace kills supercommutators.

# %%
E = SuperBundle(R2, 2, 1)
A = E.endmap([[0, 0, "x"], [0, 0, "y"], ["x*y", 1, 0]])   # odd
B = E.endmap([["x", 1, 0], [0, "y", 0], [0, 0, "x^2"]])   # even
print("str A B  =", supertrace(A * B))
print("str [A,B] =", supertrace(scommutator(A, B, 1, 0)))
