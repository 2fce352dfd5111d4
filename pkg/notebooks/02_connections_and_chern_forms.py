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
# # Connections, curvature and Chern character forms
#
# A matrix connection on a super bundle over the tangent carrier of R^3.
# Curvature and its powers are built as nonlinear forms, then assembled into
# honest differential forms once their supertrace is known to be linear.

# %%
from uthchern import (
    Chart,
    MatrixConn,
    SuperBundle,
    assemble_true_form,
    check_connection,
    chern_form,
    curvature,
    d_nabla,
    exterior_d,
    tangent_carrier,
)

R3 = Chart(("x", "y", "z"))
T = tangent_carrier(R3)
E = SuperBundle(R3, 2, 1)

nabla = MatrixConn(T, E, {
    0: E.endmap([[0, "z", 0], [0, 0, 0], [0, 0, 0]]),
    1: E.endmap([["x", "x*y", 0], [0, 0, 0], [0, 0, "x"]]),
    2: E.endmap([[0, 0, 0], [0, "y", 0], [0, 0, 0]]),
}, "example")
print(check_connection(nabla).summary())

# %% [markdown]
# ## Curvature
#
# k(X, Y) evaluated on coordinate frame elements.

# %%
k = curvature(nabla)
e = [T.frame(i) for i in range(3)]
print(k(e[0], e[1]))
print(k(e[1], e[2]))

# %% [markdown]
# Bianchi: the covariant derivative of the curvature vanishes.

# %%
dk = d_nabla(nabla, k)
print(all(dk(a, b, c).is_zero() for a in e for b in e for c in e))

# %% [markdown]
# ## Chern character forms
#
# Raw forms str(k^p), without the 1/p! factor. Each one is closed. On R^3
# the forms of degree 4 and 6 vanish for dimension reasons.

# %%
for p in (1, 2, 3):
    ch = chern_form(nabla, p)
    print(p, ch, "| closed:", exterior_d(ch).is_zero())

# %% [markdown]
# `assemble_true_form` probes linearity before reading off coefficients.
# The curvature itself is endomorphism valued:

# %%
print(assemble_true_form(k))
