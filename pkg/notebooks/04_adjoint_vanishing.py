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
# # The adjoint complex and vanishing of characters
#
# For a carrier L with anchor rho, the adjoint complex is L -> TM with
# differential rho. It carries a canonical connection that is flat but only
# a connection up to homotopy: axiom (iii), linearity in the function
# argument, fails and is repaired by a homotopy H.

# %%
from uthchern import (
    CanonicalAdjoint,
    MatrixConn,
    adjoint_complex,
    adjoint_sign_resolution,
    aff1_carrier,
    anchor_pullback,
    canonical_adjoint_conn,
    check_connection,
    check_uth,
    chern_form,
    chern_simons,
    exterior_d,
    g_connection_from_classical,
    tangent_carrier,
    vanishing_report,
)

C = aff1_carrier()
A = adjoint_complex(C)
print(A.bundle.r0, A.bundle.r1)

# %% [markdown]
# ## The homotopy sign
#
# The sign in front of H is fixed by testing both choices. The wrong one
# leaves a residual of 2 [H, partial].

# %%
res = adjoint_sign_resolution()
print(res["sigma"])
print("\n".join(check_uth(CanonicalAdjoint(A, -res["sigma"])).summary().splitlines()[:4]))

# %%
can = canonical_adjoint_conn(A)
rep = check_connection(can)
print({v.identity for v in rep.violations})   # only the linearity axiom fails
print(rep.failed("iii-linear")[0])
print(check_uth(can).summary())

# %% [markdown]
# ## An auxiliary connection
#
# A connection on the adjoint complex along TM induces one along L. Its Chern
# form is the anchor pullback of the auxiliary one, and it is exact through
# the transgression from the canonical connection.

# %%
E = A.bundle
aux = MatrixConn(tangent_carrier(C.chart), E, {0: E.endmap([["x", 1, 0], [0, "x", 0], [0, 0, "x"]])}, "aux")
induced = g_connection_from_classical(A, aux)
ch = chern_form(induced, 1)
print(ch, ch == anchor_pullback(C, chern_form(aux, 1)))
print(exterior_d(chern_simons(can, induced, 1)) == ch)

# %% [markdown]
# Over a one dimensional base the pullback is zero. A connection defined
# directly along L can have a nonzero character, still exact:

# %%
g = MatrixConn(C, E, {0: E.endmap([[0, 1, 0], [0, 0, 0], [0, 0, 0]]),
                      1: E.endmap([["x", "x", 0], [0, "x", 0], [0, 0, "x"]])}, "g")
chg = chern_form(g, 1)
print(check_connection(g).passed, chg, exterior_d(chern_simons(can, g, 1)) == chg)

# %% [markdown]
# The same pipeline in one call:

# %%
report = vanishing_report(C, aux, p_max=1)
print(sorted(report))
