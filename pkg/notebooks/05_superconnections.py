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
# # Superconnections
#
# A superconnection adds form-valued pieces of other degrees to a
# connection. With omega0 = partial and an even 2-form multiple of the
# identity, the character agrees with that of the core connection.

# %%
from uthchern import (
    Chart,
    MatrixConn,
    SuperBundle,
    SuperConn,
    TrueForm,
    check_connection,
    chern_form,
    super_chern_form,
    tangent_carrier,
)

R4 = Chart(("x", "y", "z", "w"))
T = tangent_carrier(R4)
E = SuperBundle.from_blocks(R4, 2, 2, even_to_odd=[["1", "0"], ["0", "0"]])

core = MatrixConn(T, E, {
    1: E.endmap([["x", 0, 0, 0], [0, "2*x", 0, 0], [0, 0, "x", 0], [0, 0, 0, 0]]),
    3: E.endmap([["z", 0, 0, 0], ["y", "z", 0, 0], [0, 0, "z", 0], [0, 0, 0, "x"]]),
})
print(check_connection(core).summary())

# %%
w2 = TrueForm.endo(T, 2, {(0, 1): E.identity() * 3}, (2, 2))
S = SuperConn(core, omega0=E.partial, higher={2: w2})
for note in S.parity_notes():
    print(note)

# %% [markdown]
# Components of the super Chern form by degree. Only degree 2p survives and
# it matches the core.

# %%
for p in (1, 2):
    comps = super_chern_form(S, p)
    print(p, [str(c) for c in comps])
    print("   core:", chern_form(core, p))
