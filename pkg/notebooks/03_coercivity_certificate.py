# %% [markdown]
# # Coercivity certificate for the virial operator
#
# Two negative eigenvalues of the virial operator are compensated on the
# orthogonal complement of four weighted directions.  The Sylvester matrix A
# must keep a positive eigenvalue and the 2x2 Weinstein matrix M must be
# negative definite.  Repeated at alpha1 = 1.01, 1.05, 1.1.

# %%
import numpy as np

from zkblowup import make_grid, petviashvili
from zkblowup.coercivity import certify_coercivity

N, L = 256, 20.0
q = petviashvili(make_grid(N, N, L, L), tol=1e-12).q
np.set_printoptions(precision=5, suppress=True)

# %%
certs = {a: certify_coercivity(q, a) for a in (1.01, 1.05, 1.1)}
c = certs[1.01]
print("det M* =", round(c.det_mstar, 4), "  (Q_y, phi Q_y) =", round(c.qy_pairing, 5))
print("Gram determinant =", round(c.gram_det, 5))
print("virial eigenvalues:", np.round(c.virial_eigenvalues, 6), c.parities)

# %% A in the displayed scaling (raw weighted fields), and its eigenvalues
print(c.matrix_a_displayed)
print("eigenvalues", c.eigs_a_displayed)

# %% Weinstein matrix for f_e = f1 - 0.85 f2 + 0.5 f3 and the odd field
print(c.matrix_m_displayed)
print("unit-field M eigenvalues", c.eigs_m)

# %% sensitivity in alpha1
for a, ct in certs.items():
    print(f"alpha1 {a:<5g} eig A {np.round(ct.eigs_a_displayed, 4)}  f_e from {ct.fe_source:22s} "
          f"verdict {ct.verdict}")
